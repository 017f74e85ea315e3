#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "regrasp/geometry.hpp"

namespace regrasp {

using Rng = std::mt19937_64;

/// Movable object composed of boxes. Box indices are 1-based to match the
/// grasp-class encoding.
struct ObjectModel {
    std::string name;
    std::vector<Box> boxes;

    ObjectModel() = default;
    ObjectModel(std::string n, std::vector<Box> b);

    int num_boxes() const { return static_cast<int>(boxes.size()); }
    const Box& box(int j) const;  // 1-based
    std::vector<Vec3> corner_points() const;
    Vec3 com() const { return volume_weighted_centroid(boxes); }
};

/// Parallel-jaw gripper. Local frame: +z is the approaching direction
/// (palm -> fingertips), +x is the sliding direction, +y is the lateral
/// direction (orthogonal to both finger surfaces). The origin sits midway
/// between the fingertips on the fingertip plane.
struct GripperModel {
    double max_opening = 0.085;
    double finger_length = 0.04;
    Vec2 finger_cross{0.02, 0.01};       // full cross-section: sliding x lateral
    Vec3 palm_dims{0.06, 0.06, 0.03};    // full dims: sliding x lateral x approach

    // Palm plus both fingers at the given opening, poses in the gripper frame.
    std::vector<Box> body_boxes(double opening) const;
};

// Approach directions 1..6 = +x, +y, +z, -x, -y, -z of the box's local frame.
Vec3 direction_vector(int direction);
int direction_axis(int direction);   // 0, 1, 2
int direction_sign(int direction);   // +1 or -1

/// Grasp class: approach direction i of component box j, index i + 6(j-1).
struct GraspClass {
    int direction = 1;  // 1..6
    int box_index = 1;  // 1..m
};

int grasp_class_index(int direction, int box_index);
GraspClass decode_grasp_class(int index, int num_boxes);

/// Continuous parameters within a grasp class.
struct GraspParams {
    int lateral_axis = 0;       // box axis index perpendicular to the approach axis
    double slide_offset = 0.0;  // u, along the sliding axis, |u| <= half face length
    double depth_offset = 0.0;  // finger engagement past the approached face
    double roll = 0.0;          // rotation about the sliding axis
};

/// Continuous parameters within a placement class: tabletop position and yaw.
struct PlacementParams {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

// Object width between the finger contact faces for this class/lateral axis.
double grasp_width(const ObjectModel& object, const GraspClass& cls, int lateral_axis);

// Centered engagement: fingers reach min(finger_length, face depth)/2 past the
// approached face.
double default_depth_offset(const ObjectModel& object, const GripperModel& gripper,
                            const GraspClass& cls);

// World pose of the gripper frame realizing the grasp. Throws
// InfeasibleGraspError when the grasped width exceeds the opening and
// OutOfRangeError for an invalid lateral axis or slide offset.
Transform gripper_pose(const Transform& object_pose, const ObjectModel& object,
                       const GripperModel& gripper, const GraspClass& cls,
                       const GraspParams& params);

// Object pose in the gripper frame (constant along a transfer path):
// T_object = T_gripper * X.
Transform grasp_object_in_gripper(const ObjectModel& object, const GripperModel& gripper,
                                  const GraspClass& cls, const GraspParams& params);

// Recovers (class, params) from a relative gripper/object pose, or nullopt if
// the pose is not a perpendicular box grasp within tolerance.
struct GraspMatch {
    GraspClass cls;
    GraspParams params;
};
std::optional<GraspMatch> classify_grasp(const ObjectModel& object, const GripperModel& gripper,
                                         const Transform& object_pose,
                                         const Transform& gripper_pose_world, double tol = 1e-5);

// Object pose resting on the class's hull face, face plane at table_top_z,
// face centroid above (x, y), rotated by theta about the table normal. When a
// table box is given, the object footprint is checked against its bounds.
Transform object_pose_from_placement(const PlacementClass& cls, const PlacementParams& params,
                                     double table_top_z, const ObjectModel& object,
                                     const Box* table = nullptr);

// Recovers (class index, params) for a pose resting on the table, or nullopt.
struct PlacementMatch {
    int placement_class;
    PlacementParams params;
};
std::optional<PlacementMatch> classify_placement(const std::vector<PlacementClass>& classes,
                                                 const Transform& object_pose, double table_top_z,
                                                 double tol = 1e-6);

// Uniform sample over the valid parameter box of the class. Throws
// InfeasibleGraspError when no lateral axis fits the opening.
GraspParams sample_grasp(const ObjectModel& object, const GripperModel& gripper,
                         const GraspClass& cls, Rng& rng);

// Uniform placement sample keeping the footprint inside the table bounds.
PlacementParams sample_placement(const PlacementClass& cls, const ObjectModel& object,
                                 const Box& table, Rng& rng);

// Lateral axes perpendicular to the approach whose width fits the opening.
std::vector<int> feasible_lateral_axes(const ObjectModel& object, const GripperModel& gripper,
                                       const GraspClass& cls);

double table_top_z(const Box& table);

}  // namespace regrasp
