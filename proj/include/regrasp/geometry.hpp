#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <vector>

#include "regrasp/errors.hpp"

namespace regrasp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

// Interpenetration deeper than this counts as a collision; exact surface
// contact does not. Grasps and placements live at contact, so the margin
// keeps them collision-free.
inline constexpr double kContactClearance = 1e-6;

// Margin (m) by which the projected COM must sit inside the support polygon
// for a placement to count as stable.
inline constexpr double kStabilityMargin = 1e-3;

/// Rigid transform as unit quaternion + translation.
struct Transform {
    Quat rotation{1.0, 0.0, 0.0, 0.0};
    Vec3 translation{0.0, 0.0, 0.0};

    Transform() = default;
    Transform(const Quat& q, const Vec3& t);

    static Transform identity() { return {}; }
    static Transform from_translation(const Vec3& t);
    static Transform from_axis_angle(const Vec3& axis, double angle, const Vec3& t = Vec3::Zero());
    static Transform rot_z(double angle, const Vec3& t = Vec3::Zero());

    Transform operator*(const Transform& other) const;
    Vec3 operator*(const Vec3& point) const;
    Transform inverse() const;

    Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }

    bool approx_equal(const Transform& other, double tol = 1e-9) const;
};

// Smallest rotation angle between two orientations, in [0, pi].
double rotation_distance(const Quat& a, const Quat& b);

/// Axis-aligned box in its own frame, positioned by local_pose within a
/// parent frame. All dimensions are half-extents in meters.
struct Box {
    Vec3 half_extents{0.0, 0.0, 0.0};
    Transform local_pose;

    Box() = default;
    Box(const Vec3& half, const Transform& pose = Transform::identity());

    std::vector<Vec3> corners() const;  // 8 corners in the parent frame
    double volume() const { return 8.0 * half_extents.prod(); }
    Vec3 center() const { return local_pose.translation; }
};

// True iff the interiors overlap by more than kContactClearance. pose_a/pose_b
// position each box's parent frame in the world; the boxes' local_pose
// composes on top. Symmetric in its arguments.
bool obb_overlap(const Box& box_a, const Transform& pose_a, const Box& box_b,
                 const Transform& pose_b);

// Separation distance lower bound along the best SAT axis; negative means
// penetration depth. Used by tests and the placement sampler.
double obb_separation(const Box& box_a, const Transform& pose_a, const Box& box_b,
                      const Transform& pose_b);

/// One face of a convex hull. Coplanar triangles are merged, so a box hull
/// has exactly 6 faces. Vertices are ordered counter-clockwise when viewed
/// from outside.
struct HullFace {
    Vec3 outward_normal;
    std::vector<Vec3> vertices;
    std::vector<Vec2> support_polygon;  // vertices in the in-plane (u, v) basis
    Vec3 basis_u, basis_v;              // in-plane basis, u x v = normal
    Vec3 centroid;
    double plane_offset = 0.0;  // n . x = plane_offset for points on the face
    double area = 0.0;

    Vec2 project(const Vec3& point) const;
};

// Convex hull of >= 4 non-degenerate points; throws DegenerateInputError for
// coplanar or collinear input.
std::vector<HullFace> convex_hull(const std::vector<Vec3>& points);

// True iff p lies inside the convex polygon (CCW) with at least `margin`
// clearance from every edge.
bool point_in_polygon(const std::vector<Vec2>& polygon, const Vec2& p, double margin = 0.0);

/// A stable resting orientation: the hull face in contact with the table.
/// Indices are 1-based and follow a deterministic ordering (descending face
/// area, then lexicographic outward normal).
struct PlacementClass {
    int index = 0;
    HullFace face;
    Vec3 com;  // object-frame center of mass used for the stability test
};

Vec3 volume_weighted_centroid(const std::vector<Box>& boxes);

// One class per hull face whose support polygon contains the projected COM
// with margin kStabilityMargin.
std::vector<PlacementClass> stable_placement_classes(const std::vector<Box>& boxes);
std::vector<PlacementClass> stable_placement_classes(const std::vector<Box>& boxes, const Vec3& com);

}  // namespace regrasp
