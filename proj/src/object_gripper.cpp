#include "regrasp/object_gripper.hpp"

#include <algorithm>
#include <cmath>

namespace regrasp {

ObjectModel::ObjectModel(std::string n, std::vector<Box> b) : name(std::move(n)), boxes(std::move(b)) {
    if (boxes.empty()) throw ValidationError("ObjectModel: needs at least one box");
}

const Box& ObjectModel::box(int j) const {
    if (j < 1 || j > num_boxes()) throw OutOfRangeError("ObjectModel: box index out of range");
    return boxes[static_cast<std::size_t>(j - 1)];
}

std::vector<Vec3> ObjectModel::corner_points() const {
    std::vector<Vec3> pts;
    pts.reserve(boxes.size() * 8);
    for (const Box& b : boxes) {
        const auto c = b.corners();
        pts.insert(pts.end(), c.begin(), c.end());
    }
    return pts;
}

std::vector<Box> GripperModel::body_boxes(double opening) const {
    if (opening < 0.0 || opening > max_opening + 1e-12) {
        throw OutOfRangeError("GripperModel: opening outside [0, max_opening]");
    }
    const Vec3 finger_half(finger_cross.x() / 2.0, finger_cross.y() / 2.0, finger_length / 2.0);
    const double finger_y = opening / 2.0 + finger_cross.y() / 2.0;
    const double finger_z = -finger_length / 2.0;
    std::vector<Box> out;
    out.emplace_back(palm_dims / 2.0,
                     Transform::from_translation({0.0, 0.0, -finger_length - palm_dims.z() / 2.0}));
    out.emplace_back(finger_half, Transform::from_translation({0.0, finger_y, finger_z}));
    out.emplace_back(finger_half, Transform::from_translation({0.0, -finger_y, finger_z}));
    return out;
}

Vec3 direction_vector(int direction) {
    Vec3 v = Vec3::Zero();
    v[direction_axis(direction)] = direction_sign(direction);
    return v;
}

int direction_axis(int direction) {
    if (direction < 1 || direction > 6) throw OutOfRangeError("direction must be in 1..6");
    return (direction - 1) % 3;
}

int direction_sign(int direction) {
    if (direction < 1 || direction > 6) throw OutOfRangeError("direction must be in 1..6");
    return direction <= 3 ? 1 : -1;
}

int grasp_class_index(int direction, int box_index) {
    if (direction < 1 || direction > 6) throw OutOfRangeError("grasp direction must be in 1..6");
    if (box_index < 1) throw OutOfRangeError("box index must be >= 1");
    return direction + 6 * (box_index - 1);
}

GraspClass decode_grasp_class(int index, int num_boxes) {
    if (index < 1 || index > 6 * num_boxes) {
        throw OutOfRangeError("grasp class index out of range");
    }
    GraspClass cls;
    cls.direction = (index - 1) % 6 + 1;
    cls.box_index = (index - 1) / 6 + 1;
    return cls;
}

double grasp_width(const ObjectModel& object, const GraspClass& cls, int lateral_axis) {
    const Box& box = object.box(cls.box_index);
    if (lateral_axis < 0 || lateral_axis > 2 || lateral_axis == direction_axis(cls.direction)) {
        throw OutOfRangeError("lateral axis must be perpendicular to the approach axis");
    }
    return 2.0 * box.half_extents[lateral_axis];
}

double default_depth_offset(const ObjectModel& object, const GripperModel& gripper,
                            const GraspClass& cls) {
    const Box& box = object.box(cls.box_index);
    const double face_depth = 2.0 * box.half_extents[direction_axis(cls.direction)];
    return std::min(gripper.finger_length, face_depth) / 2.0;
}

namespace {

// Gripper pose in the grasped box's frame.
Transform grasp_in_box_frame(const Box& box, const GripperModel& gripper, const GraspClass& cls,
                             const GraspParams& params) {
    const int app_axis = direction_axis(cls.direction);
    if (params.lateral_axis < 0 || params.lateral_axis > 2 || params.lateral_axis == app_axis) {
        throw OutOfRangeError("gripper_pose: lateral axis not perpendicular to approach");
    }
    const int slide_axis = 3 - app_axis - params.lateral_axis;
    const double h_slide = box.half_extents[slide_axis];
    if (std::abs(params.slide_offset) > h_slide + 1e-12) {
        throw OutOfRangeError("gripper_pose: slide offset beyond the face");
    }
    if (params.depth_offset < -1e-12 || params.depth_offset > gripper.finger_length + 1e-12) {
        throw OutOfRangeError("gripper_pose: depth offset outside the finger length");
    }

    const Vec3 d = direction_vector(cls.direction);
    const Vec3 approach = -d;  // gripper +z
    Vec3 lateral = Vec3::Zero();
    lateral[params.lateral_axis] = 1.0;
    const Vec3 sliding = lateral.cross(approach);  // gripper +x, so x cross y = z

    Eigen::Matrix3d rot;
    rot.col(0) = sliding;
    rot.col(1) = lateral;
    rot.col(2) = approach;
    Quat q(rot);
    if (std::abs(params.roll) > 1e-15) {
        q = Quat(Eigen::AngleAxisd(params.roll, sliding)) * q;
    }

    const double h_app = box.half_extents[app_axis];
    const Vec3 tcp = d * (h_app - params.depth_offset) + sliding * params.slide_offset;
    return Transform(q, tcp);
}

}  // namespace

Transform gripper_pose(const Transform& object_pose, const ObjectModel& object,
                       const GripperModel& gripper, const GraspClass& cls,
                       const GraspParams& params) {
    const double width = grasp_width(object, cls, params.lateral_axis);
    if (width > gripper.max_opening + 1e-12) {
        throw InfeasibleGraspError("gripper_pose: grasped width exceeds the opening");
    }
    const Box& box = object.box(cls.box_index);
    return object_pose * box.local_pose * grasp_in_box_frame(box, gripper, cls, params);
}

Transform grasp_object_in_gripper(const ObjectModel& object, const GripperModel& gripper,
                                  const GraspClass& cls, const GraspParams& params) {
    const Box& box = object.box(cls.box_index);
    const Transform in_box = grasp_in_box_frame(box, gripper, cls, params);
    return (box.local_pose * in_box).inverse();
}

std::optional<GraspMatch> classify_grasp(const ObjectModel& object, const GripperModel& gripper,
                                         const Transform& object_pose,
                                         const Transform& gripper_pose_world, double tol) {
    // Recognizes roll-free perpendicular grasps: all three gripper axes must
    // align with box axes.
    for (int j = 1; j <= object.num_boxes(); ++j) {
        const Box& box = object.box(j);
        const Transform in_box = (object_pose * box.local_pose).inverse() * gripper_pose_world;
        const Eigen::Matrix3d rot = in_box.rotation_matrix();

        auto aligned_axis = [&](const Vec3& v) {
            for (int a = 0; a < 3; ++a) {
                if (std::abs(std::abs(v[a]) - 1.0) < tol) return a;
            }
            return -1;
        };
        const int slide_axis = aligned_axis(rot.col(0));
        const int lat_axis = aligned_axis(rot.col(1));
        const int app_axis = aligned_axis(rot.col(2));
        if (slide_axis < 0 || lat_axis < 0 || app_axis < 0) continue;
        if (slide_axis == lat_axis || lat_axis == app_axis || slide_axis == app_axis) continue;

        // Gripper approaches against the face whose outward normal it opposes.
        const double app_comp = rot.col(2)[app_axis];
        const int direction = app_axis + 1 + (app_comp < 0.0 ? 0 : 3);

        GraspParams params;
        params.lateral_axis = lat_axis;
        params.roll = 0.0;
        const Vec3 d = direction_vector(direction);
        const double h_app = box.half_extents[app_axis];
        // Measure the offset along the canonical sliding direction (lateral
        // sign is canonicalized: both finger orderings are the same grasp).
        Vec3 lat_canon = Vec3::Zero();
        lat_canon[lat_axis] = 1.0;
        const Vec3 slide_canon = lat_canon.cross(-d);
        params.slide_offset = in_box.translation.dot(slide_canon);
        params.depth_offset = h_app - in_box.translation.dot(d);

        const int s_axis = 3 - app_axis - lat_axis;
        const double h_slide = box.half_extents[s_axis];
        if (std::abs(params.slide_offset) > h_slide + tol) continue;
        if (params.depth_offset < -tol || params.depth_offset > gripper.finger_length + tol)
            continue;
        if (std::abs(in_box.translation.dot(rot.col(1))) > tol) continue;  // off the grasp plane
        if (grasp_width(object, {direction, j}, lat_axis) > gripper.max_opening + 1e-12) continue;

        params.slide_offset = std::clamp(params.slide_offset, -h_slide, h_slide);
        params.depth_offset = std::clamp(params.depth_offset, 0.0, gripper.finger_length);
        return GraspMatch{GraspClass{direction, j}, params};
    }
    return std::nullopt;
}

double table_top_z(const Box& table) {
    return table.local_pose.translation.z() + table.half_extents.z();
}

namespace {

// Max horizontal distance of any object corner from the vertical axis through
// the face centroid when resting on the given face.
double footprint_radius(const PlacementClass& cls, const ObjectModel& object) {
    const Quat base = Quat::FromTwoVectors(cls.face.outward_normal, -Vec3::UnitZ());
    double r = 0.0;
    for (const Vec3& p : object.corner_points()) {
        const Vec3 rel = base * (p - cls.face.centroid);
        r = std::max(r, rel.head<2>().norm());
    }
    return r;
}

}  // namespace

Transform object_pose_from_placement(const PlacementClass& cls, const PlacementParams& params,
                                     double top_z, const ObjectModel& object, const Box* table) {
    const Quat base = Quat::FromTwoVectors(cls.face.outward_normal, -Vec3::UnitZ());
    const Quat rot = Quat(Eigen::AngleAxisd(params.theta, Vec3::UnitZ())) * base;
    const Vec3 target(params.x, params.y, top_z);
    const Transform pose(rot, target - rot * cls.face.centroid);
    if (table != nullptr) {
        const Vec3 c = table->local_pose.translation;
        const Vec3 h = table->half_extents;
        for (const Vec3& p : object.corner_points()) {
            const Vec3 world = pose * p;
            if (world.x() < c.x() - h.x() || world.x() > c.x() + h.x() ||
                world.y() < c.y() - h.y() || world.y() > c.y() + h.y()) {
                throw OutOfTableBoundsError("placement footprint leaves the table");
            }
        }
    }
    return pose;
}

std::optional<PlacementMatch> classify_placement(const std::vector<PlacementClass>& classes,
                                                 const Transform& object_pose, double top_z,
                                                 double tol) {
    for (const PlacementClass& cls : classes) {
        const Vec3 n_world = object_pose.rotation * cls.face.outward_normal;
        if ((n_world + Vec3::UnitZ()).norm() > 1e-6) continue;
        const Vec3 c_world = object_pose * cls.face.centroid;
        if (std::abs(c_world.z() - top_z) > tol) continue;

        const Quat base = Quat::FromTwoVectors(cls.face.outward_normal, -Vec3::UnitZ());
        const Quat residual = (object_pose.rotation * base.conjugate()).normalized();
        const Vec3 ex = residual * Vec3::UnitX();
        const double theta = std::atan2(ex.y(), ex.x());
        const Quat expect = Quat(Eigen::AngleAxisd(theta, Vec3::UnitZ()));
        if (rotation_distance(residual, expect) > 1e-6) continue;

        PlacementMatch match;
        match.placement_class = cls.index;
        match.params = {c_world.x(), c_world.y(), theta};
        return match;
    }
    return std::nullopt;
}

std::vector<int> feasible_lateral_axes(const ObjectModel& object, const GripperModel& gripper,
                                       const GraspClass& cls) {
    const int app_axis = direction_axis(cls.direction);
    std::vector<int> axes;
    for (int a = 0; a < 3; ++a) {
        if (a == app_axis) continue;
        if (grasp_width(object, cls, a) <= gripper.max_opening + 1e-12) axes.push_back(a);
    }
    return axes;
}

GraspParams sample_grasp(const ObjectModel& object, const GripperModel& gripper,
                         const GraspClass& cls, Rng& rng) {
    const std::vector<int> axes = feasible_lateral_axes(object, gripper, cls);
    if (axes.empty()) {
        throw InfeasibleGraspError("sample_grasp: no lateral axis fits the opening");
    }
    GraspParams params;
    std::uniform_int_distribution<std::size_t> pick(0, axes.size() - 1);
    params.lateral_axis = axes[pick(rng)];
    const Box& box = object.box(cls.box_index);
    const int slide_axis = 3 - direction_axis(cls.direction) - params.lateral_axis;
    std::uniform_real_distribution<double> slide(-box.half_extents[slide_axis],
                                                 box.half_extents[slide_axis]);
    params.slide_offset = slide(rng);
    params.depth_offset = default_depth_offset(object, gripper, cls);
    params.roll = 0.0;
    return params;
}

PlacementParams sample_placement(const PlacementClass& cls, const ObjectModel& object,
                                 const Box& table, Rng& rng) {
    const double r = footprint_radius(cls, object);
    const Vec3 c = table.local_pose.translation;
    const Vec3 h = table.half_extents;
    if (r >= h.x() || r >= h.y()) {
        throw OutOfTableBoundsError("sample_placement: table smaller than the object footprint");
    }
    std::uniform_real_distribution<double> dx(c.x() - (h.x() - r), c.x() + (h.x() - r));
    std::uniform_real_distribution<double> dy(c.y() - (h.y() - r), c.y() + (h.y() - r));
    std::uniform_real_distribution<double> dtheta(-M_PI, M_PI);
    return {dx(rng), dy(rng), dtheta(rng)};
}

}  // namespace regrasp
