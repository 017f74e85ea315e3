#pragma once

#include <array>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "regrasp/gp_table.hpp"
#include "regrasp/object_gripper.hpp"

namespace regrasp::testing {

// The box of the reference table: 28.0 cm x 4.9 cm x 2.5 cm.
inline ObjectModel paper_box() {
    return ObjectModel("box", {Box({0.14, 0.0245, 0.0125})});
}

inline GripperModel default_gripper() { return GripperModel{}; }

// 1 m x 1 m table with its top surface at z = 0.
inline Box unit_table() {
    return Box({0.5, 0.5, 0.05}, Transform::from_translation({0.0, 0.0, -0.05}));
}

// Node set of the reference box table (placement, grasp).
inline std::set<std::pair<int, int>> fig_box_nodes() {
    return {{1, 1}, {1, 2}, {1, 3}, {1, 5}, {1, 6}, {2, 2}, {3, 3},
            {4, 2}, {4, 3}, {4, 4}, {4, 5}, {4, 6}, {5, 5}, {6, 6}};
}

// Point-membership oracle: p strictly inside the box by more than `margin`.
inline bool point_in_obb(const Vec3& p, const Box& box, const Transform& pose, double margin) {
    const Transform world = pose * box.local_pose;
    const Vec3 local = world.inverse() * p;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(local[i]) >= box.half_extents[i] - margin) return false;
    }
    return true;
}

// Deterministic lattice of points spanning the box interior.
inline std::vector<Vec3> obb_lattice(const Box& box, const Transform& pose, int per_axis) {
    std::vector<Vec3> pts;
    const Transform world = pose * box.local_pose;
    for (int i = 0; i < per_axis; ++i)
        for (int j = 0; j < per_axis; ++j)
            for (int k = 0; k < per_axis; ++k) {
                const Vec3 frac(-1.0 + 2.0 * i / (per_axis - 1), -1.0 + 2.0 * j / (per_axis - 1),
                                -1.0 + 2.0 * k / (per_axis - 1));
                pts.push_back(world * frac.cwiseProduct(box.half_extents));
            }
    return pts;
}

// Brute-force hull oracle for small point sets: every supporting plane found
// by exhaustive triple enumeration, deduplicated, with face areas.
struct OracleFace {
    Vec3 normal;
    double offset;
    double area;
};

std::vector<OracleFace> brute_force_hull(const std::vector<Vec3>& pts);

// Signed axis permutation acting on grasp approach directions 1..6. Models a
// relabeling of a box's local frame.
struct SignedPerm {
    std::array<int, 3> axis;
    std::array<int, 3> sign;

    int map_direction(int i) const {
        const int a = (i - 1) % 3;
        const int s = i <= 3 ? 1 : -1;
        const int a2 = axis[static_cast<std::size_t>(a)];
        const int s2 = s * sign[static_cast<std::size_t>(a)];
        return a2 + 1 + (s2 > 0 ? 0 : 3);
    }
};

std::vector<SignedPerm> all_signed_perms();

struct Relabeling {
    std::vector<int> placement_map;  // 1-based: placement_map[p] = reference index
    SignedPerm direction_map;
};

// Searches placement permutations x signed frame permutations mapping `mine`
// onto `reference` exactly. Single-box tables only.
std::optional<Relabeling> find_single_box_relabeling(const std::set<std::pair<int, int>>& mine,
                                                     const std::set<std::pair<int, int>>& reference,
                                                     int num_placements);

}  // namespace regrasp::testing

#include "regrasp/kinematics.hpp"

namespace regrasp::testing {

// Independent FK oracle: product of exponentials about the home-pose joint
// axes applied to the home tool pose.
Transform poe_fk(const RobotModel& robot, const Eigen::VectorXd& q);

Eigen::VectorXd random_configuration(const RobotModel& robot, Rng& rng, double shrink = 1.0);

}  // namespace regrasp::testing
