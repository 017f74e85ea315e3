#pragma once

#include "regrasp/planner.hpp"

namespace regrasp {

/// Weights of the composite-space distance: a weighted sum of squared
/// joint-space distance and an object-pose term (geodesic rotation angle
/// plus translation).
struct CompositeMetricConfig {
    double alpha = 0.5;
    double rotation_weight = 1.0;
    double translation_weight = 1.0;
};

double composite_distance(const CompositeConfig& a, const CompositeConfig& b,
                          const CompositeMetricConfig& cfg);

struct PmpConfig {
    double t_max = 60.0;
    RrtConfig rrt;
    CompositeMetricConfig metric;
    std::uint64_t seed = 0;
    int ik_seeds = 8;
    double adopt_probability = 0.5;  // reuse opposite-tree poses/grasps this often
};

/// Primitive manipulation planner: bidirectional composite-space trees with
/// no pre-processing and no guidance. Each iteration samples a composite
/// configuration, adapts it to the nearest tree vertex under the composite
/// metric, and attempts the mode the transition diagram allows.
class PrimitivePlanner {
public:
    PrimitivePlanner(WorldModel world, PmpConfig config);
    PlanResult plan(const CompositeConfig& start, const CompositeConfig& goal);

private:
    WorldModel world_;
    PmpConfig config_;
    std::vector<PlacementClass> placements_;
};

struct DbmpConfig {
    int rotation_samples = 8;   // yaw samples per placement class
    int slide_samples = 11;     // slide offsets per lateral axis in the grasp set
    double t_max = 60.0;
    RrtConfig rrt;
    std::uint64_t seed = 0;
    int ik_seeds = 8;
    int max_sequence_length = 4;  // carries per candidate placement sequence
};

/// One sampled grasp of the discretization-based planner's grasp set.
struct DiscreteGrasp {
    GraspClass cls;
    GraspParams params;
};

/// Two-layer regrasp graph: discretized placements in the first layer, the
/// discrete grasp set in the second. Placements connect when they share at
/// least one common valid grasp.
struct RegraspGraph {
    struct PlacementNode {
        int placement_class = 0;
        Transform object_pose;
        std::vector<int> valid_grasps;  // indices into `grasps`, sorted
    };

    std::vector<DiscreteGrasp> grasps;
    std::vector<PlacementNode> placements;

    bool connected(int a, int b) const;
    std::vector<int> common_grasps(int a, int b) const;
};

// Enumerates the grasp set (all width-feasible class/lateral/offset triples)
// and checks every grasp at every discretized placement for IK reachability
// and collision-freedom.
RegraspGraph dbmp_build(const WorldModel& world, const DbmpConfig& config, Rng& rng);

// The grasp set alone (no placement validity), for size accounting.
std::vector<DiscreteGrasp> dbmp_grasp_set(const ObjectModel& object, const GripperModel& gripper,
                                          int slide_samples);

/// Depth-first search over placement sequences, then grasp assignment, then
/// motion generation. Placement and grasp orders are shuffled per run.
class DiscretizationPlanner {
public:
    DiscretizationPlanner(WorldModel world, DbmpConfig config);

    // Builds the regrasp graph (timed as prep) on first use.
    PlanResult plan(const CompositeConfig& start, const CompositeConfig& goal);

    const RegraspGraph& graph() const { return graph_; }
    double prep_seconds() const { return prep_seconds_; }

private:
    WorldModel world_;
    DbmpConfig config_;
    std::vector<PlacementClass> placements_;
    RegraspGraph graph_;
    double prep_seconds_ = 0.0;
    bool built_ = false;
};

}  // namespace regrasp
