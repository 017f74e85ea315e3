#pragma once

#include <optional>

#include "regrasp/kinematics.hpp"
#include "regrasp/task_plans.hpp"

namespace regrasp {

struct RrtConfig {
    double step = 0.1;            // joint-space step, rad
    int max_iterations = 2000;    // per connect attempt
    int validation_substeps = 10; // interior collision checks per accepted interval
    double lift_height = 0.03;    // vertical lift structuring transfer segments
    double lift_step = 0.005;     // Cartesian tracking resolution of the lift
};

struct PlannerConfig {
    double t_max = 60.0;                 // planning-phase budget, seconds
    int failure_threshold = 20;          // N: failed attempts before a Q edge is dropped
    int delta = 0;                       // plan-length increment; 0 picks 1 or 2 by endpoint type
    RrtConfig rrt;
    double sample_weight_exponent = 1.0; // tree sampling weight: (depth+1)^exponent
    std::uint64_t seed = 0;
    int ik_seeds = 16;
    double adopt_probability = 0.7;      // bias toward opposite-tree parameters when available
};

enum class PlanStatus { Success, NoSolution, Disconnected, Unclassifiable };

inline const char* to_string(PlanStatus s) {
    switch (s) {
        case PlanStatus::Success: return "success";
        case PlanStatus::NoSolution: return "no-solution";
        case PlanStatus::Disconnected: return "disconnected";
        default: return "unclassifiable";
    }
}

struct PlanStats {
    double prep_seconds = 0.0;
    double plan_seconds = 0.0;
    int transitions = -1;
    int final_plan_length = 0;  // k of the iteration that succeeded
    int extensions = 0;         // extension attempts across all iterations
};

struct PlanResult {
    PlanStatus status = PlanStatus::NoSolution;
    ManipulationPath path;
    PlanStats stats;
    std::vector<TableNode> realized_plan;  // table nodes along the solution
};

/// Endpoint classification against the object's placement classes and the
/// gripper model: which of P / G the configuration belongs to.
struct EndpointClass {
    std::optional<PlacementMatch> placement;
    std::optional<GraspMatch> grasp;

    bool in_p() const { return placement.has_value(); }
    bool in_g() const { return grasp.has_value(); }
    bool in_gp() const { return in_p() && in_g(); }
    QueryClass query_class() const;
};

EndpointClass classify_endpoint(const WorldModel& world,
                                const std::vector<PlacementClass>& placements,
                                const CompositeConfig& config);

// Plan lengths can grow by 1 when an endpoint already sits in the transition
// set (either mode can open or close the plan); otherwise parity is fixed and
// the increment must be 2 to keep paths irreducible.
int choose_path_length_increment(const EndpointClass& start, const EndpointClass& goal);

// Mode-constrained local planner: straight-line check first, then a
// bidirectional RRT in joint space. The object pose (transit) or the grasp
// transform (transfer) is held exactly; `opening` is the finger separation
// used for collision. Returns nullopt when the connection fails within
// budget.
std::optional<SingleModePath> local_plan(const WorldModel& world, const CompositeConfig& from,
                                         const CompositeConfig& to, PathKind mode,
                                         const RrtConfig& rrt, Rng& rng, double opening = -1.0);

/// Search-tree vertex: a composite configuration labeled with its table node
/// and guidance level, plus the single-mode path that reached it.
struct TreeVertex {
    CompositeConfig config;
    TableNode label;
    int level = 0;
    int parent = -1;
    SingleModePath edge;  // from parent to this vertex
    std::optional<GraspMatch> grasp;
    Transform grasp_x;  // gripper^-1 * object, valid when grasp is set
};

struct SearchTree {
    std::vector<TreeVertex> vertices;
    bool forward = true;
    int goal_level = 0;  // plan length k; depth of a vertex = distance from this tree's root
};

// Draws a vertex with probability proportional to (depth+1)^exponent, depth
// measured from the tree's own root level.
int sample_tree(const SearchTree& tree, double exponent, Rng& rng);

// Splices the forward branch, the bridge (oriented forward-tree -> backward
// tree), and the reversed backward branch into one reduced manipulation path.
PlanResult extract_solution(const SearchTree& fw, const SearchTree& bw, int fw_id, int bw_id,
                            const SingleModePath& bridge);

// Plans a bridging segment between two tree vertices and snaps its endpoint
// onto `to` when the residual is below the mode's weld tolerance.
std::optional<SingleModePath> try_bridge(const WorldModel& world, const TreeVertex& from,
                                         const TreeVertex& to, PathKind mode,
                                         const RrtConfig& rrt, Rng& rng, double opening);

/// Guidance-graph-driven bidirectional planner over the composite space: the
/// table is built once per instance (pre-processing), then queries iterate
/// over task-plan lengths and grow two trees through the classes each plan
/// prescribes.
class GuidedPlanner {
public:
    GuidedPlanner(WorldModel world, PlannerConfig config);

    PlanResult plan(const CompositeConfig& start, const CompositeConfig& goal);

    // Table accessors (also used by the CLI's dry-run output).
    const GPTable& table() const { return table_; }
    const std::vector<PlacementClass>& placements() const { return placements_; }
    double prep_seconds() const { return prep_seconds_; }

    const WorldModel& world() const { return world_; }
    const PlannerConfig& config() const { return config_; }

private:
    struct ExtensionResult {
        enum Kind { Reached, Advanced, Failed } kind = Failed;
        int new_vertex = -1;
        int bridge_from = -1;  // vertex in the active tree
        int bridge_to = -1;    // vertex in the opposite tree
        SingleModePath bridge;
    };

    ExtensionResult extend_from(SearchTree& active, const SearchTree& opposite, int v_id,
                                GuidanceGraph& q, Rng& rng);
    bool plan_path(GuidanceGraph& q, SearchTree& fw, SearchTree& bw, double budget,
                   PlanResult& result, Rng& rng);

    std::optional<CompositeConfig> solve_target(const Transform& gripper_target,
                                                const Transform& object_pose,
                                                const Eigen::VectorXd& bias, double width,
                                                Rng& rng) const;

    WorldModel world_;
    PlannerConfig config_;
    std::vector<PlacementClass> placements_;
    GPTable table_;
    double prep_seconds_ = 0.0;
    int extensions_ = 0;
};

// Re-validates every segment at `substeps` interpolated configurations per
// waypoint interval. The parallel flavor fans the checks out with OpenMP and
// must agree with the serial reference exactly.
bool audit_path(const WorldModel& world, const ManipulationPath& path, int substeps,
                bool parallel = false);

}  // namespace regrasp
