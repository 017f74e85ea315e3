#pragma once

#include <vector>

#include "regrasp/gp_table.hpp"

namespace regrasp {

/// Sequence of table nodes connected by table edges. Plans are simple paths
/// whose edge orientations strictly alternate, so a plan of length k (k
/// edges) yields an irreducible manipulation path with k - 1 transitions.
using TaskPlan = std::vector<TableNode>;

// BFS distance between two table nodes; throws DisconnectedError when no
// path exists and UnknownNodeError for nodes outside the table.
int shortest_plan_length(const GPTable& table, const TableNode& a, const TableNode& b);

// All simple alternating plans with exactly k edges from a to b, enumerated
// in lexicographic node order.
std::vector<TaskPlan> plans_of_length(const GPTable& table, int k, const TableNode& a,
                                      const TableNode& b);

/// Directed, level-indexed graph built from equal-length task plans. A node
/// is a (level d, table node c) pair; every edge advances the level by one.
/// Edges accumulate failure counters during planning and are removed (with
/// dangling-node pruning) once they exceed the planner's threshold.
class GuidanceGraph {
public:
    struct Node {
        int level = 0;
        TableNode c;
        bool alive = true;
    };
    struct Edge {
        int from = -1;
        int to = -1;
        int failures = 0;
        bool alive = true;
    };

    GuidanceGraph() = default;
    static GuidanceGraph from_plans(const std::vector<TaskPlan>& plans);

    bool empty() const { return nodes_.empty(); }
    int plan_length() const { return plan_length_; }
    int num_alive_edges() const;

    int node_id(int level, const TableNode& c) const;  // -1 when absent or pruned
    const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const Edge& edge(int id) const { return edges_.at(static_cast<std::size_t>(id)); }
    std::size_t num_nodes_alive() const;

    std::vector<int> out_edges(int node_id) const;
    std::vector<int> in_edges(int node_id) const;
    EdgeKind edge_mode(int edge_id) const;

    // Increments the failure counter; once it exceeds the threshold the edge
    // is removed and unreachable nodes are pruned. Returns true if removed.
    bool record_failure(int edge_id, int threshold);

    void remove_edge(int edge_id);

    // True while some level-0 -> goal-level path survives.
    bool has_path() const;

    // Recovers the plan set encoded by the surviving level-monotone paths.
    std::vector<TaskPlan> enumerate_level_paths() const;

    int start_id() const { return start_id_; }
    int goal_id() const { return goal_id_; }

private:
    void prune();

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> out_;  // edge ids, including dead ones
    std::vector<std::vector<int>> in_;
    int plan_length_ = 0;
    int start_id_ = -1;
    int goal_id_ = -1;
};

}  // namespace regrasp
