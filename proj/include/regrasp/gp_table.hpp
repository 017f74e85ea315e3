#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regrasp/object_gripper.hpp"

namespace regrasp {

// Start/goal query nodes get their own identity so that two queries landing
// in the same class (e.g. both endpoints placed in placement class p) stay
// distinct nodes.
enum class QueryTag : int { None = 0, Start = 1, Goal = 2 };

/// Node of the grasp-placement table: a (placement class, grasp class) pair.
/// grasp == 0 marks an in-P query node, placement == 0 an in-G query node.
struct TableNode {
    int placement = 0;
    int grasp = 0;
    QueryTag tag = QueryTag::None;

    friend bool operator==(const TableNode&, const TableNode&) = default;
    friend auto operator<=>(const TableNode&, const TableNode&) = default;
};

std::string to_string(const TableNode& n);

enum class EdgeKind { Vertical, Horizontal };  // vertical: transit, horizontal: transfer

/// Undirected graph over placement x grasp classes. Adjacency is derived from
/// the row/column rule: nodes sharing a placement class connect vertically
/// (transit), nodes sharing a grasp class connect horizontally (transfer).
/// Every regular node carries a transit and a transfer self-loop.
class GPTable {
public:
    GPTable() = default;
    GPTable(std::vector<TableNode> nodes, int num_placement_classes, int num_grasp_classes);

    const std::vector<TableNode>& nodes() const { return nodes_; }
    int num_placement_classes() const { return num_placement_classes_; }
    int num_grasp_classes() const { return num_grasp_classes_; }
    bool contains(const TableNode& n) const;

    // All nodes sharing a row or column with n, excluding n itself.
    std::vector<TableNode> neighbors(const TableNode& n) const;

    static bool adjacent(const TableNode& a, const TableNode& b);
    static EdgeKind edge_kind(const TableNode& a, const TableNode& b);

    bool has_transit_loop(const TableNode& n) const;
    bool has_transfer_loop(const TableNode& n) const;

    void add_node(const TableNode& n);

private:
    std::vector<TableNode> nodes_;  // sorted, unique
    int num_placement_classes_ = 0;
    int num_grasp_classes_ = 0;
};

struct TableBuildOptions {
    // Slide offsets tried per lateral axis. The default checks the nominal
    // centered approach only, which is what reproduces the reference table
    // topologies; larger values sweep evenly spaced offsets across the face.
    int slide_samples = 1;
    bool parallel = true;
};

// Feasibility sweep for one node: deterministic scan over lateral axes and
// slide offsets, roll 0, centered depth; succeeds on the first gripper pose
// that clears the table.
std::optional<GraspParams> find_feasible_grasp(const ObjectModel& object,
                                               const GripperModel& gripper, const Box& table,
                                               const Transform& object_pose, const GraspClass& cls,
                                               int slide_samples = 1);

// Builds the table by checking, for every placement class at a nominal
// tabletop location, whether the gripper can approach each box from each of
// the 6 directions without colliding with the table. OpenMP-parallel over
// candidate nodes; results are independent of thread count.
GPTable build_table(const ObjectModel& object, const GripperModel& gripper, const Box& table,
                    const TableBuildOptions& options = {});

// Straightforward serial construction, kept as the reference the parallel
// kernel is tested and benchmarked against.
GPTable build_table_reference(const ObjectModel& object, const GripperModel& gripper,
                              const Box& table, int slide_samples = 1);

/// Classification of a query endpoint used to attach it to the table.
struct QueryClass {
    std::optional<int> placement_class;
    std::optional<int> grasp_class;
};

// Returns the node representing the endpoint, adding a (p, 0) / (0, g) query
// node when the endpoint lies in only one of P, G. Endpoints in both map to
// the regular node, which is added if the construction sweep missed it.
TableNode attach_query_node(GPTable& table, const QueryClass& q, QueryTag tag);

// Convenience wrapper matching the start/goal pair form.
GPTable add_query_nodes(const GPTable& table, const QueryClass& start, const QueryClass& goal,
                        TableNode* start_node = nullptr, TableNode* goal_node = nullptr);

enum class TableFormat { GridText, Svg, Json };

std::string export_table(const GPTable& table, TableFormat format);
GPTable import_table_json(const std::string& json_text);

}  // namespace regrasp
