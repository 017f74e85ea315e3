#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "regrasp/task_plans.hpp"
#include "test_helpers.hpp"

using namespace regrasp;
using namespace regrasp::testing;

namespace {

TableNode N(int p, int g) { return TableNode{p, g, QueryTag::None}; }

GPTable box_table() {
    std::vector<TableNode> nodes;
    for (const auto& [p, g] : fig_box_nodes()) nodes.push_back(N(p, g));
    return GPTable(std::move(nodes), 6, 6);
}

GPTable random_table(Rng& rng, int placements, int grasps, double density) {
    std::vector<TableNode> nodes;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int p = 1; p <= placements; ++p) {
        for (int g = 1; g <= grasps; ++g) {
            if (u(rng) < density) nodes.push_back(N(p, g));
        }
    }
    if (nodes.empty()) nodes.push_back(N(1, 1));
    return GPTable(std::move(nodes), placements, grasps);
}

// Exhaustive alternating-simple-path enumeration, independent of the DFS in
// plans_of_length: plain breadth-first expansion of partial paths.
std::vector<TaskPlan> enumerate_oracle(const GPTable& table, int k, const TableNode& a,
                                       const TableNode& b) {
    std::vector<TaskPlan> done;
    std::vector<TaskPlan> frontier{{a}};
    for (int step = 0; step < k; ++step) {
        std::vector<TaskPlan> next;
        for (const TaskPlan& path : frontier) {
            for (const TableNode& n : table.nodes()) {
                if (!GPTable::adjacent(path.back(), n)) continue;
                if (std::find(path.begin(), path.end(), n) != path.end()) continue;
                if (path.size() >= 2) {
                    const EdgeKind prev = GPTable::edge_kind(path[path.size() - 2], path.back());
                    if (GPTable::edge_kind(path.back(), n) == prev) continue;
                }
                TaskPlan listed = path;
                listed.push_back(n);
                next.push_back(std::move(listed));
            }
        }
        frontier = std::move(next);
    }
    for (TaskPlan& path : frontier) {
        if (path.back() == b) done.push_back(std::move(path));
    }
    return done;
}

}  // namespace

TEST_CASE("shortest plan length on the box table") {
    const GPTable table = box_table();
    CHECK(shortest_plan_length(table, N(6, 6), N(2, 2)) == 3);
    CHECK(shortest_plan_length(table, N(6, 6), N(6, 6)) == 0);
    CHECK(shortest_plan_length(table, N(6, 6), N(4, 6)) == 1);
    CHECK_THROWS_AS(shortest_plan_length(table, N(9, 9), N(2, 2)), UnknownNodeError);

    GPTable split({N(1, 1), N(2, 2)}, 2, 2);
    CHECK_THROWS_AS(shortest_plan_length(split, N(1, 1), N(2, 2)), DisconnectedError);
}

TEST_CASE("plans of length 3 from (6,6) to (2,2)") {
    const GPTable table = box_table();
    const auto plans = plans_of_length(table, 3, N(6, 6), N(2, 2));
    REQUIRE(plans.size() == 2);

    const TaskPlan via4{N(6, 6), N(4, 6), N(4, 2), N(2, 2)};
    const TaskPlan via1{N(6, 6), N(1, 6), N(1, 2), N(2, 2)};
    CHECK(std::find(plans.begin(), plans.end(), via4) != plans.end());
    CHECK(std::find(plans.begin(), plans.end(), via1) != plans.end());

    // Below the shortest length: empty.
    CHECK(plans_of_length(table, 2, N(6, 6), N(2, 2)).empty());
    // Single edge between adjacent nodes.
    const auto one = plans_of_length(table, 1, N(6, 6), N(4, 6));
    REQUIRE(one.size() == 1);
    CHECK(one[0] == TaskPlan{N(6, 6), N(4, 6)});
    // Length zero.
    const auto zero = plans_of_length(table, 0, N(6, 6), N(6, 6));
    REQUIRE(zero.size() == 1);
    CHECK(plans_of_length(table, 0, N(6, 6), N(2, 2)).empty());
}

TEST_CASE("plan enumeration matches an exhaustive oracle on random tables") {
    Rng rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const GPTable table = random_table(rng, 6, 10, 0.35);
        const auto& nodes = table.nodes();
        std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
        const TableNode a = nodes[pick(rng)];
        const TableNode b = nodes[pick(rng)];

        int bfs = -1;
        try {
            bfs = shortest_plan_length(table, a, b);
        } catch (const DisconnectedError&) {
        }

        int min_nonempty = -1;
        for (int k = 0; k <= 6; ++k) {
            auto mine = plans_of_length(table, k, a, b);
            auto oracle = enumerate_oracle(table, k, a, b);
            std::sort(mine.begin(), mine.end());
            std::sort(oracle.begin(), oracle.end());
            CHECK(mine == oracle);
            if (min_nonempty < 0 && !mine.empty()) min_nonempty = k;

            // Every plan validates edge-by-edge against table adjacency.
            for (const TaskPlan& plan : mine) {
                for (std::size_t i = 0; i + 1 < plan.size(); ++i) {
                    CHECK(GPTable::adjacent(plan[i], plan[i + 1]));
                }
            }
        }
        if (bfs >= 0 && bfs <= 6) CHECK(min_nonempty == bfs);
    }
}

TEST_CASE("plans of different lengths are disjoint") {
    const GPTable table = box_table();
    auto p3 = plans_of_length(table, 3, N(6, 6), N(2, 2));
    auto p5 = plans_of_length(table, 5, N(6, 6), N(2, 2));
    for (const TaskPlan& plan : p3) {
        CHECK(std::find(p5.begin(), p5.end(), plan) == p5.end());
        CHECK(plan.size() == 4);
    }
    for (const TaskPlan& plan : p5) CHECK(plan.size() == 6);
}

TEST_CASE("guidance graph from the worked-example plans") {
    const GPTable table = box_table();
    const auto plans = plans_of_length(table, 3, N(6, 6), N(2, 2));
    REQUIRE(plans.size() == 2);

    const GuidanceGraph q = GuidanceGraph::from_plans(plans);
    CHECK(q.num_nodes_alive() == 6);
    CHECK(q.num_alive_edges() == 6);
    CHECK(q.plan_length() == 3);
    CHECK(q.has_path());

    // Level-path enumeration reproduces the plan set exactly.
    auto back = q.enumerate_level_paths();
    auto expected = plans;
    std::sort(back.begin(), back.end());
    std::sort(expected.begin(), expected.end());
    CHECK(back == expected);

    // Expected nodes, with (4,6) and (1,6) at level 1 and so on.
    CHECK(q.node_id(0, N(6, 6)) >= 0);
    CHECK(q.node_id(1, N(4, 6)) >= 0);
    CHECK(q.node_id(1, N(1, 6)) >= 0);
    CHECK(q.node_id(2, N(4, 2)) >= 0);
    CHECK(q.node_id(2, N(1, 2)) >= 0);
    CHECK(q.node_id(3, N(2, 2)) >= 0);
}

TEST_CASE("single plan gives a chain; empty set gives an empty graph") {
    const TaskPlan chain{N(6, 6), N(4, 6), N(4, 2), N(2, 2)};
    const GuidanceGraph q = GuidanceGraph::from_plans({chain});
    CHECK(q.num_nodes_alive() == 4);
    CHECK(q.num_alive_edges() == 3);
    CHECK(q.has_path());

    const GuidanceGraph empty = GuidanceGraph::from_plans({});
    CHECK(empty.empty());
    CHECK_FALSE(empty.has_path());
}

TEST_CASE("mixed plan lengths are rejected") {
    const TaskPlan a{N(6, 6), N(4, 6), N(4, 2), N(2, 2)};
    const TaskPlan b{N(6, 6), N(4, 6)};
    CHECK_THROWS_AS(GuidanceGraph::from_plans({a, b}), MixedPlanLengthsError);
}

TEST_CASE("edge removal, pruning, and has_path") {
    const GPTable table = box_table();
    const auto plans = plans_of_length(table, 3, N(6, 6), N(2, 2));
    GuidanceGraph q = GuidanceGraph::from_plans(plans);

    // Removing one branch's middle edge keeps the other branch alive.
    const int n46 = q.node_id(1, N(4, 6));
    const int n42 = q.node_id(2, N(4, 2));
    int eid = -1;
    for (int e : q.out_edges(n46)) {
        if (q.edge(e).to == n42) eid = e;
    }
    REQUIRE(eid >= 0);
    q.remove_edge(eid);
    CHECK(q.has_path());
    // The dangling (1,(4,6)) and (2,(4,2)) nodes got pruned.
    CHECK(q.node_id(1, N(4, 6)) < 0);
    CHECK(q.node_id(2, N(4, 2)) < 0);
    CHECK(q.num_nodes_alive() == 4);

    // Removing the remaining level-1 -> 2 edge cuts the path.
    const int n16 = q.node_id(1, N(1, 6));
    const auto out = q.out_edges(n16);
    REQUIRE(out.size() == 1);
    q.remove_edge(out[0]);
    CHECK_FALSE(q.has_path());

    CHECK_THROWS_AS(q.remove_edge(eid), UnknownEdgeError);  // already removed
    CHECK_THROWS_AS(q.remove_edge(99), UnknownEdgeError);
}

TEST_CASE("failure counters trigger removal past the threshold") {
    const TaskPlan chain{N(6, 6), N(4, 6), N(4, 2), N(2, 2)};
    GuidanceGraph q = GuidanceGraph::from_plans({chain});
    const int eid = q.out_edges(q.start_id()).front();
    for (int i = 0; i < 5; ++i) CHECK_FALSE(q.record_failure(eid, 5));
    CHECK(q.record_failure(eid, 5));  // 6th failure exceeds N = 5
    CHECK_FALSE(q.has_path());
}
