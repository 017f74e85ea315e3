#include "regrasp/task_plans.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace regrasp {

namespace {

std::map<TableNode, int> bfs_distances(const GPTable& table, const TableNode& from) {
    std::map<TableNode, int> dist;
    dist[from] = 0;
    std::deque<TableNode> queue{from};
    while (!queue.empty()) {
        const TableNode n = queue.front();
        queue.pop_front();
        const int d = dist[n];
        for (const TableNode& m : table.neighbors(n)) {
            if (!dist.count(m)) {
                dist[m] = d + 1;
                queue.push_back(m);
            }
        }
    }
    return dist;
}

}  // namespace

int shortest_plan_length(const GPTable& table, const TableNode& a, const TableNode& b) {
    if (!table.contains(a)) throw UnknownNodeError("shortest_plan_length: " + to_string(a));
    if (!table.contains(b)) throw UnknownNodeError("shortest_plan_length: " + to_string(b));
    const auto dist = bfs_distances(table, a);
    const auto it = dist.find(b);
    if (it == dist.end()) {
        throw DisconnectedError("no task plan connects " + to_string(a) + " and " + to_string(b));
    }
    return it->second;
}

std::vector<TaskPlan> plans_of_length(const GPTable& table, int k, const TableNode& a,
                                      const TableNode& b) {
    if (!table.contains(a)) throw UnknownNodeError("plans_of_length: " + to_string(a));
    if (!table.contains(b)) throw UnknownNodeError("plans_of_length: " + to_string(b));
    if (k < 0) throw OutOfRangeError("plans_of_length: negative length");

    std::vector<TaskPlan> plans;
    if (k == 0) {
        if (a == b) plans.push_back({a});
        return plans;
    }

    const auto dist_to_goal = bfs_distances(table, b);

    TaskPlan path{a};
    std::vector<TableNode> visited{a};
    // DFS with a remaining-distance bound; neighbors come out sorted, so the
    // enumeration order is lexicographic.
    auto dfs = [&](auto&& self, const TableNode& current, int remaining,
                   std::optional<EdgeKind> last) -> void {
        if (remaining == 0) {
            if (current == b) plans.push_back(path);
            return;
        }
        const auto it = dist_to_goal.find(current);
        if (it == dist_to_goal.end() || it->second > remaining) return;
        for (const TableNode& next : table.neighbors(current)) {
            if (std::find(visited.begin(), visited.end(), next) != visited.end()) continue;
            const EdgeKind kind = GPTable::edge_kind(current, next);
            if (last && *last == kind) continue;  // same-type edges compose into one
            path.push_back(next);
            visited.push_back(next);
            self(self, next, remaining - 1, kind);
            path.pop_back();
            visited.pop_back();
        }
    };
    dfs(dfs, a, k, std::nullopt);
    return plans;
}

GuidanceGraph GuidanceGraph::from_plans(const std::vector<TaskPlan>& plans) {
    GuidanceGraph q;
    if (plans.empty()) return q;

    const std::size_t len = plans.front().size();
    for (const TaskPlan& plan : plans) {
        if (plan.size() != len) {
            throw MixedPlanLengthsError("guidance graph needs equal-length plans");
        }
        if (plan.front() != plans.front().front() || plan.back() != plans.front().back()) {
            throw MixedPlanLengthsError("guidance graph needs shared endpoints");
        }
    }
    q.plan_length_ = static_cast<int>(len) - 1;

    std::map<std::pair<int, TableNode>, int> ids;
    auto intern = [&](int level, const TableNode& c) {
        const auto key = std::make_pair(level, c);
        const auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        const int id = static_cast<int>(q.nodes_.size());
        ids[key] = id;
        q.nodes_.push_back({level, c, true});
        q.out_.emplace_back();
        q.in_.emplace_back();
        return id;
    };

    std::map<std::pair<int, int>, int> edge_ids;
    for (const TaskPlan& plan : plans) {
        for (std::size_t d = 0; d + 1 < plan.size(); ++d) {
            if (!GPTable::adjacent(plan[d], plan[d + 1])) {
                throw ValidationError("guidance graph: plan edge not in table adjacency");
            }
            const int u = intern(static_cast<int>(d), plan[d]);
            const int v = intern(static_cast<int>(d) + 1, plan[d + 1]);
            if (edge_ids.count({u, v})) continue;
            const int id = static_cast<int>(q.edges_.size());
            edge_ids[{u, v}] = id;
            q.edges_.push_back({u, v, 0, true});
            q.out_[static_cast<std::size_t>(u)].push_back(id);
            q.in_[static_cast<std::size_t>(v)].push_back(id);
        }
    }
    q.start_id_ = q.node_id(0, plans.front().front());
    q.goal_id_ = q.node_id(q.plan_length_, plans.front().back());
    return q;
}

int GuidanceGraph::node_id(int level, const TableNode& c) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].alive && nodes_[i].level == level && nodes_[i].c == c) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::size_t GuidanceGraph::num_nodes_alive() const {
    std::size_t n = 0;
    for (const Node& node : nodes_)
        if (node.alive) ++n;
    return n;
}

int GuidanceGraph::num_alive_edges() const {
    int n = 0;
    for (const Edge& e : edges_)
        if (e.alive) ++n;
    return n;
}

std::vector<int> GuidanceGraph::out_edges(int node_id) const {
    std::vector<int> out;
    if (node_id < 0 || node_id >= static_cast<int>(nodes_.size())) return out;
    for (int e : out_[static_cast<std::size_t>(node_id)]) {
        if (edges_[static_cast<std::size_t>(e)].alive) out.push_back(e);
    }
    return out;
}

std::vector<int> GuidanceGraph::in_edges(int node_id) const {
    std::vector<int> out;
    if (node_id < 0 || node_id >= static_cast<int>(nodes_.size())) return out;
    for (int e : in_[static_cast<std::size_t>(node_id)]) {
        if (edges_[static_cast<std::size_t>(e)].alive) out.push_back(e);
    }
    return out;
}

EdgeKind GuidanceGraph::edge_mode(int edge_id) const {
    const Edge& e = edge(edge_id);
    return GPTable::edge_kind(nodes_[static_cast<std::size_t>(e.from)].c,
                              nodes_[static_cast<std::size_t>(e.to)].c);
}

bool GuidanceGraph::record_failure(int edge_id, int threshold) {
    Edge& e = edges_.at(static_cast<std::size_t>(edge_id));
    if (!e.alive) return false;
    ++e.failures;
    if (e.failures > threshold) {
        remove_edge(edge_id);
        return true;
    }
    return false;
}

void GuidanceGraph::remove_edge(int edge_id) {
    if (edge_id < 0 || edge_id >= static_cast<int>(edges_.size()) ||
        !edges_[static_cast<std::size_t>(edge_id)].alive) {
        throw UnknownEdgeError("remove_edge: edge not present");
    }
    edges_[static_cast<std::size_t>(edge_id)].alive = false;
    prune();
}

void GuidanceGraph::prune() {
    const std::size_t n = nodes_.size();
    std::vector<char> fwd(n, 0), bwd(n, 0);
    auto sweep = [&](int root, std::vector<char>& mark, bool forward) {
        if (root < 0 || !nodes_[static_cast<std::size_t>(root)].alive) return;
        std::deque<int> queue{root};
        mark[static_cast<std::size_t>(root)] = 1;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            const auto& adj = forward ? out_[static_cast<std::size_t>(u)]
                                      : in_[static_cast<std::size_t>(u)];
            for (int eid : adj) {
                const Edge& e = edges_[static_cast<std::size_t>(eid)];
                if (!e.alive) continue;
                const int v = forward ? e.to : e.from;
                if (!nodes_[static_cast<std::size_t>(v)].alive || mark[static_cast<std::size_t>(v)])
                    continue;
                mark[static_cast<std::size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    };
    sweep(start_id_, fwd, true);
    sweep(goal_id_, bwd, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes_[i].alive && (!fwd[i] || !bwd[i])) {
            nodes_[i].alive = false;
            for (int eid : out_[i]) edges_[static_cast<std::size_t>(eid)].alive = false;
            for (int eid : in_[i]) edges_[static_cast<std::size_t>(eid)].alive = false;
        }
    }
}

bool GuidanceGraph::has_path() const {
    if (start_id_ < 0 || goal_id_ < 0) return false;
    if (!nodes_[static_cast<std::size_t>(start_id_)].alive ||
        !nodes_[static_cast<std::size_t>(goal_id_)].alive) {
        return false;
    }
    if (start_id_ == goal_id_) return true;
    std::vector<char> seen(nodes_.size(), 0);
    std::deque<int> queue{start_id_};
    seen[static_cast<std::size_t>(start_id_)] = 1;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int eid : out_edges(u)) {
            const int v = edges_[static_cast<std::size_t>(eid)].to;
            if (v == goal_id_) return true;
            if (!seen[static_cast<std::size_t>(v)] && nodes_[static_cast<std::size_t>(v)].alive) {
                seen[static_cast<std::size_t>(v)] = 1;
                queue.push_back(v);
            }
        }
    }
    return false;
}

std::vector<TaskPlan> GuidanceGraph::enumerate_level_paths() const {
    std::vector<TaskPlan> plans;
    if (start_id_ < 0 || !nodes_[static_cast<std::size_t>(start_id_)].alive) return plans;
    TaskPlan path{nodes_[static_cast<std::size_t>(start_id_)].c};
    auto dfs = [&](auto&& self, int u) -> void {
        if (u == goal_id_) {
            plans.push_back(path);
            return;
        }
        for (int eid : out_edges(u)) {
            const int v = edges_[static_cast<std::size_t>(eid)].to;
            if (!nodes_[static_cast<std::size_t>(v)].alive) continue;
            path.push_back(nodes_[static_cast<std::size_t>(v)].c);
            self(self, v);
            path.pop_back();
        }
    };
    dfs(dfs, start_id_);
    return plans;
}

}  // namespace regrasp
