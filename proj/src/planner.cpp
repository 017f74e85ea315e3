#include "regrasp/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "regrasp/parallel.hpp"

namespace regrasp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// IK residuals this small weld away at segment junctions without disturbing
// the mode invariants.
const IkOptions kTightIk{300, 1e-2, 0.2, 1e-11, 1e-10};

constexpr double kTransitWeld = 1e-9;   // object poses must already agree
constexpr double kTransferWeld = 1e-6;  // matches the grasp-constancy tolerance

Transform grasp_of(const WorldModel& world, const CompositeConfig& config) {
    return fk(world.robot, config.q).inverse() * config.object_pose;
}

double grasp_opening(const WorldModel& world, const TreeVertex& v) {
    if (!v.grasp) return world.gripper.max_opening;
    return grasp_width(world.object, v.grasp->cls, v.grasp->params.lateral_axis);
}

}  // namespace

QueryClass EndpointClass::query_class() const {
    QueryClass q;
    if (placement) q.placement_class = placement->placement_class;
    if (grasp) q.grasp_class = grasp_class_index(grasp->cls.direction, grasp->cls.box_index);
    return q;
}

EndpointClass classify_endpoint(const WorldModel& world,
                                const std::vector<PlacementClass>& placements,
                                const CompositeConfig& config) {
    EndpointClass out;
    out.placement = classify_placement(placements, config.object_pose, world.table_top());
    const Transform grip = fk(world.robot, config.q);
    out.grasp = classify_grasp(world.object, world.gripper, config.object_pose, grip);
    return out;
}

int choose_path_length_increment(const EndpointClass& start, const EndpointClass& goal) {
    return (start.in_gp() || goal.in_gp()) ? 1 : 2;
}

std::optional<SingleModePath> local_plan(const WorldModel& world, const CompositeConfig& from,
                                         const CompositeConfig& to, PathKind mode,
                                         const RrtConfig& rrt, Rng& rng, double opening) {
    if (from.q.size() != to.q.size()) {
        throw DimensionMismatchError("local_plan: configuration sizes differ");
    }
    Transform attach;  // gripper^-1 * object, transfer mode only
    if (mode == PathKind::Transit) {
        if (!from.object_pose.approx_equal(to.object_pose, 1e-9)) {
            throw EndpointMismatchError("local_plan: transit endpoints move the object");
        }
    } else {
        attach = grasp_of(world, from);
        const Transform attach_to = grasp_of(world, to);
        if ((attach.translation - attach_to.translation).norm() > 1e-6 ||
            rotation_distance(attach.rotation, attach_to.rotation) > 1e-6) {
            throw EndpointMismatchError("local_plan: transfer endpoints change the grasp");
        }
    }

    auto config_at = [&](const Eigen::VectorXd& q) {
        CompositeConfig c;
        c.q = q;
        c.object_pose = mode == PathKind::Transit ? from.object_pose
                                                  : fk(world.robot, q) * attach;
        return c;
    };
    auto free_at = [&](const Eigen::VectorXd& q) {
        return collision_free(world, config_at(q), mode, opening);
    };
    // Interior of an accepted interval, at the audit's resolution.
    auto interval_clear = [&](const Eigen::VectorXd& qa, const Eigen::VectorXd& qb) {
        for (int s = 1; s <= rrt.validation_substeps; ++s) {
            const double f = static_cast<double>(s) / (rrt.validation_substeps + 1);
            if (!free_at((1.0 - f) * qa + f * qb)) return false;
        }
        return true;
    };

    if (!free_at(from.q) || !free_at(to.q)) return std::nullopt;

    auto finish = [&](std::vector<Eigen::VectorXd> qs) {
        qs.erase(std::unique(qs.begin(), qs.end(),
                             [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                                 return (a - b).lpNorm<Eigen::Infinity>() < 1e-12;
                             }),
                 qs.end());
        SingleModePath path;
        path.kind = mode;
        path.waypoints.reserve(qs.size());
        for (const auto& q : qs) path.waypoints.push_back(config_at(q));
        // Endpoints carry the callers' exact configurations.
        path.waypoints.front() = from;
        path.waypoints.back() = to;
        return path;
    };

    if ((to.q - from.q).lpNorm<Eigen::Infinity>() < 1e-12) {
        SingleModePath path;
        path.kind = mode;
        path.waypoints = {from, to};
        return path;
    }

    // Departing or approaching a resting contact along a straight joint-space
    // line drags the object through the support surface, so transfer segments
    // get a vertical Cartesian lift at both ends; the planner connects the
    // lifted configurations.
    auto track_lift = [&](const CompositeConfig& base) {
        std::vector<Eigen::VectorXd> chain;
        if (mode != PathKind::Transfer || rrt.lift_height <= 0.0) return chain;
        const Transform grip0 = fk(world.robot, base.q);
        Eigen::VectorXd q = base.q;
        const int steps =
            std::max(1, static_cast<int>(std::ceil(rrt.lift_height / rrt.lift_step)));
        for (int i = 1; i <= steps; ++i) {
            Transform target = grip0;
            target.translation.z() += rrt.lift_height * i / steps;
            const auto sols = ik(world.robot, target, 1, rng, &q, kTightIk);
            if (sols.empty() || !free_at(sols.front()) || !interval_clear(q, sols.front())) break;
            q = sols.front();
            chain.push_back(q);
        }
        return chain;
    };
    const std::vector<Eigen::VectorXd> up_chain = track_lift(from);
    const std::vector<Eigen::VectorXd> down_chain = track_lift(to);
    const Eigen::VectorXd& q_a = up_chain.empty() ? from.q : up_chain.back();
    const Eigen::VectorXd& q_b = down_chain.empty() ? to.q : down_chain.back();

    // Connects q_a to q_b: straight line first, then bidirectional
    // RRT-connect in joint space. Every accepted interval is substep-checked.
    auto connect = [&]() -> std::optional<std::vector<Eigen::VectorXd>> {
        const double dist = (q_b - q_a).lpNorm<Eigen::Infinity>();
        if (dist < 1e-12) return std::vector<Eigen::VectorXd>{q_a};
        {
            const int steps = std::max(1, static_cast<int>(std::ceil(dist / rrt.step)));
            bool clear = true;
            std::vector<Eigen::VectorXd> qs;
            qs.push_back(q_a);
            for (int i = 1; i <= steps && clear; ++i) {
                Eigen::VectorXd q =
                    i == steps ? q_b
                               : ((1.0 - static_cast<double>(i) / steps) * q_a +
                                  (static_cast<double>(i) / steps) * q_b)
                                     .eval();
                if (!free_at(q) || !interval_clear(qs.back(), q)) clear = false;
                qs.push_back(std::move(q));
            }
            if (clear) return qs;
        }

        struct Node {
            Eigen::VectorXd q;
            int parent;
        };
        std::vector<Node> tree_a{{q_a, -1}};
        std::vector<Node> tree_b{{q_b, -1}};
        bool a_is_start = true;

        auto nearest = [](const std::vector<Node>& tree, const Eigen::VectorXd& q) {
            int best = 0;
            double best_d = (tree[0].q - q).squaredNorm();
            for (int i = 1; i < static_cast<int>(tree.size()); ++i) {
                const double d = (tree[static_cast<std::size_t>(i)].q - q).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            return best;
        };

        enum class Extend { Trapped, Advanced, Reached };
        auto extend = [&](std::vector<Node>& tree, const Eigen::VectorXd& target, bool greedy,
                          int& last) {
            int idx = nearest(tree, target);
            Extend status = Extend::Trapped;
            while (true) {
                const Eigen::VectorXd q = tree[static_cast<std::size_t>(idx)].q;
                const Eigen::VectorXd d = target - q;
                const double n = d.norm();
                if (n < 1e-12) {
                    last = idx;
                    return Extend::Reached;
                }
                const Eigen::VectorXd q_next =
                    n <= rrt.step ? target : (q + d * (rrt.step / n)).eval();
                if (!free_at(q_next) || !interval_clear(q, q_next)) {
                    last = idx;
                    return status;
                }
                tree.push_back({q_next, idx});
                idx = static_cast<int>(tree.size()) - 1;
                status = Extend::Advanced;
                if (!greedy) {
                    last = idx;
                    return (q_next - target).norm() < 1e-12 ? Extend::Reached : Extend::Advanced;
                }
            }
        };

        for (int iter = 0; iter < rrt.max_iterations; ++iter) {
            const Eigen::VectorXd q_rand = world.robot.sample_configuration(rng);
            int ia = -1;
            if (extend(tree_a, q_rand, false, ia) != Extend::Trapped) {
                int ib = -1;
                if (extend(tree_b, tree_a[static_cast<std::size_t>(ia)].q, true, ib) ==
                    Extend::Reached) {
                    std::vector<Eigen::VectorXd> qs;
                    for (int i = ia; i >= 0; i = tree_a[static_cast<std::size_t>(i)].parent) {
                        qs.push_back(tree_a[static_cast<std::size_t>(i)].q);
                    }
                    std::reverse(qs.begin(), qs.end());
                    for (int i = tree_b[static_cast<std::size_t>(ib)].parent; i >= 0;
                         i = tree_b[static_cast<std::size_t>(i)].parent) {
                        qs.push_back(tree_b[static_cast<std::size_t>(i)].q);
                    }
                    if (!a_is_start) std::reverse(qs.begin(), qs.end());
                    return qs;
                }
            }
            std::swap(tree_a, tree_b);
            a_is_start = !a_is_start;
        }
        return std::nullopt;
    };

    auto mid = connect();
    if (!mid) return std::nullopt;

    std::vector<Eigen::VectorXd> qs;
    qs.push_back(from.q);
    qs.insert(qs.end(), up_chain.begin(), up_chain.end());
    qs.insert(qs.end(), mid->begin(), mid->end());
    qs.insert(qs.end(), down_chain.rbegin(), down_chain.rend());
    qs.push_back(to.q);
    return finish(std::move(qs));
}

int sample_tree(const SearchTree& tree, double exponent, Rng& rng) {
    if (tree.vertices.empty()) throw ValidationError("sample_tree: empty tree");
    std::vector<double> cumulative(tree.vertices.size());
    double total = 0.0;
    for (std::size_t i = 0; i < tree.vertices.size(); ++i) {
        const int level = tree.vertices[i].level;
        const int depth = tree.forward ? level : tree.goal_level - level;
        total += std::pow(static_cast<double>(depth + 1), exponent);
        cumulative[i] = total;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    const double pick = u(rng);
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    return static_cast<int>(std::distance(cumulative.begin(), it));
}

std::optional<SingleModePath> try_bridge(const WorldModel& world, const TreeVertex& from,
                                         const TreeVertex& to, PathKind mode,
                                         const RrtConfig& rrt, Rng& rng, double opening) {
    const double weld = mode == PathKind::Transit ? kTransitWeld : kTransferWeld;
    if (mode == PathKind::Transit) {
        if (!from.config.object_pose.approx_equal(to.config.object_pose, kTransitWeld)) {
            return std::nullopt;
        }
    } else {
        if (!from.grasp || !to.grasp) return std::nullopt;
        if ((from.grasp_x.translation - to.grasp_x.translation).norm() > kTransferWeld ||
            rotation_distance(from.grasp_x.rotation, to.grasp_x.rotation) > kTransferWeld) {
            return std::nullopt;
        }
    }

    // Plan toward `to`'s joint configuration holding `from`'s constraint,
    // then weld the far endpoint onto `to` exactly.
    CompositeConfig target = to.config;
    if (mode == PathKind::Transit) {
        target.object_pose = from.config.object_pose;
    } else {
        target.object_pose = fk(world.robot, to.config.q) * from.grasp_x;
    }
    auto path = local_plan(world, from.config, target, mode, rrt, rng, opening);
    if (!path) return std::nullopt;
    if (!target.object_pose.approx_equal(to.config.object_pose, weld)) return std::nullopt;
    path->waypoints.back() = to.config;
    return path;
}

PlanResult extract_solution(const SearchTree& fw, const SearchTree& bw, int fw_id, int bw_id,
                            const SingleModePath& bridge) {
    std::vector<SingleModePath> segments;
    std::vector<TableNode> labels;

    std::vector<int> fw_chain;
    for (int i = fw_id; i >= 0; i = fw.vertices[static_cast<std::size_t>(i)].parent) {
        fw_chain.push_back(i);
    }
    std::reverse(fw_chain.begin(), fw_chain.end());
    for (int i : fw_chain) {
        const TreeVertex& v = fw.vertices[static_cast<std::size_t>(i)];
        if (v.parent >= 0) segments.push_back(v.edge);
        labels.push_back(v.label);
    }

    if (bridge.waypoints.size() > 1) segments.push_back(bridge);

    for (int i = bw_id; i >= 0; i = bw.vertices[static_cast<std::size_t>(i)].parent) {
        const TreeVertex& v = bw.vertices[static_cast<std::size_t>(i)];
        // Bridged vertices share a class label; keep one copy.
        if (labels.empty() || labels.back() != v.label) labels.push_back(v.label);
        if (v.parent >= 0) segments.push_back(v.edge.reversed());
    }

    PlanResult result;
    result.status = PlanStatus::Success;
    result.path = reduce(ManipulationPath(std::move(segments)));
    result.stats.transitions = result.path.transitions();
    result.realized_plan = std::move(labels);
    return result;
}

GuidedPlanner::GuidedPlanner(WorldModel world, PlannerConfig config)
    : world_(std::move(world)), config_(config) {
    const auto t0 = Clock::now();
    placements_ = stable_placement_classes(world_.object.boxes);
    table_ = build_table(world_.object, world_.gripper, world_.table);
    prep_seconds_ = seconds_since(t0);
}

std::optional<CompositeConfig> GuidedPlanner::solve_target(const Transform& gripper_target,
                                                           const Transform& object_pose,
                                                           const Eigen::VectorXd& bias,
                                                           double width, Rng& rng) const {
    auto sols = ik(world_.robot, gripper_target, config_.ik_seeds, rng, &bias, kTightIk);
    std::sort(sols.begin(), sols.end(), [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (a - bias).squaredNorm() < (b - bias).squaredNorm();
    });
    for (const auto& q : sols) {
        CompositeConfig cfg;
        cfg.q = q;
        cfg.object_pose = object_pose;
        // The vertex hosts both an arriving and a departing mode.
        if (collision_free(world_, cfg, PathKind::Transit, world_.gripper.max_opening) &&
            collision_free(world_, cfg, PathKind::Transfer, width)) {
            return cfg;
        }
    }
    return std::nullopt;
}

GuidedPlanner::ExtensionResult GuidedPlanner::extend_from(SearchTree& active,
                                                          const SearchTree& opposite, int v_id,
                                                          GuidanceGraph& q, Rng& rng) {
    ExtensionResult out;
    const TreeVertex v = active.vertices[static_cast<std::size_t>(v_id)];
    const int qn = q.node_id(v.level, v.label);
    if (qn < 0) return out;
    const auto edges = active.forward ? q.out_edges(qn) : q.in_edges(qn);
    if (edges.empty()) return out;

    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    const int eid = edges[pick(rng)];
    const auto& edge = q.edge(eid);
    const auto& target_node = q.node(active.forward ? edge.to : edge.from);
    const PathKind mode =
        q.edge_mode(eid) == EdgeKind::Vertical ? PathKind::Transit : PathKind::Transfer;

    // Opposite-tree vertices already sitting in the target class, nearest
    // first in joint space.
    std::vector<int> candidates;
    for (int i = 0; i < static_cast<int>(opposite.vertices.size()); ++i) {
        const TreeVertex& u = opposite.vertices[static_cast<std::size_t>(i)];
        if (u.level == target_node.level && u.label == target_node.c) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        const double da = (opposite.vertices[static_cast<std::size_t>(a)].config.q - v.config.q)
                              .squaredNorm();
        const double db = (opposite.vertices[static_cast<std::size_t>(b)].config.q - v.config.q)
                              .squaredNorm();
        return da < db;
    });

    // A candidate whose continuous parameters already match closes the gap
    // with a single bridging segment.
    for (int u_id : candidates) {
        const TreeVertex& u = opposite.vertices[static_cast<std::size_t>(u_id)];
        const bool matches =
            mode == PathKind::Transit
                ? v.config.object_pose.approx_equal(u.config.object_pose, kTransitWeld)
                : (v.grasp && u.grasp &&
                   (v.grasp_x.translation - u.grasp_x.translation).norm() <= kTransferWeld &&
                   rotation_distance(v.grasp_x.rotation, u.grasp_x.rotation) <= kTransferWeld);
        if (!matches) continue;
        const double opening =
            mode == PathKind::Transfer ? grasp_opening(world_, v) : world_.gripper.max_opening;
        auto bridge = try_bridge(world_, v, u, mode, config_.rrt, rng, opening);
        if (bridge) {
            out.kind = ExtensionResult::Reached;
            out.bridge_from = v_id;
            out.bridge_to = u_id;
            out.bridge = std::move(*bridge);
            return out;
        }
        q.record_failure(eid, config_.failure_threshold);
        return out;
    }

    // Query sentinels exist only at the roots; without a parameter match
    // there is nothing to sample.
    if (target_node.c.grasp == 0 || target_node.c.placement == 0) {
        return out;
    }

    const bool adopt = !candidates.empty() &&
                       std::bernoulli_distribution(config_.adopt_probability)(rng);
    const int u_id = candidates.empty() ? -1 : candidates.front();

    TreeVertex w;
    w.label = target_node.c;
    w.level = target_node.level;
    w.parent = v_id;

    if (mode == PathKind::Transit) {
        // New grasp class at the placement the vertex already occupies.
        const GraspClass cls = decode_grasp_class(target_node.c.grasp, world_.object.num_boxes());
        GraspMatch grasp;
        Transform x_target;
        if (adopt) {
            const TreeVertex& u = opposite.vertices[static_cast<std::size_t>(u_id)];
            grasp = *u.grasp;
            x_target = u.grasp_x;
        } else {
            try {
                grasp = {cls, sample_grasp(world_.object, world_.gripper, cls, rng)};
            } catch (const InfeasibleGraspError&) {
                q.record_failure(eid, config_.failure_threshold);
                return out;
            }
            x_target = grasp_object_in_gripper(world_.object, world_.gripper, grasp.cls,
                                               grasp.params);
        }
        const double width = grasp_width(world_.object, grasp.cls, grasp.params.lateral_axis);
        const Transform gripper_target = v.config.object_pose * x_target.inverse();
        auto cfg = solve_target(gripper_target, v.config.object_pose, v.config.q, width, rng);
        if (!cfg) {
            q.record_failure(eid, config_.failure_threshold);
            return out;
        }
        auto seg = local_plan(world_, v.config, *cfg, PathKind::Transit, config_.rrt, rng,
                              world_.gripper.max_opening);
        if (!seg) {
            q.record_failure(eid, config_.failure_threshold);
            return out;
        }
        w.config = *cfg;
        w.edge = std::move(*seg);
        w.grasp = grasp;
        w.grasp_x = grasp_of(world_, w.config);
    } else {
        // Carry the object to a new placement of the target class.
        if (!v.grasp) return out;
        Transform object_target;
        if (adopt) {
            object_target = opposite.vertices[static_cast<std::size_t>(u_id)].config.object_pose;
        } else {
            const auto& pc = placements_[static_cast<std::size_t>(target_node.c.placement - 1)];
            PlacementParams params;
            try {
                params = sample_placement(pc, world_.object, world_.table, rng);
            } catch (const OutOfTableBoundsError&) {
                q.record_failure(eid, config_.failure_threshold);
                return out;
            }
            object_target = object_pose_from_placement(pc, params, world_.table_top(),
                                                       world_.object, &world_.table);
        }
        const double width = grasp_opening(world_, v);
        const Transform gripper_target = object_target * v.grasp_x.inverse();
        auto cfg = solve_target(gripper_target, object_target, v.config.q, width, rng);
        if (!cfg) {
            q.record_failure(eid, config_.failure_threshold);
            return out;
        }
        // The carried pose follows the actual hand pose; the grasp transform
        // is preserved exactly along the segment.
        cfg->object_pose = fk(world_.robot, cfg->q) * v.grasp_x;
        auto seg = local_plan(world_, v.config, *cfg, PathKind::Transfer, config_.rrt, rng, width);
        if (!seg) {
            q.record_failure(eid, config_.failure_threshold);
            return out;
        }
        w.config = *cfg;
        w.edge = std::move(*seg);
        w.grasp = v.grasp;
        w.grasp_x = v.grasp_x;
    }

    active.vertices.push_back(w);
    out.kind = ExtensionResult::Advanced;
    out.new_vertex = static_cast<int>(active.vertices.size()) - 1;

    // Complementary-mode connect against a same-class opposite vertex.
    const PathKind other_mode =
        mode == PathKind::Transit ? PathKind::Transfer : PathKind::Transit;
    for (int cand : candidates) {
        const TreeVertex& u = opposite.vertices[static_cast<std::size_t>(cand)];
        const double opening =
            other_mode == PathKind::Transfer ? grasp_opening(world_, w) : world_.gripper.max_opening;
        auto bridge = try_bridge(world_, active.vertices.back(), u, other_mode, config_.rrt, rng,
                                 opening);
        if (bridge) {
            out.kind = ExtensionResult::Reached;
            out.bridge_from = out.new_vertex;
            out.bridge_to = cand;
            out.bridge = std::move(*bridge);
            return out;
        }
        break;  // one connect attempt per extension
    }
    return out;
}

bool GuidedPlanner::plan_path(GuidanceGraph& q, SearchTree& fw, SearchTree& bw, double budget,
                              PlanResult& result, Rng& rng) {
    const auto t0 = Clock::now();

    if (q.plan_length() == 0) {
        // Start and goal share the table node: a single mode-consistent
        // segment is the whole plan.
        const TreeVertex& s = fw.vertices.front();
        const TreeVertex& g = bw.vertices.front();
        for (const PathKind mode : {PathKind::Transit, PathKind::Transfer}) {
            const double opening = mode == PathKind::Transfer ? grasp_opening(world_, s)
                                                              : world_.gripper.max_opening;
            auto bridge = try_bridge(world_, s, g, mode, config_.rrt, rng, opening);
            if (bridge) {
                result = extract_solution(fw, bw, 0, 0, *bridge);
                return true;
            }
        }
        return false;
    }

    SearchTree* active = &fw;
    SearchTree* other = &bw;
    while (seconds_since(t0) < budget && q.has_path()) {
        const int v_id = sample_tree(*active, config_.sample_weight_exponent, rng);
        const ExtensionResult ext = extend_from(*active, *other, v_id, q, rng);
        ++extensions_;
        if (ext.kind == ExtensionResult::Reached) {
            const bool active_is_fw = active->forward;
            const int fw_id = active_is_fw ? ext.bridge_from : ext.bridge_to;
            const int bw_id = active_is_fw ? ext.bridge_to : ext.bridge_from;
            const SingleModePath bridge = active_is_fw ? ext.bridge : ext.bridge.reversed();
            result = extract_solution(fw, bw, fw_id, bw_id, bridge);
            return true;
        }
        std::swap(active, other);
    }
    return false;
}

PlanResult GuidedPlanner::plan(const CompositeConfig& start, const CompositeConfig& goal) {
    PlanResult result;
    result.stats.prep_seconds = prep_seconds_;
    Rng rng(config_.seed);
    extensions_ = 0;

    const EndpointClass es = classify_endpoint(world_, placements_, start);
    const EndpointClass eg = classify_endpoint(world_, placements_, goal);
    if ((!es.in_p() && !es.in_g()) || (!eg.in_p() && !eg.in_g())) {
        result.status = PlanStatus::Unclassifiable;
        return result;
    }

    const auto t0 = Clock::now();

    if ((start.q - goal.q).lpNorm<Eigen::Infinity>() < 1e-12 &&
        start.object_pose.approx_equal(goal.object_pose, 1e-12)) {
        result.status = PlanStatus::Success;
        result.stats.transitions = 0;
        result.stats.plan_seconds = seconds_since(t0);
        return result;
    }

    TableNode s_node, g_node;
    GPTable table = add_query_nodes(table_, es.query_class(), eg.query_class(), &s_node, &g_node);

    int shortest = 0;
    try {
        shortest = shortest_plan_length(table, s_node, g_node);
    } catch (const DisconnectedError&) {
        result.status = PlanStatus::Disconnected;
        result.stats.plan_seconds = seconds_since(t0);
        return result;
    }

    const int delta = config_.delta != 0 ? config_.delta : choose_path_length_increment(es, eg);

    auto make_root = [&](const CompositeConfig& cfg, const EndpointClass& cls,
                         const TableNode& node, int level) {
        TreeVertex v;
        v.config = cfg;
        v.label = node;
        v.level = level;
        v.parent = -1;
        if (cls.in_g()) {
            v.grasp = cls.grasp;
            v.grasp_x = grasp_of(world_, cfg);
        }
        return v;
    };

    int k = shortest;
    bool plans_seen = false;
    while (seconds_since(t0) < config_.t_max) {
        if (k > static_cast<int>(table.nodes().size())) break;  // simple paths exhausted
        const auto plans = plans_of_length(table, k, s_node, g_node);
        if (plans.empty()) {
            // The first feasible length may sit off the BFS parity when both
            // endpoints are query sentinels; realign by single steps until
            // plans appear.
            k += plans_seen ? delta : 1;
            continue;
        }
        plans_seen = true;

        GuidanceGraph q = GuidanceGraph::from_plans(plans);
        SearchTree fw;
        fw.forward = true;
        fw.goal_level = k;
        fw.vertices.push_back(make_root(start, es, s_node, 0));
        SearchTree bw;
        bw.forward = false;
        bw.goal_level = k;
        bw.vertices.push_back(make_root(goal, eg, g_node, k));

        if (plan_path(q, fw, bw, config_.t_max - seconds_since(t0), result, rng)) {
            result.stats.final_plan_length = k;
            result.stats.plan_seconds = seconds_since(t0);
            result.stats.extensions = extensions_;
            return result;
        }
        k += delta;
    }

    result.status = PlanStatus::NoSolution;
    result.stats.plan_seconds = seconds_since(t0);
    result.stats.extensions = extensions_;
    return result;
}

bool audit_path(const WorldModel& world, const ManipulationPath& path, int substeps,
                bool parallel) {
    struct Task {
        const SingleModePath* segment;
        Transform attach;  // transfer only
        double opening;
        std::size_t interval;
        int substep;
    };
    std::vector<Task> tasks;
    for (const SingleModePath& seg : path.segments()) {
        Task base;
        base.segment = &seg;
        base.opening = world.gripper.max_opening;
        if (seg.kind == PathKind::Transfer && !seg.waypoints.empty()) {
            base.attach = fk(world.robot, seg.waypoints.front().q).inverse() *
                          seg.waypoints.front().object_pose;
            const auto match = classify_grasp(world.object, world.gripper,
                                              seg.waypoints.front().object_pose,
                                              fk(world.robot, seg.waypoints.front().q));
            if (match) base.opening = grasp_width(world.object, match->cls, match->params.lateral_axis);
        }
        for (std::size_t i = 0; i + 1 < seg.waypoints.size(); ++i) {
            for (int s = 0; s <= substeps; ++s) {
                base.interval = i;
                base.substep = s;
                tasks.push_back(base);
            }
        }
        if (seg.waypoints.size() == 1) {
            base.interval = 0;
            base.substep = -1;
            tasks.push_back(base);
        }
    }

    std::vector<char> ok(tasks.size(), 1);
    auto run = [&](std::int64_t idx) {
        const Task& t = tasks[static_cast<std::size_t>(idx)];
        const auto& wps = t.segment->waypoints;
        CompositeConfig probe;
        if (t.substep < 0) {
            probe = wps.front();
        } else {
            const CompositeConfig& a = wps[t.interval];
            const CompositeConfig& b = wps[t.interval + 1];
            const double frac = static_cast<double>(t.substep) / (substeps + 1);
            probe.q = (1.0 - frac) * a.q + frac * b.q;
            probe.object_pose = t.segment->kind == PathKind::Transit
                                    ? a.object_pose
                                    : fk(world.robot, probe.q) * t.attach;
        }
        if (!collision_free(world, probe, t.segment->kind, t.opening)) {
            ok[static_cast<std::size_t>(idx)] = 0;
        }
    };
    if (parallel) {
        parallel_for(static_cast<std::int64_t>(tasks.size()), run);
    } else {
        serial_for(static_cast<std::int64_t>(tasks.size()), run);
    }
    return std::all_of(ok.begin(), ok.end(), [](char c) { return c == 1; });
}

}  // namespace regrasp
