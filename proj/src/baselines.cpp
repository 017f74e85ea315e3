#include "regrasp/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace regrasp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const IkOptions kTightIk{300, 1e-2, 0.2, 1e-11, 1e-10};

Transform grasp_of(const WorldModel& world, const CompositeConfig& config) {
    return fk(world.robot, config.q).inverse() * config.object_pose;
}

}  // namespace

double composite_distance(const CompositeConfig& a, const CompositeConfig& b,
                          const CompositeMetricConfig& cfg) {
    if (a.q.size() != b.q.size()) {
        throw DimensionMismatchError("composite_distance: configuration sizes differ");
    }
    const double joint = (b.q - a.q).squaredNorm();
    const double rot = rotation_distance(a.object_pose.rotation, b.object_pose.rotation);
    const double trans = (b.object_pose.translation - a.object_pose.translation).norm();
    return cfg.alpha * joint +
           (1.0 - cfg.alpha) * (cfg.rotation_weight * rot + cfg.translation_weight * trans);
}

PrimitivePlanner::PrimitivePlanner(WorldModel world, PmpConfig config)
    : world_(std::move(world)), config_(config) {
    placements_ = stable_placement_classes(world_.object.boxes);
}

PlanResult PrimitivePlanner::plan(const CompositeConfig& start, const CompositeConfig& goal) {
    PlanResult result;
    Rng rng(config_.seed);

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
        return result;
    }

    auto make_root = [&](const CompositeConfig& cfg, const EndpointClass& cls) {
        TreeVertex v;
        v.config = cfg;
        v.parent = -1;
        if (cls.in_g()) {
            v.grasp = cls.grasp;
            v.grasp_x = grasp_of(world_, cfg);
        }
        return v;
    };
    SearchTree fw;
    fw.forward = true;
    fw.vertices.push_back(make_root(start, es));
    SearchTree bw;
    bw.forward = false;
    bw.vertices.push_back(make_root(goal, eg));

    SearchTree* active = &fw;
    SearchTree* other = &bw;

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    int extensions = 0;

    while (seconds_since(t0) < config_.t_max) {
        ++extensions;

        // Sample a composite configuration, possibly borrowing the opposite
        // tree's continuous parameters so that connections can ever match.
        std::uniform_int_distribution<std::size_t> pick_pc(0, placements_.size() - 1);
        const PlacementClass& pc = placements_[pick_pc(rng)];
        Transform t_intent;
        try {
            const PlacementParams pp = sample_placement(pc, world_.object, world_.table, rng);
            t_intent =
                object_pose_from_placement(pc, pp, world_.table_top(), world_.object, &world_.table);
        } catch (const OutOfTableBoundsError&) {
            continue;
        }
        std::optional<GraspMatch> g_intent;
        Transform x_intent;
        {
            std::uniform_int_distribution<int> pick_g(1, 6 * world_.object.num_boxes());
            const GraspClass cls = decode_grasp_class(pick_g(rng), world_.object.num_boxes());
            try {
                const GraspParams params = sample_grasp(world_.object, world_.gripper, cls, rng);
                g_intent = GraspMatch{cls, params};
                x_intent = grasp_object_in_gripper(world_.object, world_.gripper, cls, params);
            } catch (const InfeasibleGraspError&) {
                continue;
            }
        }
        if (coin(rng) < config_.adopt_probability && !other->vertices.empty()) {
            std::uniform_int_distribution<std::size_t> pick_u(0, other->vertices.size() - 1);
            const TreeVertex& u = other->vertices[pick_u(rng)];
            if (coin(rng) < 0.5) {
                t_intent = u.config.object_pose;
            } else if (u.grasp) {
                g_intent = u.grasp;
                x_intent = u.grasp_x;
            }
        }

        CompositeConfig x;
        x.object_pose = t_intent;
        {
            const auto sols =
                ik(world_.robot, t_intent * x_intent.inverse(), 2, rng, nullptr, kTightIk);
            if (sols.empty()) continue;
            x.q = sols.front();
        }

        // Nearest tree vertex under the composite metric.
        int v_id = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(active->vertices.size()); ++i) {
            const double d =
                composite_distance(active->vertices[static_cast<std::size_t>(i)].config, x,
                                   config_.metric);
            if (d < best) {
                best = d;
                v_id = i;
            }
        }
        const TreeVertex v = active->vertices[static_cast<std::size_t>(v_id)];

        // Transition-diagram move from v.
        TreeVertex w;
        w.parent = v_id;
        const bool carry = v.grasp && coin(rng) < 0.5;
        if (carry) {
            // Transfer: keep v's grasp, move the object to the intent pose.
            const double width =
                grasp_width(world_.object, v.grasp->cls, v.grasp->params.lateral_axis);
            const auto sols = ik(world_.robot, t_intent * v.grasp_x.inverse(), config_.ik_seeds,
                                 rng, &v.config.q, kTightIk);
            bool extended = false;
            for (const auto& qsol : sols) {
                CompositeConfig cfg;
                cfg.q = qsol;
                cfg.object_pose = fk(world_.robot, qsol) * v.grasp_x;
                if (!collision_free(world_, cfg, PathKind::Transit, world_.gripper.max_opening) ||
                    !collision_free(world_, cfg, PathKind::Transfer, width)) {
                    continue;
                }
                auto seg =
                    local_plan(world_, v.config, cfg, PathKind::Transfer, config_.rrt, rng, width);
                if (!seg) continue;
                w.config = cfg;
                w.edge = std::move(*seg);
                w.grasp = v.grasp;
                w.grasp_x = v.grasp_x;
                extended = true;
                break;
            }
            if (!extended) {
                std::swap(active, other);
                continue;
            }
        } else {
            // Transit: acquire the intent grasp at v's object pose.
            if (!g_intent) {
                std::swap(active, other);
                continue;
            }
            const double width =
                grasp_width(world_.object, g_intent->cls, g_intent->params.lateral_axis);
            const auto sols = ik(world_.robot, v.config.object_pose * x_intent.inverse(),
                                 config_.ik_seeds, rng, &v.config.q, kTightIk);
            bool extended = false;
            for (const auto& qsol : sols) {
                CompositeConfig cfg;
                cfg.q = qsol;
                cfg.object_pose = v.config.object_pose;
                if (!collision_free(world_, cfg, PathKind::Transit, world_.gripper.max_opening) ||
                    !collision_free(world_, cfg, PathKind::Transfer, width)) {
                    continue;
                }
                auto seg = local_plan(world_, v.config, cfg, PathKind::Transit, config_.rrt, rng,
                                      world_.gripper.max_opening);
                if (!seg) continue;
                w.config = cfg;
                w.edge = std::move(*seg);
                w.grasp = g_intent;
                w.grasp_x = grasp_of(world_, cfg);
                extended = true;
                break;
            }
            if (!extended) {
                std::swap(active, other);
                continue;
            }
        }

        active->vertices.push_back(w);
        const int w_id = static_cast<int>(active->vertices.size()) - 1;

        // Connect attempt: nearest opposite vertex whose invariant matches.
        int best_u = -1;
        PathKind bridge_mode = PathKind::Transit;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(other->vertices.size()); ++i) {
            const TreeVertex& u = other->vertices[static_cast<std::size_t>(i)];
            const double d = (u.config.q - w.config.q).squaredNorm();
            if (d >= best_d) continue;
            if (w.config.object_pose.approx_equal(u.config.object_pose, 1e-9)) {
                best_u = i;
                best_d = d;
                bridge_mode = PathKind::Transit;
            } else if (w.grasp && u.grasp &&
                       (w.grasp_x.translation - u.grasp_x.translation).norm() <= 1e-6 &&
                       rotation_distance(w.grasp_x.rotation, u.grasp_x.rotation) <= 1e-6) {
                best_u = i;
                best_d = d;
                bridge_mode = PathKind::Transfer;
            }
        }
        if (best_u >= 0) {
            const TreeVertex& u = other->vertices[static_cast<std::size_t>(best_u)];
            const double opening = bridge_mode == PathKind::Transfer
                                       ? grasp_width(world_.object, w.grasp->cls,
                                                     w.grasp->params.lateral_axis)
                                       : world_.gripper.max_opening;
            auto bridge =
                try_bridge(world_, active->vertices[static_cast<std::size_t>(w_id)], u,
                           bridge_mode, config_.rrt, rng, opening);
            if (bridge) {
                const bool active_is_fw = active->forward;
                const int fw_id = active_is_fw ? w_id : best_u;
                const int bw_id = active_is_fw ? best_u : w_id;
                const SingleModePath b = active_is_fw ? *bridge : bridge->reversed();
                result = extract_solution(fw, bw, fw_id, bw_id, b);
                result.stats.plan_seconds = seconds_since(t0);
                result.stats.extensions = extensions;
                result.realized_plan.clear();
                return result;
            }
        }
        std::swap(active, other);
    }

    result.status = PlanStatus::NoSolution;
    result.stats.plan_seconds = seconds_since(t0);
    result.stats.extensions = extensions;
    return result;
}

bool RegraspGraph::connected(int a, int b) const {
    return !common_grasps(a, b).empty();
}

std::vector<int> RegraspGraph::common_grasps(int a, int b) const {
    const auto& ga = placements.at(static_cast<std::size_t>(a)).valid_grasps;
    const auto& gb = placements.at(static_cast<std::size_t>(b)).valid_grasps;
    std::vector<int> out;
    std::set_intersection(ga.begin(), ga.end(), gb.begin(), gb.end(), std::back_inserter(out));
    return out;
}

std::vector<DiscreteGrasp> dbmp_grasp_set(const ObjectModel& object, const GripperModel& gripper,
                                          int slide_samples) {
    std::vector<DiscreteGrasp> out;
    for (int j = 1; j <= object.num_boxes(); ++j) {
        for (int i = 1; i <= 6; ++i) {
            const GraspClass cls{i, j};
            for (int lat : feasible_lateral_axes(object, gripper, cls)) {
                const Box& box = object.box(j);
                const int slide_axis = 3 - direction_axis(i) - lat;
                const double h = box.half_extents[slide_axis];
                const double width = grasp_width(object, cls, lat);
                const std::vector<Box> body = gripper.body_boxes(width);
                for (int k = 0; k < slide_samples; ++k) {
                    GraspParams params;
                    params.lateral_axis = lat;
                    params.slide_offset =
                        slide_samples == 1 ? 0.0 : -h + 2.0 * h * k / (slide_samples - 1);
                    params.depth_offset = default_depth_offset(object, gripper, cls);
                    // A grasp whose gripper penetrates the object is never
                    // realizable; keep it out of the set.
                    const Transform pose =
                        gripper_pose(Transform::identity(), object, gripper, cls, params);
                    bool collides = false;
                    for (const Box& part : body) {
                        for (const Box& other : object.boxes) {
                            if (obb_overlap(part, pose, other, Transform::identity())) {
                                collides = true;
                                break;
                            }
                        }
                        if (collides) break;
                    }
                    if (!collides) out.push_back({cls, params});
                }
            }
        }
    }
    return out;
}

RegraspGraph dbmp_build(const WorldModel& world, const DbmpConfig& config, Rng& rng) {
    RegraspGraph graph;
    graph.grasps = dbmp_grasp_set(world.object, world.gripper, config.slide_samples);

    const auto placements = stable_placement_classes(world.object.boxes);
    const Vec3 center = world.table.local_pose.translation;
    const IkOptions quick{300, 1e-2, 0.2, 1e-5, 1e-4};
    const Eigen::VectorXd home = world.robot.home();

    for (const PlacementClass& pc : placements) {
        for (int r = 0; r < config.rotation_samples; ++r) {
            const double yaw = 2.0 * M_PI * r / config.rotation_samples - M_PI;
            RegraspGraph::PlacementNode node;
            node.placement_class = pc.index;
            node.object_pose = object_pose_from_placement(
                pc, {center.x(), center.y(), yaw}, world.table_top(), world.object, &world.table);
            for (int g = 0; g < static_cast<int>(graph.grasps.size()); ++g) {
                const DiscreteGrasp& grasp = graph.grasps[static_cast<std::size_t>(g)];
                const Transform target =
                    gripper_pose(node.object_pose, world.object, world.gripper, grasp.cls,
                                 grasp.params);
                const auto sols = ik(world.robot, target, config.ik_seeds, rng, &home, quick);
                const double width =
                    grasp_width(world.object, grasp.cls, grasp.params.lateral_axis);
                for (const auto& qsol : sols) {
                    CompositeConfig cfg;
                    cfg.q = qsol;
                    cfg.object_pose = node.object_pose;
                    if (collision_free(world, cfg, PathKind::Transit, world.gripper.max_opening) &&
                        collision_free(world, cfg, PathKind::Transfer, width)) {
                        node.valid_grasps.push_back(g);
                        break;
                    }
                }
            }
            graph.placements.push_back(std::move(node));
        }
    }
    return graph;
}

DiscretizationPlanner::DiscretizationPlanner(WorldModel world, DbmpConfig config)
    : world_(std::move(world)), config_(config) {
    placements_ = stable_placement_classes(world_.object.boxes);
}

PlanResult DiscretizationPlanner::plan(const CompositeConfig& start, const CompositeConfig& goal) {
    PlanResult result;
    Rng rng(config_.seed);

    if (!built_) {
        const auto t0 = Clock::now();
        graph_ = dbmp_build(world_, config_, rng);
        prep_seconds_ = seconds_since(t0);
        built_ = true;
    }
    result.stats.prep_seconds = prep_seconds_;

    const EndpointClass es = classify_endpoint(world_, placements_, start);
    const EndpointClass eg = classify_endpoint(world_, placements_, goal);
    if (!es.in_p() || !eg.in_p()) {
        result.status = PlanStatus::Unclassifiable;  // DBMP handles placed start/goal
        return result;
    }

    const auto t0 = Clock::now();

    // Append the query placements as extra layer-1 nodes at their exact poses.
    RegraspGraph graph = graph_;
    auto append_query = [&](const CompositeConfig& cfg, const EndpointClass& cls) {
        RegraspGraph::PlacementNode node;
        node.placement_class = cls.placement->placement_class;
        node.object_pose = cfg.object_pose;
        const IkOptions quick{300, 1e-2, 0.2, 1e-5, 1e-4};
        const Eigen::VectorXd home = world_.robot.home();
        for (int g = 0; g < static_cast<int>(graph.grasps.size()); ++g) {
            const DiscreteGrasp& grasp = graph.grasps[static_cast<std::size_t>(g)];
            const Transform target = gripper_pose(node.object_pose, world_.object, world_.gripper,
                                                  grasp.cls, grasp.params);
            const auto sols = ik(world_.robot, target, config_.ik_seeds, rng, &home, quick);
            const double width = grasp_width(world_.object, grasp.cls, grasp.params.lateral_axis);
            for (const auto& qsol : sols) {
                CompositeConfig probe;
                probe.q = qsol;
                probe.object_pose = node.object_pose;
                if (collision_free(world_, probe, PathKind::Transit, world_.gripper.max_opening) &&
                    collision_free(world_, probe, PathKind::Transfer, width)) {
                    node.valid_grasps.push_back(g);
                    break;
                }
            }
        }
        graph.placements.push_back(std::move(node));
        return static_cast<int>(graph.placements.size()) - 1;
    };
    const int start_node = append_query(start, es);
    const int goal_node = append_query(goal, eg);

    // Depth-first search over placement sequences, shuffled per run.
    std::vector<std::vector<int>> sequences;
    std::vector<int> path{start_node};
    auto dfs = [&](auto&& self, int current, int depth) -> void {
        if (static_cast<int>(sequences.size()) >= 64) return;
        if (current == goal_node) {
            sequences.push_back(path);
            return;
        }
        if (depth >= config_.max_sequence_length) return;
        std::vector<int> order(graph.placements.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::shuffle(order.begin(), order.end(), rng);
        for (int next : order) {
            if (next == current || next == start_node) continue;
            if (std::find(path.begin(), path.end(), next) != path.end()) continue;
            if (!graph.connected(current, next)) continue;
            path.push_back(next);
            self(self, next, depth + 1);
            path.pop_back();
        }
    };
    dfs(dfs, start_node, 0);

    if (sequences.empty()) {
        result.status = PlanStatus::NoSolution;
        result.stats.plan_seconds = seconds_since(t0);
        return result;
    }
    // Fewer carries first; ties keep the shuffled discovery order.
    std::stable_sort(sequences.begin(), sequences.end(),
                     [](const std::vector<int>& a, const std::vector<int>& b) {
                         return a.size() < b.size();
                     });

    // Try sequences depth-first: assign grasps, then generate motions.
    for (const std::vector<int>& seq : sequences) {
        if (seconds_since(t0) > config_.t_max) break;

        std::vector<std::vector<int>> options;  // common grasps per carry
        bool feasible = true;
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            auto common = graph.common_grasps(seq[i], seq[i + 1]);
            if (common.empty()) {
                feasible = false;
                break;
            }
            std::shuffle(common.begin(), common.end(), rng);
            if (common.size() > 4) common.resize(4);
            options.push_back(std::move(common));
        }
        if (!feasible) continue;

        // One grasp choice per carry; iterate lexicographically over the
        // shuffled options.
        std::vector<std::size_t> choice(options.size(), 0);
        bool more = true;
        while (more && seconds_since(t0) < config_.t_max) {
            std::vector<SingleModePath> segments;
            CompositeConfig cursor = start;
            bool ok = true;
            for (std::size_t i = 0; i < options.size() && ok; ++i) {
                const DiscreteGrasp& grasp =
                    graph.grasps[static_cast<std::size_t>(options[i][choice[i]])];
                const double width =
                    grasp_width(world_.object, grasp.cls, grasp.params.lateral_axis);
                const Transform x =
                    grasp_object_in_gripper(world_.object, world_.gripper, grasp.cls, grasp.params);

                // Transit: reach the grasp at the cursor placement.
                const Transform grip_here = cursor.object_pose * x.inverse();
                const auto sols_here =
                    ik(world_.robot, grip_here, config_.ik_seeds, rng, &cursor.q, kTightIk);
                ok = false;
                for (const auto& qsol : sols_here) {
                    CompositeConfig pick_cfg;
                    pick_cfg.q = qsol;
                    pick_cfg.object_pose = cursor.object_pose;
                    if (!collision_free(world_, pick_cfg, PathKind::Transit,
                                        world_.gripper.max_opening) ||
                        !collision_free(world_, pick_cfg, PathKind::Transfer, width)) {
                        continue;
                    }
                    auto transit = local_plan(world_, cursor, pick_cfg, PathKind::Transit,
                                              config_.rrt, rng, world_.gripper.max_opening);
                    if (!transit) continue;

                    // Transfer: carry to the next placement pose.
                    const Transform next_pose =
                        graph.placements[static_cast<std::size_t>(seq[i + 1])].object_pose;
                    const Transform grasp_x = grasp_of(world_, pick_cfg);
                    const auto sols_there = ik(world_.robot, next_pose * grasp_x.inverse(),
                                               config_.ik_seeds, rng, &qsol, kTightIk);
                    for (const auto& q2 : sols_there) {
                        CompositeConfig place_cfg;
                        place_cfg.q = q2;
                        place_cfg.object_pose = fk(world_.robot, q2) * grasp_x;
                        if (!collision_free(world_, place_cfg, PathKind::Transit,
                                            world_.gripper.max_opening) ||
                            !collision_free(world_, place_cfg, PathKind::Transfer, width)) {
                            continue;
                        }
                        auto transfer = local_plan(world_, pick_cfg, place_cfg, PathKind::Transfer,
                                                   config_.rrt, rng, width);
                        if (!transfer) continue;
                        segments.push_back(std::move(*transit));
                        segments.push_back(std::move(*transfer));
                        cursor = place_cfg;
                        ok = true;
                        break;
                    }
                    if (ok) break;
                }
            }
            if (ok) {
                // Final transit back to the goal configuration.
                auto home = local_plan(world_, cursor, goal, PathKind::Transit, config_.rrt, rng,
                                       world_.gripper.max_opening);
                if (home) {
                    segments.push_back(std::move(*home));
                    result.status = PlanStatus::Success;
                    result.path = reduce(ManipulationPath(std::move(segments)));
                    result.stats.transitions = result.path.transitions();
                    result.stats.plan_seconds = seconds_since(t0);
                    return result;
                }
            }
            // Advance the grasp-choice counter.
            more = false;
            for (std::size_t i = options.size(); i-- > 0;) {
                if (++choice[i] < options[i].size()) {
                    more = true;
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    result.status = PlanStatus::NoSolution;
    result.stats.plan_seconds = seconds_since(t0);
    return result;
}

}  // namespace regrasp
