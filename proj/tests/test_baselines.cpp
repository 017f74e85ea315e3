#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "regrasp/baselines.hpp"
#include "regrasp/harness.hpp"
#include "test_helpers.hpp"

using namespace regrasp;
using namespace regrasp::testing;

namespace {

SceneModel stand_scene() {
    return load_scene(std::string(REGRASP_SCENES_DIR) + "/box_to_stand.scene.json");
}

CompositeConfig make_config(double q0, const Transform& pose) {
    CompositeConfig c;
    c.q = Eigen::VectorXd::Constant(6, q0);
    c.object_pose = pose;
    return c;
}

}  // namespace

TEST_CASE("composite distance") {
    const CompositeMetricConfig cfg;
    const auto a = make_config(0.1, Transform::identity());
    CHECK(composite_distance(a, a, cfg) == 0.0);

    // alpha = 1: squared joint-space distance only.
    CompositeMetricConfig joints_only;
    joints_only.alpha = 1.0;
    const auto b = make_config(0.3, Transform::from_translation({1.0, 2.0, 3.0}));
    CHECK(composite_distance(a, b, joints_only) ==
          doctest::Approx(6 * 0.2 * 0.2).epsilon(1e-12));

    // Pure object rotation by phi with alpha = 0, w_t = 0: distance = w_r * phi.
    CompositeMetricConfig rot_only;
    rot_only.alpha = 0.0;
    rot_only.translation_weight = 0.0;
    rot_only.rotation_weight = 2.5;
    const double phi = 0.8;
    const auto c = make_config(0.1, Transform::from_axis_angle({0.0, 1.0, 0.0}, phi));
    CHECK(composite_distance(a, c, rot_only) == doctest::Approx(2.5 * phi).epsilon(1e-9));

    // Symmetric, zero iff coincident.
    Rng rng(211);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto x = make_config(u(rng), Transform::from_axis_angle(
                                               Vec3(u(rng), u(rng), u(rng)).normalized(), u(rng),
                                               {u(rng), u(rng), u(rng)}));
        const auto y = make_config(u(rng), Transform::from_axis_angle(
                                               Vec3(u(rng), u(rng), u(rng)).normalized(), u(rng),
                                               {u(rng), u(rng), u(rng)}));
        CHECK(composite_distance(x, y, cfg) == doctest::Approx(composite_distance(y, x, cfg)));
        if (composite_distance(x, y, cfg) == 0.0) {
            CHECK(x.approx_equal(y, 1e-12));
        }
    }

    // Geodesic term is invariant under a common left rotation.
    for (int i = 0; i < 100; ++i) {
        const Quat r = Quat(u(rng), u(rng), u(rng), u(rng)).normalized();
        const Quat qa = Quat(u(rng), u(rng), u(rng), u(rng)).normalized();
        const Quat qb = Quat(u(rng), u(rng), u(rng), u(rng)).normalized();
        CHECK(rotation_distance(r * qa, r * qb) ==
              doctest::Approx(rotation_distance(qa, qb)).epsilon(1e-9));
    }

    CompositeConfig wrong = a;
    wrong.q = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(composite_distance(a, wrong, cfg), DimensionMismatchError);
}

TEST_CASE("dbmp grasp set size for the reference box") {
    const auto grasps = dbmp_grasp_set(paper_box(), GripperModel{}, 11);
    // 124 in the reference count; the sweep resolution puts ours within 2x.
    CHECK(grasps.size() >= 62);
    CHECK(grasps.size() <= 248);
    for (const DiscreteGrasp& g : grasps) {
        CHECK(grasp_width(paper_box(), g.cls, g.params.lateral_axis) <=
              GripperModel{}.max_opening + 1e-12);
    }
}

TEST_CASE("regrasp graph edge rule equals brute-force common-grasp intersection") {
    SceneModel scene = stand_scene();
    DbmpConfig cfg;
    cfg.rotation_samples = 2;
    cfg.slide_samples = 3;
    cfg.ik_seeds = 4;
    Rng rng(223);
    const RegraspGraph graph = dbmp_build(scene.world, cfg, rng);
    REQUIRE(graph.placements.size() == 12);  // 6 classes x 2 rotations

    for (int a = 0; a < static_cast<int>(graph.placements.size()); ++a) {
        for (int b = a + 1; b < static_cast<int>(graph.placements.size()); ++b) {
            bool brute = false;
            for (int g = 0; g < static_cast<int>(graph.grasps.size()); ++g) {
                const auto& va = graph.placements[a].valid_grasps;
                const auto& vb = graph.placements[b].valid_grasps;
                const bool in_a = std::find(va.begin(), va.end(), g) != va.end();
                const bool in_b = std::find(vb.begin(), vb.end(), g) != vb.end();
                if (in_a && in_b) {
                    brute = true;
                    break;
                }
            }
            CHECK(graph.connected(a, b) == brute);
        }
    }

    // Some placement pair of the same class shares a grasp.
    bool any_edge = false;
    for (int a = 0; a < static_cast<int>(graph.placements.size()) && !any_edge; ++a) {
        for (int b = a + 1; b < static_cast<int>(graph.placements.size()); ++b) {
            if (graph.connected(a, b)) {
                any_edge = true;
                break;
            }
        }
    }
    CHECK(any_edge);
}

TEST_CASE("unreachable placements have no valid grasps and stay isolated") {
    SceneModel scene = stand_scene();
    scene.world.table.local_pose.translation.x() += 1.5;  // out of reach
    DbmpConfig cfg;
    cfg.rotation_samples = 1;
    cfg.slide_samples = 1;
    cfg.ik_seeds = 2;
    Rng rng(227);
    const RegraspGraph graph = dbmp_build(scene.world, cfg, rng);
    for (const auto& node : graph.placements) {
        CHECK(node.valid_grasps.empty());
    }
    for (int a = 0; a < static_cast<int>(graph.placements.size()); ++a) {
        for (int b = a + 1; b < static_cast<int>(graph.placements.size()); ++b) {
            CHECK_FALSE(graph.connected(a, b));
        }
    }
}

TEST_CASE("dbmp solves the direct task with two transitions") {
    SceneModel scene = stand_scene();
    DbmpConfig cfg = scene.dbmp;
    cfg.rotation_samples = 2;
    cfg.slide_samples = 3;
    cfg.ik_seeds = 6;
    cfg.seed = 5;
    cfg.t_max = 60.0;
    DiscretizationPlanner planner(scene.world, cfg);
    const PlanResult result = planner.plan(scene.start, scene.goal);
    REQUIRE(result.status == PlanStatus::Success);
    CHECK(result.stats.transitions == 2);
    CHECK(result.path.is_irreducible());
    CHECK(audit_path(scene.world, result.path, 10));
    CHECK(result.stats.prep_seconds > 0.0);
}

TEST_CASE("dbmp reports NoSolution when the graph is disconnected") {
    SceneModel scene = stand_scene();
    scene.world.gripper.max_opening = 0.03;  // flat and standing classes disconnect
    DbmpConfig cfg = scene.dbmp;
    cfg.rotation_samples = 1;
    cfg.slide_samples = 3;
    cfg.ik_seeds = 2;
    cfg.t_max = 20.0;
    DiscretizationPlanner planner(scene.world, cfg);
    const PlanResult result = planner.plan(scene.start, scene.goal);
    CHECK(result.status == PlanStatus::NoSolution);
}

TEST_CASE("pmp solves the direct task and passes the audit") {
    SceneModel scene = stand_scene();
    PmpConfig cfg = scene.pmp;
    cfg.seed = 31;
    cfg.t_max = 60.0;
    PrimitivePlanner planner(scene.world, cfg);
    const PlanResult result = planner.plan(scene.start, scene.goal);
    REQUIRE(result.status == PlanStatus::Success);
    CHECK(result.stats.transitions >= 2);
    CHECK(result.path.is_irreducible());
    CHECK(audit_path(scene.world, result.path, 10));
    CHECK(result.path.start().q == scene.start.q);
    CHECK(result.path.end().q == scene.goal.q);
}

TEST_CASE("pmp start equal to goal returns an empty path") {
    SceneModel scene = stand_scene();
    PmpConfig cfg = scene.pmp;
    PrimitivePlanner planner(scene.world, cfg);
    const PlanResult result = planner.plan(scene.start, scene.start);
    CHECK(result.status == PlanStatus::Success);
    CHECK(result.stats.transitions == 0);
}
