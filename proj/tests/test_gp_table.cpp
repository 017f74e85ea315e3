#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "regrasp/gp_table.hpp"
#include "test_helpers.hpp"

using namespace regrasp;
using namespace regrasp::testing;

namespace {

std::set<std::pair<int, int>> node_set(const GPTable& table) {
    std::set<std::pair<int, int>> out;
    for (const TableNode& n : table.nodes()) {
        if (n.tag == QueryTag::None) out.insert({n.placement, n.grasp});
    }
    return out;
}

}  // namespace

TEST_CASE("reference box table reproduces the 14-node topology") {
    const ObjectModel box = paper_box();
    const GripperModel gripper;
    const Box table = unit_table();

    const GPTable gp = build_table(box, gripper, table);
    CHECK(gp.nodes().size() == 14);

    const auto relabel = find_single_box_relabeling(node_set(gp), fig_box_nodes(), 6);
    REQUIRE(relabel.has_value());
}

TEST_CASE("parallel and reference construction agree") {
    const ObjectModel box = paper_box();
    const GripperModel gripper;
    const Box table = unit_table();

    TableBuildOptions par;
    par.parallel = true;
    TableBuildOptions ser;
    ser.parallel = false;
    CHECK(node_set(build_table(box, gripper, table, par)) ==
          node_set(build_table(box, gripper, table, ser)));
    CHECK(node_set(build_table(box, gripper, table, par)) ==
          node_set(build_table_reference(box, gripper, table)));
}

TEST_CASE("an ungraspable object yields an empty table") {
    const ObjectModel cube("cube", {Box({0.1, 0.1, 0.1})});
    const GPTable gp = build_table(cube, GripperModel{}, unit_table());
    CHECK(gp.nodes().empty());
}

TEST_CASE("neighbors follow the row/column rule") {
    const ObjectModel box = paper_box();
    const GPTable gp = build_table(box, GripperModel{}, unit_table());
    const auto relabel = find_single_box_relabeling(node_set(gp), fig_box_nodes(), 6);
    REQUIRE(relabel.has_value());

    // Map a reference-label node back into this table's labels.
    auto from_ref = [&](int p_ref, int g_ref) {
        for (const TableNode& n : gp.nodes()) {
            const int p2 = relabel->placement_map[static_cast<std::size_t>(n.placement - 1)];
            const int g2 = relabel->direction_map.map_direction(n.grasp);
            if (p2 == p_ref && g2 == g_ref) return n;
        }
        FAIL("reference node not found");
        return TableNode{};
    };
    auto to_ref = [&](const TableNode& n) {
        return std::make_pair(relabel->placement_map[static_cast<std::size_t>(n.placement - 1)],
                              relabel->direction_map.map_direction(n.grasp));
    };

    // Node (6,6) in reference labels connects to (1,6) and (4,6).
    const TableNode n66 = from_ref(6, 6);
    std::set<std::pair<int, int>> got;
    for (const TableNode& m : gp.neighbors(n66)) got.insert(to_ref(m));
    CHECK(got == std::set<std::pair<int, int>>{{1, 6}, {4, 6}});

    // Node (4,4): the rest of reference column 4.
    const TableNode n44 = from_ref(4, 4);
    got.clear();
    for (const TableNode& m : gp.neighbors(n44)) got.insert(to_ref(m));
    CHECK(got == std::set<std::pair<int, int>>{{4, 2}, {4, 3}, {4, 5}, {4, 6}});

    // Brute-force adjacency scan agrees everywhere.
    for (const TableNode& a : gp.nodes()) {
        std::set<std::pair<int, int>> scan;
        for (const TableNode& b : gp.nodes()) {
            if (a == b) continue;
            if (a.placement == b.placement || a.grasp == b.grasp) scan.insert(to_ref(b));
        }
        got.clear();
        for (const TableNode& m : gp.neighbors(a)) got.insert(to_ref(m));
        CHECK(got == scan);
    }

    CHECK_THROWS_AS(gp.neighbors({9, 9, QueryTag::None}), UnknownNodeError);
}

TEST_CASE("single-node table has no neighbors") {
    GPTable gp({{1, 1, QueryTag::None}}, 1, 1);
    CHECK(gp.neighbors({1, 1, QueryTag::None}).empty());
}

TEST_CASE("self-loops are node attributes") {
    // Regular nodes carry both loops; query nodes only the loop their set
    // admits (placed-only nodes cannot carry, grasped-only cannot re-place).
    GPTable gp({{1, 1, QueryTag::None},
                {1, 0, QueryTag::Start},
                {0, 1, QueryTag::Goal}},
               1, 1);
    const TableNode regular{1, 1, QueryTag::None};
    const TableNode in_p{1, 0, QueryTag::Start};
    const TableNode in_g{0, 1, QueryTag::Goal};
    CHECK(gp.has_transit_loop(regular));
    CHECK(gp.has_transfer_loop(regular));
    CHECK(gp.has_transit_loop(in_p));
    CHECK_FALSE(gp.has_transfer_loop(in_p));
    CHECK_FALSE(gp.has_transit_loop(in_g));
    CHECK(gp.has_transfer_loop(in_g));
    CHECK_THROWS_AS(gp.has_transit_loop({5, 5, QueryTag::None}), UnknownNodeError);
}

TEST_CASE("query nodes attach by class") {
    const ObjectModel box = paper_box();
    const GPTable gp = build_table(box, GripperModel{}, unit_table());
    const auto relabel = find_single_box_relabeling(node_set(gp), fig_box_nodes(), 6);
    REQUIRE(relabel.has_value());

    // Reference placement 6 holds a single node (6,6): a start query in P
    // with that placement class must connect exactly to it.
    int my_p6 = 0;
    for (int p = 1; p <= 6; ++p) {
        if (relabel->placement_map[static_cast<std::size_t>(p - 1)] == 6) my_p6 = p;
    }
    REQUIRE(my_p6 > 0);

    QueryClass start;
    start.placement_class = my_p6;
    QueryClass goal;
    goal.placement_class = my_p6;
    goal.grasp_class = [&] {
        for (const TableNode& n : gp.nodes()) {
            if (n.placement == my_p6) return n.grasp;
        }
        return 0;
    }();

    TableNode s, g;
    const GPTable with_q = add_query_nodes(gp, start, goal, &s, &g);
    CHECK(s.grasp == 0);
    CHECK(s.tag == QueryTag::Start);
    CHECK(g.tag == QueryTag::None);  // goal was in G-and-P: existing node
    CHECK(with_q.nodes().size() == gp.nodes().size() + 1);

    const auto nb = with_q.neighbors(s);
    REQUIRE(nb.size() == 1);
    CHECK(nb[0].placement == my_p6);

    // A goal in G-and-P leaves the table unchanged apart from the start node.
    const auto nb_goal = with_q.neighbors(g);
    CHECK(std::count_if(nb_goal.begin(), nb_goal.end(),
                        [&](const TableNode& n) { return n == s; }) == 1);

    // In-G query node: connects horizontally to every node of that grasp row.
    QueryClass in_g;
    in_g.grasp_class = 2;
    GPTable with_g = gp;
    const TableNode gnode = attach_query_node(with_g, in_g, QueryTag::Goal);
    CHECK(gnode.placement == 0);
    int expected = 0;
    for (const TableNode& n : gp.nodes()) {
        if (n.grasp == 2) ++expected;
    }
    CHECK(static_cast<int>(with_g.neighbors(gnode).size()) == expected);

    // Unclassifiable query.
    GPTable scratch = gp;
    CHECK_THROWS_AS(attach_query_node(scratch, QueryClass{}, QueryTag::Start),
                    UnclassifiableConfigError);
}

TEST_CASE("two in-P query nodes with one placement class stay unconnected") {
    const ObjectModel box = paper_box();
    const GPTable gp = build_table(box, GripperModel{}, unit_table());
    QueryClass start, goal;
    start.placement_class = 1;
    goal.placement_class = 1;
    TableNode s, g;
    const GPTable with_q = add_query_nodes(gp, start, goal, &s, &g);
    CHECK(s != g);
    const auto nb = with_q.neighbors(s);
    CHECK(std::find(nb.begin(), nb.end(), g) == nb.end());
}

TEST_CASE("environment independence") {
    const ObjectModel box = paper_box();
    const GripperModel gripper;
    const auto reference = node_set(build_table(box, gripper, unit_table()));

    for (const Vec3& center : {Vec3(0.3, 0.2, 0.0), Vec3(-0.4, 0.1, 0.2), Vec3(0.0, -0.3, -0.5),
                               Vec3(1.0, 1.0, 1.0), Vec3(-0.2, 0.4, 0.3)}) {
        for (const double half : {0.4, 0.6, 1.0}) {
            const Box table({half, half, 0.05},
                            Transform::from_translation(center - Vec3(0, 0, 0.05)));
            CHECK(node_set(build_table(box, gripper, table)) == reference);
        }
    }
}

TEST_CASE("node soundness: sampled grasps recheck collision-free") {
    const ObjectModel box = paper_box();
    const GripperModel gripper;
    const Box table = unit_table();
    const GPTable gp = build_table(box, gripper, table);
    const auto placements = stable_placement_classes(box.boxes);
    const double top = table_top_z(table);
    Rng rng(41);

    for (const TableNode& n : gp.nodes()) {
        const auto& pc = placements[static_cast<std::size_t>(n.placement - 1)];
        const Transform pose = object_pose_from_placement(pc, {0.0, 0.0, 0.0}, top, box, &table);
        const GraspClass cls = decode_grasp_class(n.grasp, box.num_boxes());
        bool found = false;
        for (int trial = 0; trial < 50 && !found; ++trial) {
            GraspParams params;
            try {
                params = sample_grasp(box, gripper, cls, rng);
            } catch (const InfeasibleGraspError&) {
                break;
            }
            const Transform grip = gripper_pose(pose, box, gripper, cls, params);
            bool collides = false;
            for (const Box& part : gripper.body_boxes(grasp_width(box, cls, params.lateral_axis))) {
                if (obb_overlap(part, grip, table, Transform::identity())) collides = true;
            }
            found = !collides;
        }
        CHECK(found);
    }
}

TEST_CASE("bottom approach directions are never nodes") {
    const ObjectModel box = paper_box();
    const Box table = unit_table();
    const GPTable gp = build_table(box, GripperModel{}, table);
    const auto placements = stable_placement_classes(box.boxes);
    const double top = table_top_z(table);

    for (const auto& pc : placements) {
        const Transform pose = object_pose_from_placement(pc, {0.0, 0.0, 0.0}, top, box, &table);
        // The box sits on the table in every placement; the direction whose
        // world image points straight down is the supporting-face approach.
        for (int i = 1; i <= 6; ++i) {
            const Vec3 d_world = pose.rotation * direction_vector(i);
            if ((d_world + Vec3::UnitZ()).norm() < 1e-6) {
                CHECK_FALSE(gp.contains({pc.index, grasp_class_index(i, 1), QueryTag::None}));
            }
        }
    }
}

TEST_CASE("table export and import round-trip") {
    const ObjectModel box = paper_box();
    const GPTable gp = build_table(box, GripperModel{}, unit_table());

    const std::string doc = export_table(gp, TableFormat::Json);
    const GPTable back = import_table_json(doc);
    CHECK(back.nodes() == gp.nodes());
    CHECK(back.num_placement_classes() == gp.num_placement_classes());
    CHECK(back.num_grasp_classes() == gp.num_grasp_classes());

    // Empty table exports a valid document.
    const GPTable empty;
    const GPTable back_empty = import_table_json(export_table(empty, TableFormat::Json));
    CHECK(back_empty.nodes().empty());

    // Grid text: one row per grasp class plus the axis footer.
    const std::string grid = export_table(gp, TableFormat::GridText);
    CHECK(std::count(grid.begin(), grid.end(), '\n') == gp.num_grasp_classes() + 2);

    const std::string svg = export_table(gp, TableFormat::Svg);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(std::count(svg.begin(), svg.end(), 'o') >= 14);

    CHECK_THROWS_AS(import_table_json("not json"), ParseError);
    CHECK_THROWS_AS(import_table_json("{}"), ValidationError);
}
