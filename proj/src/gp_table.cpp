#include "regrasp/gp_table.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "regrasp/parallel.hpp"

namespace regrasp {

using nlohmann::json;

std::string to_string(const TableNode& n) {
    std::ostringstream out;
    out << "(" << n.placement << ", " << n.grasp << ")";
    if (n.tag == QueryTag::Start) out << "[start]";
    if (n.tag == QueryTag::Goal) out << "[goal]";
    return out.str();
}

GPTable::GPTable(std::vector<TableNode> nodes, int num_placement_classes, int num_grasp_classes)
    : nodes_(std::move(nodes)),
      num_placement_classes_(num_placement_classes),
      num_grasp_classes_(num_grasp_classes) {
    for (const TableNode& n : nodes_) {
        if (n.placement == 0 && n.grasp == 0) {
            throw ValidationError("GPTable: node with both indices zero");
        }
    }
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
}

bool GPTable::contains(const TableNode& n) const {
    return std::binary_search(nodes_.begin(), nodes_.end(), n);
}

bool GPTable::adjacent(const TableNode& a, const TableNode& b) {
    if (a == b) return false;
    if (a.placement > 0 && a.placement == b.placement && !(a.grasp == 0 && b.grasp == 0)) {
        return true;
    }
    if (a.grasp > 0 && a.grasp == b.grasp && !(a.placement == 0 && b.placement == 0)) {
        return true;
    }
    return false;
}

EdgeKind GPTable::edge_kind(const TableNode& a, const TableNode& b) {
    if (!adjacent(a, b)) throw UnknownEdgeError("edge_kind: nodes are not adjacent");
    return (a.placement == b.placement) ? EdgeKind::Vertical : EdgeKind::Horizontal;
}

std::vector<TableNode> GPTable::neighbors(const TableNode& n) const {
    if (!contains(n)) throw UnknownNodeError("neighbors: node not in table " + to_string(n));
    std::vector<TableNode> out;
    for (const TableNode& m : nodes_) {
        if (adjacent(n, m)) out.push_back(m);
    }
    return out;
}

bool GPTable::has_transit_loop(const TableNode& n) const {
    if (!contains(n)) throw UnknownNodeError("has_transit_loop: node not in table");
    return n.placement > 0;  // object placed: the robot can move alone
}

bool GPTable::has_transfer_loop(const TableNode& n) const {
    if (!contains(n)) throw UnknownNodeError("has_transfer_loop: node not in table");
    return n.grasp > 0;  // object grasped: it can be carried
}

void GPTable::add_node(const TableNode& n) {
    if (n.placement == 0 && n.grasp == 0) {
        throw ValidationError("GPTable: node with both indices zero");
    }
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), n);
    if (it != nodes_.end() && *it == n) return;
    nodes_.insert(it, n);
}

std::optional<GraspParams> find_feasible_grasp(const ObjectModel& object,
                                               const GripperModel& gripper, const Box& table,
                                               const Transform& object_pose, const GraspClass& cls,
                                               int slide_samples) {
    const Box& box = object.box(cls.box_index);
    for (int lat : feasible_lateral_axes(object, gripper, cls)) {
        const double width = grasp_width(object, cls, lat);
        const std::vector<Box> body = gripper.body_boxes(width);
        const int slide_axis = 3 - direction_axis(cls.direction) - lat;
        const double h_slide = box.half_extents[slide_axis];
        for (int k = 0; k < slide_samples; ++k) {
            GraspParams params;
            params.lateral_axis = lat;
            params.slide_offset =
                slide_samples == 1 ? 0.0 : -h_slide + 2.0 * h_slide * k / (slide_samples - 1);
            params.depth_offset = default_depth_offset(object, gripper, cls);
            params.roll = 0.0;
            const Transform pose = gripper_pose(object_pose, object, gripper, cls, params);
            // The gripper must clear the table and must not penetrate the
            // object itself; finger contact on the grasped faces sits inside
            // the contact clearance and passes.
            bool collides = false;
            for (const Box& part : body) {
                if (obb_overlap(part, pose, table, Transform::identity())) {
                    collides = true;
                    break;
                }
                for (const Box& other : object.boxes) {
                    if (obb_overlap(part, pose, other, object_pose)) {
                        collides = true;
                        break;
                    }
                }
                if (collides) break;
            }
            if (!collides) return params;
        }
    }
    return std::nullopt;
}

namespace {

GPTable assemble_table(const ObjectModel& object, const GripperModel& gripper, const Box& table,
                       int slide_samples, bool parallel) {
    const std::vector<PlacementClass> placements = stable_placement_classes(object.boxes);
    const double top = table_top_z(table);
    const Vec3 center = table.local_pose.translation;

    std::vector<Transform> nominal;
    nominal.reserve(placements.size());
    for (const PlacementClass& pc : placements) {
        nominal.push_back(
            object_pose_from_placement(pc, {center.x(), center.y(), 0.0}, top, object, &table));
    }

    const int num_grasp = 6 * object.num_boxes();
    const auto num_tasks = static_cast<std::int64_t>(placements.size()) * num_grasp;
    std::vector<char> feasible(static_cast<std::size_t>(num_tasks), 0);

    auto check = [&](std::int64_t task) {
        const int p = static_cast<int>(task / num_grasp);
        const int g = static_cast<int>(task % num_grasp) + 1;
        const GraspClass cls = decode_grasp_class(g, object.num_boxes());
        if (find_feasible_grasp(object, gripper, table, nominal[p], cls, slide_samples)) {
            feasible[static_cast<std::size_t>(task)] = 1;
        }
    };
    if (parallel) {
        parallel_for(num_tasks, check);
    } else {
        serial_for(num_tasks, check);
    }

    std::vector<TableNode> nodes;
    for (std::int64_t task = 0; task < num_tasks; ++task) {
        if (feasible[static_cast<std::size_t>(task)]) {
            const int p = static_cast<int>(task / num_grasp);
            const int g = static_cast<int>(task % num_grasp) + 1;
            nodes.push_back({placements[p].index, g, QueryTag::None});
        }
    }
    return GPTable(std::move(nodes), static_cast<int>(placements.size()), num_grasp);
}

}  // namespace

GPTable build_table(const ObjectModel& object, const GripperModel& gripper, const Box& table,
                    const TableBuildOptions& options) {
    return assemble_table(object, gripper, table, options.slide_samples, options.parallel);
}

GPTable build_table_reference(const ObjectModel& object, const GripperModel& gripper,
                              const Box& table, int slide_samples) {
    // Plain nested loop over placements, boxes, and directions.
    const std::vector<PlacementClass> placements = stable_placement_classes(object.boxes);
    const double top = table_top_z(table);
    const Vec3 center = table.local_pose.translation;

    std::vector<TableNode> nodes;
    for (const PlacementClass& pc : placements) {
        const Transform pose =
            object_pose_from_placement(pc, {center.x(), center.y(), 0.0}, top, object, &table);
        for (int j = 1; j <= object.num_boxes(); ++j) {
            for (int i = 1; i <= 6; ++i) {
                const GraspClass cls{i, j};
                if (find_feasible_grasp(object, gripper, table, pose, cls, slide_samples)) {
                    nodes.push_back({pc.index, grasp_class_index(i, j), QueryTag::None});
                }
            }
        }
    }
    return GPTable(std::move(nodes), static_cast<int>(placements.size()),
                   6 * object.num_boxes());
}

TableNode attach_query_node(GPTable& table, const QueryClass& q, QueryTag tag) {
    if (q.placement_class && q.grasp_class) {
        const TableNode n{*q.placement_class, *q.grasp_class, QueryTag::None};
        if (!table.contains(n)) table.add_node(n);  // witnessed feasible by the query itself
        return n;
    }
    if (q.placement_class) {
        const TableNode n{*q.placement_class, 0, tag};
        table.add_node(n);
        return n;
    }
    if (q.grasp_class) {
        const TableNode n{0, *q.grasp_class, tag};
        table.add_node(n);
        return n;
    }
    throw UnclassifiableConfigError("query configuration is in neither P nor G");
}

GPTable add_query_nodes(const GPTable& table, const QueryClass& start, const QueryClass& goal,
                        TableNode* start_node, TableNode* goal_node) {
    GPTable out = table;
    const TableNode s = attach_query_node(out, start, QueryTag::Start);
    const TableNode g = attach_query_node(out, goal, QueryTag::Goal);
    if (start_node) *start_node = s;
    if (goal_node) *goal_node = g;
    return out;
}

namespace {

json node_to_json(const TableNode& n) {
    return json{{"placement", n.placement}, {"grasp", n.grasp}, {"tag", static_cast<int>(n.tag)}};
}

}  // namespace

std::string export_table(const GPTable& table, TableFormat format) {
    if (format == TableFormat::Json) {
        json doc;
        doc["num_placement_classes"] = table.num_placement_classes();
        doc["num_grasp_classes"] = table.num_grasp_classes();
        doc["nodes"] = json::array();
        for (const TableNode& n : table.nodes()) doc["nodes"].push_back(node_to_json(n));
        return doc.dump(2) + "\n";
    }
    if (format == TableFormat::GridText) {
        const int P = table.num_placement_classes();
        const int G = table.num_grasp_classes();
        std::ostringstream out;
        for (int g = G; g >= 1; --g) {
            out << (g < 10 ? " " : "") << g << " |";
            for (int p = 1; p <= P; ++p) {
                out << (table.contains({p, g, QueryTag::None}) ? "  o" : "  .");
            }
            out << "\n";
        }
        out << "   +";
        for (int p = 1; p <= P; ++p) out << "---";
        out << "\n    ";
        for (int p = 1; p <= P; ++p) out << (p < 10 ? "  " : " ") << p;
        out << "\n";
        return out.str();
    }
    // svg: grid with row/column connector lines
    const int P = table.num_placement_classes();
    const int G = table.num_grasp_classes();
    const int cell = 24;
    const int margin = 40;
    const int width = margin * 2 + cell * (P + 1);
    const int height = margin * 2 + cell * (G + 1);
    auto px = [&](int p) { return margin + p * cell; };
    auto py = [&](int g) { return height - margin - g * cell; };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    for (int p = 1; p <= P; ++p) {
        int lo = 0, hi = 0;
        for (int g = 1; g <= G; ++g) {
            if (table.contains({p, g, QueryTag::None})) {
                if (lo == 0) lo = g;
                hi = g;
            }
        }
        if (lo != 0 && lo != hi) {
            out << "<line x1=\"" << px(p) << "\" y1=\"" << py(lo) << "\" x2=\"" << px(p)
                << "\" y2=\"" << py(hi) << "\" stroke=\"teal\" stroke-width=\"2\"/>\n";
        }
    }
    for (int g = 1; g <= G; ++g) {
        int lo = 0, hi = 0;
        for (int p = 1; p <= P; ++p) {
            if (table.contains({p, g, QueryTag::None})) {
                if (lo == 0) lo = p;
                hi = p;
            }
        }
        if (lo != 0 && lo != hi) {
            out << "<line x1=\"" << px(lo) << "\" y1=\"" << py(g) << "\" x2=\"" << px(hi)
                << "\" y2=\"" << py(g) << "\" stroke=\"teal\" stroke-width=\"2\"/>\n";
        }
    }
    for (const TableNode& n : table.nodes()) {
        if (n.placement == 0 || n.grasp == 0) continue;
        out << "<circle cx=\"" << px(n.placement) << "\" cy=\"" << py(n.grasp)
            << "\" r=\"4\" fill=\"black\"/>\n";
    }
    for (int p = 1; p <= P; ++p) {
        out << "<text x=\"" << px(p) << "\" y=\"" << height - margin + 16
            << "\" font-size=\"10\" text-anchor=\"middle\">" << p << "</text>\n";
    }
    for (int g = 1; g <= G; ++g) {
        out << "<text x=\"" << margin - 12 << "\" y=\"" << py(g) + 4
            << "\" font-size=\"10\" text-anchor=\"middle\">" << g << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

GPTable import_table_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("import_table: ") + e.what());
    }
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ValidationError("import_table: missing nodes array");
    }
    std::vector<TableNode> nodes;
    for (const json& jn : doc["nodes"]) {
        nodes.push_back({jn.at("placement").get<int>(), jn.at("grasp").get<int>(),
                         static_cast<QueryTag>(jn.value("tag", 0))});
    }
    return GPTable(std::move(nodes), doc.value("num_placement_classes", 0),
                   doc.value("num_grasp_classes", 0));
}

}  // namespace regrasp
