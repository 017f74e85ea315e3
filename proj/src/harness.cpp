#include "regrasp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "regrasp/json_io.hpp"
#include "regrasp/parallel.hpp"

namespace regrasp {

using nlohmann::json;

namespace {

Eigen::VectorXd parse_q(const json& j, const std::string& where, int dof) {
    if (!j.is_array()) throw ValidationError(where + ": expected an array of joint values");
    if (static_cast<int>(j.size()) != dof) {
        throw ValidationError(where + ": expected " + std::to_string(dof) + " joint values");
    }
    Eigen::VectorXd q(dof);
    for (int i = 0; i < dof; ++i) q[i] = j[static_cast<std::size_t>(i)].get<double>();
    return q;
}

CompositeConfig parse_endpoint(const json& j, const std::string& where, const WorldModel& world,
                               const std::vector<PlacementClass>& placements) {
    CompositeConfig out;
    out.q = world.robot.home();
    if (j.contains("robot_q_rad")) {
        out.q = parse_q(j.at("robot_q_rad"), where + ".robot_q_rad", world.robot.dof());
    }
    if (!j.contains("object")) throw ValidationError(where + ".object: missing");
    const json& obj = j.at("object");
    if (obj.contains("placement")) {
        const json& pl = obj.at("placement");
        const int cls = pl.value("class", 0);
        if (cls < 1 || cls > static_cast<int>(placements.size())) {
            throw ValidationError(where + ".object.placement.class: out of range");
        }
        PlacementParams params;
        params.x = pl.value("x_m", world.table.local_pose.translation.x());
        params.y = pl.value("y_m", world.table.local_pose.translation.y());
        params.theta = pl.value("theta_rad", 0.0);
        out.object_pose =
            object_pose_from_placement(placements[static_cast<std::size_t>(cls - 1)], params,
                                       world.table_top(), world.object, &world.table);
    } else if (obj.contains("pose")) {
        out.object_pose = parse_pose(obj.at("pose"), where + ".object.pose");
    } else {
        throw ValidationError(where + ".object: needs placement or pose");
    }
    return out;
}

json endpoint_to_json(const CompositeConfig& cfg) {
    json j;
    j["robot_q_rad"] = std::vector<double>(cfg.q.data(), cfg.q.data() + cfg.q.size());
    j["object"] = {{"pose", pose_to_json(cfg.object_pose)}};
    return j;
}

}  // namespace

SceneModel parse_scene_json(const std::string& text, const std::string& where,
                            const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(where + ": " + e.what());
    }

    SceneModel scene;
    scene.name = doc.value("name", "scene");

    if (!doc.contains("robot_file")) throw ValidationError(where + ".robot_file: missing");
    const std::filesystem::path robot_path =
        std::filesystem::path(base_dir) / doc.at("robot_file").get<std::string>();
    if (!std::filesystem::exists(robot_path)) {
        throw ValidationError(where + ".robot_file: file not found: " + robot_path.string());
    }
    scene.robot_file = std::filesystem::weakly_canonical(robot_path).string();
    scene.world.robot = load_robot_json(scene.robot_file);

    if (doc.contains("gripper")) {
        const json& g = doc.at("gripper");
        scene.world.gripper.max_opening = require_positive(g, "max_opening_m", where + ".gripper");
        scene.world.gripper.finger_length =
            require_positive(g, "finger_length_m", where + ".gripper");
        if (g.contains("finger_cross_m")) {
            const auto& a = g.at("finger_cross_m");
            scene.world.gripper.finger_cross = Vec2(a[0].get<double>(), a[1].get<double>());
        }
        if (g.contains("palm_m")) {
            const auto& a = g.at("palm_m");
            scene.world.gripper.palm_dims =
                Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
        }
    }

    if (!doc.contains("object") || !doc.at("object").contains("boxes")) {
        throw ValidationError(where + ".object.boxes: missing");
    }
    std::vector<Box> boxes;
    int bi = 0;
    for (const json& jb : doc.at("object").at("boxes")) {
        boxes.push_back(parse_box(jb, where + ".object.boxes[" + std::to_string(bi++) + "]"));
    }
    scene.world.object = ObjectModel(doc.at("object").value("name", "object"), std::move(boxes));

    if (!doc.contains("table")) throw ValidationError(where + ".table: missing");
    scene.world.table = parse_box(doc.at("table"), where + ".table");

    if (doc.contains("obstacles")) {
        int oi = 0;
        for (const json& jb : doc.at("obstacles")) {
            scene.world.obstacles.push_back(
                parse_box(jb, where + ".obstacles[" + std::to_string(oi++) + "]"));
        }
    }

    const auto placements = stable_placement_classes(scene.world.object.boxes);
    if (!doc.contains("start")) throw ValidationError(where + ".start: missing");
    if (!doc.contains("goal")) throw ValidationError(where + ".goal: missing");
    scene.start = parse_endpoint(doc.at("start"), where + ".start", scene.world, placements);
    scene.goal = parse_endpoint(doc.at("goal"), where + ".goal", scene.world, placements);

    if (doc.contains("planner")) {
        const json& p = doc.at("planner");
        scene.planner.t_max = p.value("t_max_s", scene.planner.t_max);
        scene.planner.failure_threshold =
            p.value("failure_threshold", scene.planner.failure_threshold);
        scene.planner.rrt.step = p.value("rrt_step_rad", scene.planner.rrt.step);
        scene.planner.rrt.max_iterations =
            p.value("rrt_max_iterations", scene.planner.rrt.max_iterations);
        scene.planner.sample_weight_exponent =
            p.value("sample_weight_exponent", scene.planner.sample_weight_exponent);
        scene.planner.seed = p.value("seed", scene.planner.seed);
        scene.planner.delta = p.value("delta", scene.planner.delta);
        scene.planner.ik_seeds = p.value("ik_seeds", scene.planner.ik_seeds);
    }
    if (doc.contains("dbmp")) {
        const json& p = doc.at("dbmp");
        scene.dbmp.rotation_samples = p.value("rotation_samples", scene.dbmp.rotation_samples);
        scene.dbmp.slide_samples = p.value("slide_samples", scene.dbmp.slide_samples);
    }
    scene.pmp.rrt = scene.planner.rrt;
    scene.pmp.t_max = scene.planner.t_max;
    scene.pmp.seed = scene.planner.seed;
    scene.dbmp.rrt = scene.planner.rrt;
    scene.dbmp.t_max = scene.planner.t_max;
    scene.dbmp.seed = scene.planner.seed;
    return scene;
}

SceneModel load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene_json(buf.str(), path,
                            std::filesystem::path(path).parent_path().string());
}

std::string scene_to_json(const SceneModel& scene) {
    json doc;
    doc["name"] = scene.name;
    doc["robot_file"] = scene.robot_file;
    doc["gripper"] = {
        {"max_opening_m", scene.world.gripper.max_opening},
        {"finger_length_m", scene.world.gripper.finger_length},
        {"finger_cross_m",
         {scene.world.gripper.finger_cross.x(), scene.world.gripper.finger_cross.y()}},
        {"palm_m",
         {scene.world.gripper.palm_dims.x(), scene.world.gripper.palm_dims.y(),
          scene.world.gripper.palm_dims.z()}}};
    doc["object"] = {{"name", scene.world.object.name}, {"boxes", json::array()}};
    for (const Box& b : scene.world.object.boxes) doc["object"]["boxes"].push_back(box_to_json(b));
    doc["table"] = box_to_json(scene.world.table);
    doc["obstacles"] = json::array();
    for (const Box& b : scene.world.obstacles) doc["obstacles"].push_back(box_to_json(b));
    doc["start"] = endpoint_to_json(scene.start);
    doc["goal"] = endpoint_to_json(scene.goal);
    doc["planner"] = {{"t_max_s", scene.planner.t_max},
                      {"failure_threshold", scene.planner.failure_threshold},
                      {"rrt_step_rad", scene.planner.rrt.step},
                      {"rrt_max_iterations", scene.planner.rrt.max_iterations},
                      {"sample_weight_exponent", scene.planner.sample_weight_exponent},
                      {"seed", scene.planner.seed}};
    return doc.dump(2) + "\n";
}

json path_to_json(const ManipulationPath& path) {
    json doc;
    doc["domain_length"] = path.domain_length();
    doc["segments"] = json::array();
    for (const SingleModePath& seg : path.segments()) {
        json js;
        js["kind"] = to_string(seg.kind);
        js["waypoints"] = json::array();
        for (const CompositeConfig& w : seg.waypoints) {
            js["waypoints"].push_back(
                {{"q", std::vector<double>(w.q.data(), w.q.data() + w.q.size())},
                 {"object_pose", pose_to_json(w.object_pose)}});
        }
        doc["segments"].push_back(std::move(js));
    }
    return doc;
}

ManipulationPath path_from_json(const json& doc) {
    std::vector<SingleModePath> segments;
    for (const json& js : doc.at("segments")) {
        SingleModePath seg;
        const std::string kind = js.at("kind").get<std::string>();
        if (kind != "transit" && kind != "transfer") {
            throw ValidationError("path segment kind must be transit or transfer");
        }
        seg.kind = kind == "transit" ? PathKind::Transit : PathKind::Transfer;
        for (const json& jw : js.at("waypoints")) {
            CompositeConfig w;
            const auto& qa = jw.at("q");
            w.q.resize(static_cast<Eigen::Index>(qa.size()));
            for (std::size_t i = 0; i < qa.size(); ++i) {
                w.q[static_cast<Eigen::Index>(i)] = qa[i].get<double>();
            }
            w.object_pose = parse_pose(jw.at("object_pose"), "waypoint.object_pose");
            seg.waypoints.push_back(std::move(w));
        }
        segments.push_back(std::move(seg));
    }
    return ManipulationPath(std::move(segments));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    // splitmix64 step over master + stream.
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RunRecord run_single(const SceneModel& scene, const std::string& planner, std::uint64_t seed,
                     double budget_s, PlanResult* result_out) {
    RunRecord record;
    record.planner = planner;
    record.seed = seed;

    PlanResult result;
    if (planner == "guided") {
        PlannerConfig cfg = scene.planner;
        cfg.seed = seed;
        cfg.t_max = budget_s;
        GuidedPlanner p(scene.world, cfg);
        result = p.plan(scene.start, scene.goal);
    } else if (planner == "pmp") {
        PmpConfig cfg = scene.pmp;
        cfg.seed = seed;
        cfg.t_max = budget_s;
        PrimitivePlanner p(scene.world, cfg);
        result = p.plan(scene.start, scene.goal);
    } else if (planner == "dbmp") {
        DbmpConfig cfg = scene.dbmp;
        cfg.seed = seed;
        cfg.t_max = budget_s;
        DiscretizationPlanner p(scene.world, cfg);
        result = p.plan(scene.start, scene.goal);
    } else {
        throw ValidationError("unknown planner: " + planner);
    }

    record.prep_time_s = result.stats.prep_seconds;
    record.plan_time_s = result.stats.plan_seconds;
    record.success = result.status == PlanStatus::Success;
    record.transitions = record.success ? result.stats.transitions : -1;
    if (result_out) *result_out = std::move(result);
    return record;
}

std::vector<RunRecord> run_benchmark(const SceneModel& scene,
                                     const std::vector<std::string>& planners,
                                     const BenchmarkOptions& options) {
    if (options.trials < 1) throw ValidationError("run_benchmark: trials must be >= 1");
    const auto total = static_cast<std::int64_t>(planners.size()) * options.trials;
    std::vector<RunRecord> records(static_cast<std::size_t>(total));

    auto run = [&](std::int64_t idx) {
        const auto p = static_cast<std::size_t>(idx) / static_cast<std::size_t>(options.trials);
        const auto trial = static_cast<std::uint64_t>(idx) %
                           static_cast<std::uint64_t>(options.trials);
        const std::uint64_t seed = derive_seed(options.seed, 1000003ULL * p + trial);
        records[static_cast<std::size_t>(idx)] =
            run_single(scene, planners[p], seed, options.budget_s);
    };
    if (options.parallel) {
        parallel_for(total, run);
    } else {
        serial_for(total, run);
    }
    return records;
}

std::vector<PlannerSummary> summarize(const std::vector<RunRecord>& records) {
    std::vector<PlannerSummary> out;
    for (const RunRecord& r : records) {
        PlannerSummary* s = nullptr;
        for (PlannerSummary& existing : out) {
            if (existing.planner == r.planner) s = &existing;
        }
        if (!s) {
            out.push_back({});
            s = &out.back();
            s->planner = r.planner;
        }
        ++s->trials;
        if (r.success) {
            ++s->successes;
            s->mean_prep_s += r.prep_time_s;
            s->mean_plan_s += r.plan_time_s;
            s->mean_transitions += r.transitions;
        }
    }
    for (PlannerSummary& s : out) {
        s.success_rate = s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
        if (s.successes > 0) {
            s.mean_prep_s /= s.successes;
            s.mean_plan_s /= s.successes;
            s.mean_transitions /= s.successes;
        } else {
            s.mean_prep_s = s.mean_plan_s = s.mean_transitions =
                std::numeric_limits<double>::quiet_NaN();
        }
    }
    // Median plan time over successes.
    for (PlannerSummary& s : out) {
        std::vector<double> times;
        for (const RunRecord& r : records) {
            if (r.planner == s.planner && r.success) times.push_back(r.plan_time_s);
        }
        if (times.empty()) {
            s.median_plan_s = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        std::sort(times.begin(), times.end());
        const std::size_t mid = times.size() / 2;
        s.median_plan_s = times.size() % 2 == 1 ? times[mid]
                                                : 0.5 * (times[mid - 1] + times[mid]);
    }
    return out;
}

std::string emit_report_csv(const std::vector<RunRecord>& records) {
    if (records.empty()) throw ValidationError("emit_report: no records");
    std::ostringstream out;
    out << "planner,seed,prep_time_s,plan_time_s,transitions,success\n";
    for (const RunRecord& r : records) {
        out << r.planner << "," << r.seed << "," << r.prep_time_s << "," << r.plan_time_s << ",";
        if (r.success) out << r.transitions;
        out << "," << (r.success ? "true" : "false") << "\n";
    }
    return out.str();
}

std::string emit_report_markdown(const std::vector<RunRecord>& records) {
    if (records.empty()) throw ValidationError("emit_report: no records");
    const auto summaries = summarize(records);
    std::ostringstream out;
    out << "| planner | prep. time (s.) | plan. time (s.) | # transitions | success rate |\n";
    out << "|---|---|---|---|---|\n";
    out.setf(std::ios::fixed);
    out.precision(2);
    for (const PlannerSummary& s : summaries) {
        out << "| " << s.planner << " | ";
        if (s.successes > 0) {
            out << s.mean_prep_s << " | " << s.mean_plan_s << " | " << s.mean_transitions
                << " | ";
        } else {
            out << "n/a | n/a | n/a | ";
        }
        out << 100.0 * s.success_rate << "% |\n";
    }
    return out.str();
}

std::string records_to_json(const std::vector<RunRecord>& records) {
    json doc = json::array();
    for (const RunRecord& r : records) {
        json j{{"planner", r.planner},
               {"seed", r.seed},
               {"prep_time_s", r.prep_time_s},
               {"plan_time_s", r.plan_time_s},
               {"transitions", r.transitions},
               {"success", r.success}};
        if (!r.path_file.empty()) j["path_file"] = r.path_file;
        doc.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::vector<RunRecord> records_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("records: ") + e.what());
    }
    std::vector<RunRecord> out;
    for (const json& j : doc) {
        RunRecord r;
        r.planner = j.at("planner").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.prep_time_s = j.at("prep_time_s").get<double>();
        r.plan_time_s = j.at("plan_time_s").get<double>();
        r.transitions = j.at("transitions").get<int>();
        r.success = j.at("success").get<bool>();
        r.path_file = j.value("path_file", "");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace regrasp
