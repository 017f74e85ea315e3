#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "regrasp/harness.hpp"
#include "regrasp/json_io.hpp"

using namespace regrasp;

namespace {

void write_output(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream file(out);
    if (!file) throw ValidationError("cannot write to " + out);
    file << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t seed_with_env_override(std::uint64_t seed) {
    if (const char* env = std::getenv("REGRASP_SEED")) {
        return std::stoull(env);
    }
    return seed;
}

int cmd_table(const std::string& scene_path, const std::string& format,
              const std::string& out) {
    const SceneModel scene = load_scene(scene_path);
    const GPTable table = build_table(scene.world.object, scene.world.gripper, scene.world.table);
    TableFormat fmt = TableFormat::GridText;
    if (format == "svg") fmt = TableFormat::Svg;
    if (format == "json") fmt = TableFormat::Json;
    write_output(export_table(table, fmt), out);
    return 0;
}

int cmd_plan(const std::string& scene_path, const std::string& algo, double tmax, int threshold,
             std::uint64_t seed, const std::string& out, bool dry_run, bool as_json) {
    SceneModel scene = load_scene(scene_path);
    seed = seed_with_env_override(seed);
    if (tmax > 0) scene.planner.t_max = tmax;
    if (threshold > 0) scene.planner.failure_threshold = threshold;

    if (dry_run) {
        // Print the plan set and the guidance graph without motion planning.
        const auto placements = stable_placement_classes(scene.world.object.boxes);
        GPTable table =
            build_table(scene.world.object, scene.world.gripper, scene.world.table);
        const EndpointClass es = classify_endpoint(scene.world, placements, scene.start);
        const EndpointClass eg = classify_endpoint(scene.world, placements, scene.goal);
        TableNode s_node, g_node;
        table = add_query_nodes(table, es.query_class(), eg.query_class(), &s_node, &g_node);
        const int l = shortest_plan_length(table, s_node, g_node);
        int k = l;
        std::vector<TaskPlan> plans;
        while (plans.empty() && k <= static_cast<int>(table.nodes().size())) {
            plans = plans_of_length(table, k, s_node, g_node);
            if (plans.empty()) ++k;
        }
        const GuidanceGraph q = GuidanceGraph::from_plans(plans);
        if (as_json) {
            nlohmann::json doc;
            doc["shortest_plan_length"] = l;
            doc["plan_length"] = k;
            doc["plans"] = nlohmann::json::array();
            for (const TaskPlan& plan : plans) {
                nlohmann::json jp = nlohmann::json::array();
                for (const TableNode& n : plan) {
                    jp.push_back({{"placement", n.placement}, {"grasp", n.grasp}});
                }
                doc["plans"].push_back(jp);
            }
            doc["guidance_nodes"] = q.num_nodes_alive();
            doc["guidance_edges"] = q.num_alive_edges();
            write_output(doc.dump(2) + "\n", out);
        } else {
            std::ostringstream text;
            text << "shortest plan length: " << l << "\n";
            text << "plans of length " << k << " (" << plans.size() << "):\n";
            for (const TaskPlan& plan : plans) {
                text << "  ";
                for (std::size_t i = 0; i < plan.size(); ++i) {
                    if (i) text << " -> ";
                    text << to_string(plan[i]);
                }
                text << "\n";
            }
            text << "guidance graph: " << q.num_nodes_alive() << " nodes, "
                 << q.num_alive_edges() << " edges\n";
            write_output(text.str(), out);
        }
        return 0;
    }

    PlanResult result;
    const RunRecord record = run_single(scene, algo, seed, scene.planner.t_max, &result);
    std::cerr << "status: " << to_string(result.status) << "  prep " << record.prep_time_s
              << " s  plan " << record.plan_time_s << " s\n";
    if (result.status != PlanStatus::Success) return 2;
    std::cerr << "transitions: " << result.stats.transitions << "\n";
    if (!out.empty()) {
        write_output(path_to_json(result.path).dump(2) + "\n", out);
    }
    return 0;
}

int cmd_bench(const std::string& scene_path, const std::string& algos_csv, int trials,
              double budget, std::uint64_t seed, const std::string& csv_out,
              const std::string& md_out, const std::string& records_out) {
    const SceneModel scene = load_scene(scene_path);
    std::vector<std::string> algos;
    std::stringstream ss(algos_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) algos.push_back(item);
    }
    BenchmarkOptions opts;
    opts.trials = trials;
    opts.budget_s = budget;
    opts.seed = seed_with_env_override(seed);
    const auto records = run_benchmark(scene, algos, opts);
    if (!csv_out.empty()) write_output(emit_report_csv(records), csv_out);
    if (!records_out.empty()) write_output(records_to_json(records), records_out);
    write_output(emit_report_markdown(records), md_out);
    return 0;
}

int cmd_export(const std::string& records_path, const std::string& format,
               const std::string& out) {
    const auto records = records_from_json(read_file(records_path));
    if (format == "csv") {
        write_output(emit_report_csv(records), out);
    } else {
        write_output(emit_report_markdown(records), out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pick-and-place regrasp planning toolkit"};
    app.require_subcommand(1);

    std::string scene_path, format = "grid", out, algo = "guided", algos = "guided";
    std::string records_path, csv_out, md_out = "-", records_out;
    double tmax = 0.0, budget = 100.0;
    int threshold = 0, trials = 20;
    std::uint64_t seed = 0;
    bool dry_run = false, as_json = false;

    auto* table = app.add_subcommand("table", "Build and export the grasp-placement table");
    table->add_option("--scene", scene_path, "Scene file")->required();
    table->add_option("--format", format, "grid|svg|json");
    table->add_option("--out", out, "Output path (default stdout)");

    auto* plan = app.add_subcommand("plan", "Plan a pick-and-place manipulation path");
    plan->add_option("--scene", scene_path, "Scene file")->required();
    plan->add_option("--algo", algo, "guided|pmp|dbmp");
    plan->add_option("--tmax", tmax, "Planning budget in seconds");
    plan->add_option("--threshold-n", threshold, "Guidance-edge failure threshold");
    plan->add_option("--seed", seed, "RNG seed (REGRASP_SEED overrides)");
    plan->add_option("--out", out, "Write the solution path as json");
    plan->add_flag("--dry-run", dry_run, "Print task plans and the guidance graph only");
    plan->add_flag("--json", as_json, "Dry-run output as json");

    auto* bench = app.add_subcommand("bench", "Run a seeded planner comparison");
    bench->add_option("--scene", scene_path, "Scene file")->required();
    bench->add_option("--algos", algos, "Comma-separated planner list");
    bench->add_option("--trials", trials, "Trials per planner");
    bench->add_option("--budget", budget, "Per-trial budget in seconds");
    bench->add_option("--seed", seed, "Master seed (REGRASP_SEED overrides)");
    bench->add_option("--csv", csv_out, "Write per-trial csv");
    bench->add_option("--md", md_out, "Write summary markdown (default stdout)");
    bench->add_option("--records", records_out, "Write raw records json");

    auto* exp = app.add_subcommand("export", "Re-emit benchmark records as csv or markdown");
    exp->add_option("--records", records_path, "Records json file")->required();
    exp->add_option("--format", format, "csv|markdown");
    exp->add_option("--out", out, "Output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (table->parsed()) return cmd_table(scene_path, format, out);
        if (plan->parsed()) {
            return cmd_plan(scene_path, algo, tmax, threshold, seed, out, dry_run, as_json);
        }
        if (bench->parsed()) {
            return cmd_bench(scene_path, algos, trials, budget, seed, csv_out, md_out,
                             records_out);
        }
        if (exp->parsed()) return cmd_export(records_path, format, out);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
