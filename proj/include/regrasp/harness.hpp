#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "regrasp/baselines.hpp"

namespace regrasp {

/// A fully resolved planning scene: the world, the query endpoints, and the
/// planner settings the scene file carries.
struct SceneModel {
    std::string name;
    std::string robot_file;  // resolved path
    WorldModel world;
    CompositeConfig start;
    CompositeConfig goal;
    PlannerConfig planner;
    DbmpConfig dbmp;
    PmpConfig pmp;
};

// Loads and validates a scene file; robot_file paths resolve relative to the
// scene's directory. Throws ParseError / ValidationError with field paths.
SceneModel load_scene(const std::string& path);
SceneModel parse_scene_json(const std::string& text, const std::string& where,
                            const std::string& base_dir);

// Serialization used by the round-trip tests and the CLI.
std::string scene_to_json(const SceneModel& scene);

nlohmann::json path_to_json(const ManipulationPath& path);
ManipulationPath path_from_json(const nlohmann::json& doc);

/// One benchmark trial.
struct RunRecord {
    std::string planner;
    std::uint64_t seed = 0;
    double prep_time_s = 0.0;
    double plan_time_s = 0.0;
    int transitions = -1;  // meaningful only when success
    bool success = false;
    std::string path_file;  // set when the solution was exported
};

struct PlannerSummary {
    std::string planner;
    int trials = 0;
    int successes = 0;
    double success_rate = 0.0;
    // Means over successful runs; NaN when there are none.
    double mean_prep_s = 0.0;
    double mean_plan_s = 0.0;
    double mean_transitions = 0.0;
    double median_plan_s = 0.0;
};

struct BenchmarkOptions {
    int trials = 20;
    double budget_s = 100.0;
    std::uint64_t seed = 0;
    bool parallel = true;
};

// Runs `trials` seeded runs per planner name ("guided", "pmp", "dbmp").
// Per-trial seeds derive deterministically from the master seed; records come
// back in (planner, trial) order regardless of scheduling.
std::vector<RunRecord> run_benchmark(const SceneModel& scene,
                                     const std::vector<std::string>& planners,
                                     const BenchmarkOptions& options);

std::vector<PlannerSummary> summarize(const std::vector<RunRecord>& records);

std::string emit_report_csv(const std::vector<RunRecord>& records);
std::string emit_report_markdown(const std::vector<RunRecord>& records);

std::string records_to_json(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_json(const std::string& text);

// Single run of one named planner on a scene with an explicit seed/budget.
RunRecord run_single(const SceneModel& scene, const std::string& planner, std::uint64_t seed,
                     double budget_s, PlanResult* result_out = nullptr);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace regrasp
