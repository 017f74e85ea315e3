#include <chrono>
#include <iomanip>
#include <iostream>

#include "regrasp/harness.hpp"
#include "regrasp/parallel.hpp"

using namespace regrasp;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e18;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string scene_dir = argc > 1 ? argv[1] : "scenes";
    std::cout << "threads: " << max_threads() << "\n\n";
    std::cout << std::left << std::setw(28) << "kernel" << std::setw(14) << "serial (s)"
              << std::setw(14) << "parallel (s)" << "speedup\n";

    for (const char* name : {"box.scene.json", "lshape.scene.json", "chair.scene.json"}) {
        SceneModel scene;
        try {
            scene = load_scene(scene_dir + "/" + std::string(name));
        } catch (const Error&) {
            continue;  // optional scene not present
        }
        const auto& w = scene.world;

        // Table construction: the reference serial loop vs the OpenMP kernel.
        GPTable serial_table, parallel_table;
        const double t_serial = time_best_of(3, [&] {
            serial_table = build_table_reference(w.object, w.gripper, w.table);
        });
        TableBuildOptions opts;
        opts.parallel = true;
        const double t_parallel = time_best_of(3, [&] {
            parallel_table = build_table(w.object, w.gripper, w.table, opts);
        });
        if (serial_table.nodes() != parallel_table.nodes()) {
            std::cerr << "MISMATCH: parallel table differs from the serial reference\n";
            return 1;
        }
        std::cout << std::left << std::setw(28) << (std::string("table ") + scene.name)
                  << std::setw(14) << t_serial << std::setw(14) << t_parallel
                  << t_serial / t_parallel << "\n";
    }

    // Path audit: serial vs OpenMP over one solved path.
    try {
        SceneModel scene = load_scene(scene_dir + "/box.scene.json");
        PlannerConfig cfg = scene.planner;
        cfg.seed = 1;
        cfg.t_max = 60.0;
        GuidedPlanner planner(scene.world, cfg);
        const PlanResult result = planner.plan(scene.start, scene.goal);
        if (result.status == PlanStatus::Success) {
            bool ok_serial = true, ok_parallel = true;
            const double t_serial = time_best_of(3, [&] {
                ok_serial = audit_path(scene.world, result.path, 10, false);
            });
            const double t_parallel = time_best_of(3, [&] {
                ok_parallel = audit_path(scene.world, result.path, 10, true);
            });
            if (ok_serial != ok_parallel) {
                std::cerr << "MISMATCH: parallel audit differs from the serial reference\n";
                return 1;
            }
            std::cout << std::left << std::setw(28) << "path audit box"
                      << std::setw(14) << t_serial << std::setw(14) << t_parallel
                      << t_serial / t_parallel << "\n";
        }
    } catch (const Error&) {
    }
    return 0;
}
