#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "vortexlab/experiment.hpp"

using vortexlab::experiment::ExperimentConfig;
using vortexlab::experiment::ExperimentResult;

namespace {

void print_summary(const ExperimentResult& result) {
    for (const auto& row : result.summary)
        std::printf("%-34s value=%.6g target=%.6g tol=%.6g  %s\n", row.name.c_str(),
                    row.value, row.target, row.tolerance,
                    row.pass ? "PASS" : "FAIL");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vortexlab: point-vortex dynamics, Gaussian-vortex deformation "
                 "profiles and direct simulation of slightly viscous planar flows"};
    app.require_subcommand(1);
    app.fallthrough(); // accept --config and friends after the subcommand

    std::string config_path;
    std::size_t threads = 1;
    unsigned seed = 12345;
    app.add_option("--config", config_path, "experiment configuration file")
        ->required();
    app.add_option("--threads", threads, "worker threads for independent runs");
    app.add_option("--seed", seed, "seed for randomized property spot-checks");

    auto* pv = app.add_subcommand("pv", "integrate the center trajectories only");
    auto* profiles =
        app.add_subcommand("profiles", "dump deformation profiles at the horizon");
    auto* expand =
        app.add_subcommand("expand", "residuum remainder scaling sweep");
    auto* simulate =
        app.add_subcommand("simulate", "direct simulations and snapshots");
    auto* analyze =
        app.add_subcommand("analyze", "extract profiles and fit convergence rates");
    auto* reproduce =
        app.add_subcommand("reproduce", "full pipeline with summary verdicts");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig config = ExperimentConfig::parse_file(config_path);
        if (pv->parsed()) {
            vortexlab::experiment::stage_trajectories(config);
        } else if (profiles->parsed()) {
            vortexlab::experiment::stage_profiles(config);
        } else if (expand->parsed()) {
            vortexlab::experiment::stage_expand(config, seed);
        } else if (simulate->parsed()) {
            vortexlab::experiment::stage_simulate(config, threads);
        } else if (analyze->parsed()) {
            print_summary(vortexlab::experiment::stage_analyze(config));
        } else if (reproduce->parsed()) {
            print_summary(vortexlab::experiment::run_experiment(config, threads, seed));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
