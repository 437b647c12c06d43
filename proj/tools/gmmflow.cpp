#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "gmmflow/scene.hpp"
#include "gmmflow/step_solver.hpp"

namespace fs = std::filesystem;

static fs::path output_root(const gmm::ExperimentConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("GMMFLOW_OUTPUT_ROOT")) return env;
    return "gmmflow_out";
}

int main(int argc, char** argv) {
    CLI::App app{"grid-based minimizing movements for multiphase mean curvature flow"};
    app.require_subcommand(1);

    std::string config_path, manifest_path;

    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "experiment config")->required();

    auto* verify = app.add_subcommand("verify", "re-run verifiers against a stored manifest");
    verify->add_option("manifest", manifest_path, "manifest.json of a finished run")->required();

    auto* plot = app.add_subcommand("plotdata", "emit CSV plot data next to a manifest");
    plot->add_option("manifest", manifest_path, "manifest.json of a finished run")->required();

    auto* oracle = app.add_subcommand("oracle", "exhaustive tiny-grid solve for cross-checking");
    oracle->add_option("config", config_path, "experiment config (tiny grid)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto cfg = gmm::ExperimentConfig::load(config_path);
            return gmm::run_experiment(cfg, output_root(cfg));
        }
        if (verify->parsed()) return gmm::verify_manifest(manifest_path);
        if (plot->parsed()) {
            gmm::emit_plot_data(manifest_path);
            return 0;
        }
        if (oracle->parsed()) {
            auto cfg = gmm::ExperimentConfig::load(config_path);
            gmm::LabelField initial = gmm::rasterize_scene(cfg, &std::cerr);
            gmm::Neighborhood nb = gmm::Neighborhood::make(cfg.arity, cfg.grid.h);
            auto H = gmm::build_forcing(cfg);
            for (double lam : cfg.lambdas) {
                auto costs = gmm::compile_unaries(initial, lam, H);
                auto exact = gmm::solve_exhaustive(initial, costs, nb);
                auto fast = initial.num_bounded == 1
                                ? gmm::solve_binary(initial, costs, nb)
                                : gmm::solve_multilabel(initial, costs, nb, 50, cfg.order_seed);
                std::cout << "lambda=" << lam << " exhaustive=" << exact.objective
                          << " solver=" << fast.objective
                          << " gap=" << fast.objective - exact.objective << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
