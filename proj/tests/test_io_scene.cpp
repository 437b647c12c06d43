#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gmmflow/io.hpp"
#include "gmmflow/scene.hpp"
#include "helpers.hpp"

using namespace gmm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gmmflow_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

json disk_config(int n, double r, std::vector<double> lambdas, int steps) {
    return {
        {"grid", {{"width", n}, {"height", n}, {"h", 1.0 / n}}},
        {"phases", json::array({{{"type", "disk"}, {"cx", 0.5}, {"cy", 0.5}, {"r", r}, {"label", 0}}})},
        {"lambdas", lambdas},
        {"steps", steps},
        {"neighborhood", 16},
        {"verifiers", json::array({"energy_descent", "hull_confinement", "sup_displacement"})},
    };
}

}  // namespace

TEST_CASE("label field PGM round trip") {
    TempDir tmp;
    std::mt19937 rng(61);
    auto f = testutil::random_field(16, 12, 0.25, 3, rng);
    save_label_field(f, tmp.path / "field.pgm");
    auto g = load_label_field(tmp.path / "field.pgm");
    CHECK(f == g);
}

TEST_CASE("signed field CSV round trip at full precision") {
    TempDir tmp;
    auto f = testutil::make_disk(16, 16, 0.5, 4.0, 4.0, 2.5);
    auto d = signed_distance(f, 0);
    save_signed_field(d, tmp.path / "d.csv");
    auto d2 = load_signed_field(tmp.path / "d.csv", f.spec);
    for (std::size_t c = 0; c < d.values.size(); ++c) CHECK(d.values[c] == d2.values[c]);
}

TEST_CASE("rasterize_scene: empty, disk area, overlap, out of domain") {
    auto cfg = ExperimentConfig::parse(disk_config(64, 0.2, {10.0}, 1));
    cfg.shapes.clear();
    auto f = rasterize_scene(cfg);
    CHECK(f.phase_cells(f.exterior()) == f.spec.cells());

    auto cfg2 = ExperimentConfig::parse(disk_config(128, 20.0 / 128.0, {10.0}, 1));
    auto f2 = rasterize_scene(cfg2);
    double r = 20.0 / 128.0, h = 1.0 / 128.0;
    double area = f2.phase_cells(0) * h * h;
    CHECK(std::abs(area - 3.14159265358979323846 * r * r) <= 4.0 * 3.14159265358979323846 * r * h);

    json overlap = disk_config(64, 0.2, {10.0}, 1);
    overlap["phases"].push_back({{"type", "disk"}, {"cx", 0.55}, {"cy", 0.5}, {"r", 0.2}, {"label", 1}});
    CHECK_THROWS_AS(rasterize_scene(ExperimentConfig::parse(overlap)), OverlappingShapesError);

    json out = disk_config(64, 0.6, {10.0}, 1);
    CHECK_THROWS_AS(rasterize_scene(ExperimentConfig::parse(out)), ShapeOutOfDomainError);
}

TEST_CASE("rasterize_scene: rectangle and polygon shapes") {
    json cfg = disk_config(32, 0.1, {10.0}, 1);
    cfg["phases"] = json::array({
        {{"type", "rectangle"}, {"x0", 0.1}, {"y0", 0.1}, {"x1", 0.3}, {"y1", 0.2}, {"label", 0}},
        {{"type", "polygon"},
         {"points", json::array({json::array({0.6, 0.6}), json::array({0.9, 0.6}), json::array({0.75, 0.9})})},
         {"label", 1}},
    });
    auto f = rasterize_scene(ExperimentConfig::parse(cfg));
    CHECK(f.phase_cells(0) > 0);
    CHECK(f.phase_cells(1) > 0);
    f.validate();
}

TEST_CASE("run_experiment: stationary scene writes a manifest and passes") {
    TempDir tmp;
    // huge lambda freezes the disk in one step
    auto cfg = ExperimentConfig::parse(disk_config(48, 0.15, {1e6}, 1));
    std::ostringstream log;
    int status = run_experiment(cfg, tmp.path, log);
    CHECK(status == 0);
    bool found = false;
    for (const auto& e : fs::directory_iterator(tmp.path))
        if (fs::exists(e.path() / "manifest.json")) {
            found = true;
            // verify subcommand path and plot data on the stored manifest
            CHECK(verify_manifest(e.path() / "manifest.json", log) == 0);
            emit_plot_data(e.path() / "manifest.json");
            CHECK(fs::exists(e.path() / "area_vs_t.csv"));
            CHECK(fs::exists(e.path() / "discrepancy.csv"));
        }
    CHECK(found);
}

TEST_CASE("run_experiment: deterministic given the config") {
    TempDir tmp1, tmp2;
    // lambda large enough that the disk survives all three steps
    auto cfg = ExperimentConfig::parse(disk_config(48, 0.2, {400.0}, 3));
    std::ostringstream log;
    run_experiment(cfg, tmp1.path, log);
    run_experiment(cfg, tmp2.path, log);
    auto final_state = [](const fs::path& root) {
        for (const auto& e : fs::directory_iterator(root)) {
            auto p = e.path() / "chains" / "lambda_400.000000" / "step_3.pgm";
            if (fs::exists(p)) return load_label_field(p);
        }
        throw std::runtime_error("run output missing");
    };
    CHECK(final_state(tmp1.path) == final_state(tmp2.path));
}

TEST_CASE("emit_plot_data: missing snapshot raises") {
    TempDir tmp;
    json manifest = {{"num_bounded", 1},
                     {"chains", json::array()},
                     {"trajectory",
                      {{"times", json::array({0.0})},
                       {"discrepancy", json::array({0.0})},
                       {"snapshots", json::array({"snapshots/absent.pgm"})}}}};
    std::ofstream(tmp.path / "manifest.json") << manifest.dump();
    CHECK_THROWS_AS(emit_plot_data(tmp.path / "manifest.json"), MissingSnapshotError);
}

TEST_CASE("config hash is stable") {
    CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
    CHECK(fnv1a_hex("abc") != fnv1a_hex("abd"));
}
