#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gmmflow/flow.hpp"
#include "gmmflow/geometry.hpp"
#include "gmmflow/grid.hpp"
#include "gmmflow/io.hpp"
#include "gmmflow/verify.hpp"

namespace gmm {

struct OverlappingShapesError : std::runtime_error {
    OverlappingShapesError() : std::runtime_error("rasterize_scene: shapes overlap") {}
};
struct ShapeOutOfDomainError : std::runtime_error {
    ShapeOutOfDomainError() : std::runtime_error("rasterize_scene: shape reaches the exterior frame") {}
};
struct MissingSnapshotError : std::runtime_error {
    explicit MissingSnapshotError(const std::string& p)
        : std::runtime_error("missing snapshot: " + p) {}
};

struct Shape {
    enum class Kind { disk, rectangle, polygon, pgm } kind = Kind::disk;
    int label = 0;
    double cx = 0, cy = 0, r = 0;           // disk
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // rectangle
    std::vector<std::pair<double, double>> points;  // polygon
    std::string path;                        // pgm import

    bool covers(double x, double y) const {
        switch (kind) {
            case Kind::disk:
                return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
            case Kind::rectangle:
                return x >= x0 && x <= x1 && y >= y0 && y <= y1;
            case Kind::polygon: {
                bool in = false;
                std::size_t n = points.size();
                for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                    double xi = points[i].first, yi = points[i].second;
                    double xj = points[j].first, yj = points[j].second;
                    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
                }
                return in;
            }
            case Kind::pgm:
                return false;  // handled separately during rasterization
        }
        return false;
    }
};

struct ForcingSpec {
    enum class Kind { none, constant, radial, csv } kind = Kind::none;
    std::vector<double> constants;             // per label, constant mode
    double inside = 0, outside = 0, r = 0;     // radial mode, for phase 0
    std::vector<std::string> csv_paths;        // per label
    double support_radius = 0;                 // B_R of the hypothesis check
};

struct ExperimentConfig {
    GridSpec grid;
    int num_bounded = 1;
    std::vector<Shape> shapes;
    std::vector<double> lambdas;
    std::optional<int> steps;
    std::optional<double> t_final;
    int arity = 16;
    ForcingSpec forcing;
    std::vector<std::string> verifiers;  // enabled checks by name
    std::vector<double> times;           // optional explicit sample times
    std::string output_dir;
    unsigned order_seed = 0;
    json raw;

    static ExperimentConfig parse(const json& j) {
        ExperimentConfig c;
        c.raw = j;
        const auto& g = j.at("grid");
        c.grid = GridSpec(g.at("width").get<int>(), g.at("height").get<int>(), g.at("h").get<double>());
        c.num_bounded = j.value("num_bounded", 0);
        for (const auto& sj : j.value("phases", json::array())) {
            Shape s;
            std::string type = sj.at("type").get<std::string>();
            s.label = sj.at("label").get<int>();
            if (type == "disk") {
                s.kind = Shape::Kind::disk;
                s.cx = sj.at("cx").get<double>();
                s.cy = sj.at("cy").get<double>();
                s.r = sj.at("r").get<double>();
            } else if (type == "rectangle") {
                s.kind = Shape::Kind::rectangle;
                s.x0 = sj.at("x0").get<double>();
                s.y0 = sj.at("y0").get<double>();
                s.x1 = sj.at("x1").get<double>();
                s.y1 = sj.at("y1").get<double>();
            } else if (type == "polygon") {
                s.kind = Shape::Kind::polygon;
                for (const auto& p : sj.at("points")) s.points.emplace_back(p.at(0), p.at(1));
            } else if (type == "pgm") {
                s.kind = Shape::Kind::pgm;
                s.path = sj.at("path").get<std::string>();
            } else {
                throw std::invalid_argument("unknown shape type: " + type);
            }
            c.num_bounded = std::max(c.num_bounded, s.label + 1);
            if (!(s.label >= 0)) throw std::invalid_argument("shape label must be nonnegative");
            c.shapes.push_back(std::move(s));
        }
        if (c.num_bounded < 1) c.num_bounded = 1;
        c.lambdas = j.at("lambdas").get<std::vector<double>>();
        for (double l : c.lambdas)
            if (l < 1.0) throw std::invalid_argument("lambda must be >= 1");
        if (j.contains("steps")) c.steps = j.at("steps").get<int>();
        if (j.contains("t_final")) c.t_final = j.at("t_final").get<double>();
        if (!c.steps && !c.t_final) throw std::invalid_argument("need steps or t_final");
        c.arity = j.value("neighborhood", 16);
        if (j.contains("forcing")) {
            const auto& fj = j.at("forcing");
            std::string kind = fj.at("type").get<std::string>();
            c.forcing.support_radius = fj.value("support_radius", c.grid.diameter());
            if (kind == "constant") {
                c.forcing.kind = ForcingSpec::Kind::constant;
                c.forcing.constants = fj.at("values").get<std::vector<double>>();
            } else if (kind == "radial") {
                c.forcing.kind = ForcingSpec::Kind::radial;
                c.forcing.inside = fj.at("inside").get<double>();
                c.forcing.outside = fj.at("outside").get<double>();
                c.forcing.r = fj.at("radius").get<double>();
            } else if (kind == "csv") {
                c.forcing.kind = ForcingSpec::Kind::csv;
                c.forcing.csv_paths = fj.at("paths").get<std::vector<std::string>>();
            } else {
                throw std::invalid_argument("unknown forcing type: " + kind);
            }
        }
        c.verifiers = j.value("verifiers", std::vector<std::string>{"energy_descent", "hull_confinement"});
        c.times = j.value("times", std::vector<double>{});
        c.output_dir = j.value("output_dir", "");
        c.order_seed = j.value("order_seed", 0u);
        return c;
    }

    static ExperimentConfig load(const std::filesystem::path& p) {
        std::ifstream is(p);
        if (!is) throw std::runtime_error("cannot open config " + p.string());
        return parse(json::parse(is));
    }
};

/// Cell label = shape covering its center; exterior elsewhere. Overlap between
/// shapes with different labels is a configuration error, as is any shape
/// reaching the one-cell frame.
inline LabelField rasterize_scene(const ExperimentConfig& c, std::ostream* warn = nullptr) {
    LabelField f(c.grid, c.num_bounded);
    for (const auto& s : c.shapes) {
        if (s.kind == Shape::Kind::pgm) {
            LabelField imported = load_label_field(s.path);
            if (!(imported.spec == c.grid))
                throw std::invalid_argument("rasterize_scene: imported PGM grid mismatch");
            for (int cell = 0; cell < c.grid.cells(); ++cell)
                if (imported.labels[static_cast<std::size_t>(cell)] < imported.num_bounded) {
                    if (f.labels[static_cast<std::size_t>(cell)] != f.exterior())
                        throw OverlappingShapesError{};
                    int i = cell % c.grid.width, j = cell / c.grid.width;
                    if (c.grid.on_frame(i, j)) throw ShapeOutOfDomainError{};
                    f.labels[static_cast<std::size_t>(cell)] =
                        imported.labels[static_cast<std::size_t>(cell)];
                }
            continue;
        }
        for (int j = 0; j < c.grid.height; ++j)
            for (int i = 0; i < c.grid.width; ++i) {
                if (!s.covers(c.grid.cx(i), c.grid.cy(j))) continue;
                if (c.grid.on_frame(i, j)) throw ShapeOutOfDomainError{};
                int cell = c.grid.index(i, j);
                if (f.labels[static_cast<std::size_t>(cell)] != f.exterior())
                    throw OverlappingShapesError{};
                f.labels[static_cast<std::size_t>(cell)] = static_cast<std::uint8_t>(s.label);
            }
    }
    if (warn) {
        for (int j = 0; j < c.grid.height; ++j)
            for (int i = 0; i < c.grid.width; ++i) {
                bool second_ring = (i == 1 || j == 1 || i == c.grid.width - 2 || j == c.grid.height - 2);
                if (second_ring && f.label(i, j) < f.num_bounded) {
                    *warn << "warning: bounded phase touches the second ring; "
                             "hull confinement may clip against the domain\n";
                    j = c.grid.height;
                    break;
                }
            }
    }
    return f;
}

inline std::optional<ForcingField> build_forcing(const ExperimentConfig& c) {
    if (c.forcing.kind == ForcingSpec::Kind::none) return std::nullopt;
    ForcingField H;
    H.spec = c.grid;
    H.radius = c.forcing.support_radius;
    int nl = c.num_bounded + 1;
    H.values.assign(static_cast<std::size_t>(nl),
                    std::vector<double>(static_cast<std::size_t>(c.grid.cells()), 0.0));
    if (c.forcing.kind == ForcingSpec::Kind::constant) {
        for (int l = 0; l < nl && l < static_cast<int>(c.forcing.constants.size()); ++l)
            H.values[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(c.grid.cells()),
                                                         c.forcing.constants[static_cast<std::size_t>(l)]);
    } else if (c.forcing.kind == ForcingSpec::Kind::radial) {
        double ccx = c.grid.width * c.grid.h / 2.0, ccy = c.grid.height * c.grid.h / 2.0;
        for (int j = 0; j < c.grid.height; ++j)
            for (int i = 0; i < c.grid.width; ++i) {
                double rr = std::hypot(c.grid.cx(i) - ccx, c.grid.cy(j) - ccy);
                H.values[0][static_cast<std::size_t>(c.grid.index(i, j))] =
                    rr <= c.forcing.r ? c.forcing.inside : c.forcing.outside;
            }
    } else {
        for (int l = 0; l < nl && l < static_cast<int>(c.forcing.csv_paths.size()); ++l) {
            SignedField sf = load_signed_field(c.forcing.csv_paths[static_cast<std::size_t>(l)], c.grid);
            H.values[static_cast<std::size_t>(l)] = std::move(sf.values);
        }
    }
    H.validate();
    return H;
}

namespace detail {

inline bool enabled(const ExperimentConfig& c, const std::string& name) {
    for (const auto& v : c.verifiers)
        if (v == name) return true;
    return false;
}

}  // namespace detail

/// Runs the chains, extracts the trajectory, applies the enabled verifiers and
/// persists everything under one hash-stamped directory.
/// Returns 0 iff all enabled verifiers pass.
inline int run_experiment(const ExperimentConfig& c, const std::filesystem::path& out_root,
                          std::ostream& log = std::cout) {
    namespace fs = std::filesystem;
    LabelField initial = rasterize_scene(c, &log);
    Neighborhood nb = Neighborhood::make(c.arity, c.grid.h);
    std::optional<ForcingField> H = build_forcing(c);

    double lam_max = *std::max_element(c.lambdas.begin(), c.lambdas.end());
    double T = c.t_final ? *c.t_final : *c.steps / lam_max;

    std::vector<ChainRecord> chains;
    for (double lam : c.lambdas) {
        int steps = c.steps ? *c.steps : static_cast<int>(std::ceil(lam * T)) + 1;
        chains.push_back(run_chain(initial, lam, steps, nb, H, 50, c.order_seed));
        log << "chain lambda=" << lam << ": " << chains.back().states.size() - 1 << " steps";
        if (chains.back().extinction_step) log << ", extinct at k=" << *chains.back().extinction_step;
        log << "\n";
    }

    std::vector<double> times = c.times;
    if (times.empty())
        for (int m = 0; m <= 8; ++m) times.push_back(T * m / 8.0);
    Trajectory traj = extract_gmm(chains, times);

    std::vector<VerifierReport> reports;
    auto& big = chains[static_cast<std::size_t>(
        std::max_element(c.lambdas.begin(), c.lambdas.end()) - c.lambdas.begin())];
    for (auto& ch : chains) {
        if (detail::enabled(c, "energy_descent") && !ch.forced)
            reports.push_back(check_energy_descent(ch, nb));
        if (detail::enabled(c, "hull_confinement")) reports.push_back(check_hull_confinement(ch));
        if (detail::enabled(c, "sup_displacement")) reports.push_back(check_sup_displacement(ch));
        if (detail::enabled(c, "forced_descent") && ch.forced)
            reports.push_back(check_forced_descent(ch, *H, nb));
    }
    if (detail::enabled(c, "density")) reports.push_back(check_density(big));
    if (detail::enabled(c, "holder")) reports.push_back(check_holder(traj));
    if (detail::enabled(c, "small_time"))
        reports.push_back(check_small_time_consistency(initial, c.lambdas, nb));
    if (detail::enabled(c, "monotone_distance") && c.num_bounded >= 2)
        reports.push_back(check_monotone_distance(big));
    if (detail::enabled(c, "disjointness") && c.num_bounded >= 2) {
        double eps0 = min_pairwise_distance(initial);
        reports.push_back(check_disjointness(big, eps0));
    }
    if (detail::enabled(c, "decoupling") && c.num_bounded >= 2) {
        std::vector<ChainRecord> per_phase;
        for (int l = 0; l < c.num_bounded; ++l) {
            LabelField single(c.grid, 1);
            for (int cell = 0; cell < c.grid.cells(); ++cell)
                single.labels[static_cast<std::size_t>(cell)] =
                    initial.labels[static_cast<std::size_t>(cell)] == l ? 0 : 1;
            per_phase.push_back(
                run_chain(single, big.lambda, static_cast<int>(big.states.size()) - 1, nb));
        }
        reports.push_back(check_decoupling(big, per_phase, nb));
    }
    if (detail::enabled(c, "shrinking_disk")) {
        double r0 = 0.0;
        for (const auto& s : c.shapes)
            if (s.kind == Shape::Kind::disk) r0 = std::max(r0, s.r);
        reports.push_back(check_shrinking_disk(traj, r0));
    }

    // persistence
    std::string cfg_text = c.raw.dump(2);
    std::string hash = fnv1a_hex(cfg_text);
    auto stamp = std::chrono::system_clock::now().time_since_epoch().count();
    fs::path dir = out_root / (std::to_string(stamp) + "-" + hash);
    fs::create_directories(dir / "chains");
    fs::create_directories(dir / "snapshots");
    std::ofstream(dir / "config.json") << cfg_text << "\n";

    json manifest;
    manifest["config_hash"] = hash;
    manifest["config"] = "config.json";
    manifest["grid"] = {{"width", c.grid.width}, {"height", c.grid.height}, {"h", c.grid.h}};
    manifest["num_bounded"] = c.num_bounded;
    manifest["neighborhood"] = c.arity;
    manifest["verifiers"] = c.verifiers;
    json jchains = json::array();
    for (const auto& ch : chains) {
        json jc;
        jc["lambda"] = ch.lambda;
        jc["forced"] = ch.forced;
        if (ch.extinction_step) jc["extinction_step"] = *ch.extinction_step;
        json jstates = json::array(), jen = json::array();
        fs::path cdir = dir / "chains" / ("lambda_" + std::to_string(ch.lambda));
        fs::create_directories(cdir);
        for (std::size_t k = 0; k < ch.states.size(); ++k) {
            fs::path p = cdir / ("step_" + std::to_string(k) + ".pgm");
            save_label_field(ch.states[k], p);
            jstates.push_back(fs::relative(p, dir).string());
        }
        for (std::size_t k = 0; k < ch.energies.size(); ++k) {
            json je = to_json(ch.energies[k]);
            je["moved_area"] = ch.moved_areas[k];
            je["sup_displacement"] = ch.sup_displacements[k];
            jen.push_back(je);
        }
        jc["states"] = jstates;
        jc["energies"] = jen;
        jchains.push_back(jc);
    }
    manifest["chains"] = jchains;
    json jtraj;
    jtraj["times"] = traj.times;
    jtraj["discrepancy"] = traj.discrepancy;
    if (traj.extinction_time) jtraj["extinction_time"] = *traj.extinction_time;
    json jsnaps = json::array();
    for (std::size_t m = 0; m < traj.snapshots.size(); ++m) {
        fs::path p = dir / "snapshots" / ("t_" + std::to_string(m) + ".pgm");
        save_label_field(traj.snapshots[m], p);
        jsnaps.push_back(fs::relative(p, dir).string());
    }
    jtraj["snapshots"] = jsnaps;
    manifest["trajectory"] = jtraj;

    json jreps = json::array();
    bool all_pass = true;
    log << "---- verifier summary ----\n";
    for (const auto& r : reports) {
        jreps.push_back(to_json(r));
        all_pass = all_pass && r.pass;
        log << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.measured.size() << " checks, "
            << r.skipped.size() << " skipped)\n";
    }
    manifest["reports"] = jreps;
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
    log << "outputs: " << dir.string() << "\n";
    return all_pass ? 0 : 1;
}

/// Reconstructs the chains recorded in a manifest (states from PGM snapshots,
/// per-step diagnostics from the manifest itself).
inline std::vector<ChainRecord> load_manifest_chains(const std::filesystem::path& manifest_path,
                                                     json* out_manifest = nullptr) {
    namespace fs = std::filesystem;
    std::ifstream is(manifest_path);
    if (!is) throw std::runtime_error("cannot open manifest " + manifest_path.string());
    json manifest = json::parse(is);
    fs::path dir = manifest_path.parent_path();
    std::vector<ChainRecord> chains;
    for (const auto& jc : manifest.at("chains")) {
        ChainRecord ch;
        ch.lambda = jc.at("lambda").get<double>();
        ch.forced = jc.value("forced", false);
        if (jc.contains("extinction_step")) ch.extinction_step = jc.at("extinction_step").get<int>();
        for (const auto& rel : jc.at("states")) {
            fs::path p = dir / rel.get<std::string>();
            if (!fs::exists(p)) throw MissingSnapshotError(p.string());
            ch.states.push_back(load_label_field(p));
        }
        for (const auto& je : jc.at("energies")) {
            EnergyBreakdown e;
            e.perimeter = je.at("perimeter").get<double>();
            e.transport = je.at("transport").get<double>();
            e.forcing = je.at("forcing").get<double>();
            e.lambda = je.at("lambda").get<double>();
            e.total = je.at("total").get<double>();
            ch.energies.push_back(e);
            ch.moved_areas.push_back(je.at("moved_area").get<double>());
            ch.sup_displacements.push_back(je.at("sup_displacement").get<double>());
        }
        chains.push_back(std::move(ch));
    }
    if (out_manifest) *out_manifest = std::move(manifest);
    return chains;
}

/// Re-runs the chain-level verifiers recorded in a manifest against the
/// persisted states. Returns 0 iff everything passes.
inline int verify_manifest(const std::filesystem::path& manifest_path, std::ostream& log = std::cout) {
    json manifest;
    auto chains = load_manifest_chains(manifest_path, &manifest);
    Neighborhood nb = Neighborhood::make(manifest.value("neighborhood", 16),
                                         manifest.at("grid").at("h").get<double>());
    auto verifiers = manifest.value("verifiers", std::vector<std::string>{});
    auto on = [&](const std::string& n) {
        return std::find(verifiers.begin(), verifiers.end(), n) != verifiers.end();
    };
    std::vector<VerifierReport> reports;
    for (auto& ch : chains) {
        if (on("energy_descent") && !ch.forced) reports.push_back(check_energy_descent(ch, nb));
        if (on("hull_confinement")) reports.push_back(check_hull_confinement(ch));
        if (on("sup_displacement")) reports.push_back(check_sup_displacement(ch));
        if (on("monotone_distance") && ch.states[0].num_bounded >= 2)
            reports.push_back(check_monotone_distance(ch));
        if (on("density")) reports.push_back(check_density(ch));
    }
    bool all_pass = true;
    log << "---- verifier summary ----\n";
    for (const auto& r : reports) {
        all_pass = all_pass && r.pass;
        log << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.measured.size() << " checks, "
            << r.skipped.size() << " skipped)\n";
    }
    return all_pass ? 0 : 1;
}

/// area-vs-t, perimeter-vs-k, Hoelder pairs and cross-lambda discrepancy CSVs
/// next to the manifest.
inline void emit_plot_data(const std::filesystem::path& manifest_path) {
    namespace fs = std::filesystem;
    std::ifstream is(manifest_path);
    if (!is) throw std::runtime_error("cannot open manifest " + manifest_path.string());
    json manifest = json::parse(is);
    fs::path dir = manifest_path.parent_path();
    int nb = manifest.at("num_bounded").get<int>();

    auto load_snap = [&](const std::string& rel) {
        fs::path p = dir / rel;
        if (!fs::exists(p)) throw MissingSnapshotError(p.string());
        return load_label_field(p);
    };

    const auto& jtraj = manifest.at("trajectory");
    auto times = jtraj.at("times").get<std::vector<double>>();
    auto snaps = jtraj.at("snapshots").get<std::vector<std::string>>();
    if (snaps.empty()) throw MissingSnapshotError("(manifest lists no snapshots)");
    {
        std::ofstream os(dir / "area_vs_t.csv");
        os << "t";
        for (int l = 0; l < nb; ++l) os << ",area_phase" << l;
        os << "\n" << std::setprecision(17);
        for (std::size_t m = 0; m < times.size(); ++m) {
            LabelField f = load_snap(snaps[m]);
            os << times[m];
            for (int l = 0; l < nb; ++l) os << "," << f.phase_cells(l) * f.spec.h * f.spec.h;
            os << "\n";
        }
    }
    {
        std::ofstream os(dir / "discrepancy.csv");
        os << "t,delta\n" << std::setprecision(17);
        auto disc = jtraj.at("discrepancy").get<std::vector<double>>();
        for (std::size_t m = 0; m < times.size(); ++m) os << times[m] << "," << disc[m] << "\n";
    }
    for (const auto& jc : manifest.at("chains")) {
        double lam = jc.at("lambda").get<double>();
        std::ofstream os(dir / ("perimeter_vs_k_lambda_" + std::to_string(lam) + ".csv"));
        os << "k,perimeter\n" << std::setprecision(17);
        int k = 1;
        for (const auto& je : jc.at("energies"))
            os << k++ << "," << je.at("perimeter").get<double>() << "\n";
    }
    {
        std::ofstream os(dir / "holder_pairs.csv");
        os << "log_gap,log_symdiff\n" << std::setprecision(17);
        for (std::size_t i = 0; i < times.size(); ++i) {
            LabelField a = load_snap(snaps[i]);
            for (std::size_t j = i + 1; j < times.size(); ++j) {
                double gap = std::abs(times[j] - times[i]);
                if (gap == 0.0 || gap >= 1.0) continue;
                double diff = symmetric_difference_volume(a, load_snap(snaps[j]));
                if (diff <= 0.0) continue;
                os << std::log(gap) << "," << std::log(diff) << "\n";
            }
        }
    }
}

}  // namespace gmm
