#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gmmflow/energy.hpp"
#include "gmmflow/geometry.hpp"
#include "gmmflow/grid.hpp"
#include "gmmflow/step_solver.hpp"

namespace gmm {

struct InsufficientStepsError : std::runtime_error {
    InsufficientStepsError() : std::runtime_error("extract_gmm: chain too short for requested time") {}
};
struct DegenerateFitError : std::runtime_error {
    DegenerateFitError() : std::runtime_error("holder_modulus: all pairwise differences vanish") {}
};

/// The discrete chain L(lambda, k); state k lives at time k/lambda.
struct ChainRecord {
    double lambda = 1.0;
    std::vector<LabelField> states;           // index k; states[0] is the initial partition
    std::vector<EnergyBreakdown> energies;    // energies[k] relative to states[k-1], k >= 1
    std::vector<double> moved_areas;          // per step k >= 1
    std::vector<double> sup_displacements;    // per step k >= 1
    std::optional<int> extinction_step;       // first k with all bounded phases empty
    bool forced = false;

    double extinction_time() const {
        if (!extinction_step) return std::numeric_limits<double>::infinity();
        return (*extinction_step + 0.5) / lambda;  // midpoint of the extinguishing step
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<LabelField> snapshots;
    std::vector<double> lambdas;       // source chains, ascending
    std::vector<double> discrepancy;   // max cross-lambda symmetric difference per time
    std::optional<double> extinction_time;
};

/// Max distance, measured on prev, over cells that left any phase.
inline double sup_displacement(const LabelField& prev, const LabelField& next) {
    if (!(prev.spec == next.spec)) throw std::invalid_argument("sup_displacement: spec mismatch");
    double best = 0.0;
    for (int l = 0; l <= prev.num_bounded; ++l) {
        bool left = false;
        for (int c = 0; c < prev.spec.cells(); ++c)
            if (prev.labels[static_cast<std::size_t>(c)] == l &&
                next.labels[static_cast<std::size_t>(c)] != l) {
                left = true;
                break;
            }
        if (!left) continue;
        SignedField d = signed_distance(prev, l);  // phase lost cells, so boundary is nonempty
        for (int c = 0; c < prev.spec.cells(); ++c)
            if (prev.labels[static_cast<std::size_t>(c)] == l &&
                next.labels[static_cast<std::size_t>(c)] != l)
                best = std::max(best, std::abs(d.values[static_cast<std::size_t>(c)]));
    }
    return best;
}

/// Iterates the minimizing-movement step from the initial partition. Stops
/// early once every bounded phase is empty and records the extinction step.
inline ChainRecord run_chain(const LabelField& initial, double lambda, int steps,
                             const Neighborhood& nb,
                             const std::optional<ForcingField>& H = std::nullopt,
                             int max_sweeps = 50, unsigned order_seed = 0) {
    if (lambda < 1.0) throw std::invalid_argument("run_chain: lambda must be >= 1");
    initial.validate();
    ChainRecord rec;
    rec.lambda = lambda;
    rec.forced = H.has_value();
    rec.states.push_back(initial);
    auto all_empty = [](const LabelField& f) {
        return f.phase_cells(f.exterior()) == f.spec.cells();
    };
    if (all_empty(initial)) rec.extinction_step = 0;
    for (int k = 1; k <= steps; ++k) {
        const LabelField& prev = rec.states.back();
        if (rec.extinction_step) break;
        UnaryCosts costs = compile_unaries(prev, lambda, H);
        StepResult st = prev.num_bounded == 1 ? solve_binary(prev, costs, nb)
                                              : solve_multilabel(prev, costs, nb, max_sweeps, order_seed);
        rec.energies.push_back(st.energy);
        rec.moved_areas.push_back(st.moved_area);
        rec.sup_displacements.push_back(sup_displacement(prev, st.minimizer));
        rec.states.push_back(std::move(st.minimizer));
        if (all_empty(rec.states.back())) rec.extinction_step = k;
    }
    return rec;
}

/// State at time t: states[floor(lambda t)], held constant past extinction.
inline const LabelField& chain_state_at(const ChainRecord& chain, double t) {
    long long k = static_cast<long long>(std::floor(chain.lambda * t + 1e-12));
    if (k >= static_cast<long long>(chain.states.size())) {
        if (chain.extinction_step) return chain.states.back();
        throw InsufficientStepsError{};
    }
    return chain.states[static_cast<std::size_t>(k)];
}

/// Reads the trajectory off the largest-lambda chain and records the
/// cross-lambda discrepancy as a convergence diagnostic.
inline Trajectory extract_gmm(const std::vector<ChainRecord>& chains, const std::vector<double>& times) {
    if (chains.empty()) throw std::invalid_argument("extract_gmm: no chains");
    std::size_t best = 0;
    for (std::size_t i = 1; i < chains.size(); ++i)
        if (chains[i].lambda > chains[best].lambda) best = i;
    for (const auto& ch : chains)
        if (!(ch.states.front() == chains[best].states.front()))
            throw std::invalid_argument("extract_gmm: chains disagree on the initial partition");
    Trajectory traj;
    for (const auto& ch : chains) traj.lambdas.push_back(ch.lambda);
    if (chains[best].extinction_step) traj.extinction_time = chains[best].extinction_time();
    for (double t : times) {
        traj.times.push_back(t);
        traj.snapshots.push_back(chain_state_at(chains[best], t));
        double delta = 0.0;
        for (std::size_t i = 0; i < chains.size(); ++i)
            for (std::size_t j = i + 1; j < chains.size(); ++j)
                delta = std::max(delta, symmetric_difference_volume(chain_state_at(chains[i], t),
                                                                   chain_state_at(chains[j], t)));
        traj.discrepancy.push_back(delta);
    }
    return traj;
}

struct HolderFit {
    double constant = 0.0;  // exp(intercept)
    double exponent = 0.0;  // log-log slope
    int pairs = 0;
};

/// Least-squares fit of log |M(t) Delta M(t')| against log |t - t'| over all
/// snapshot pairs with a nonzero difference.
inline HolderFit holder_modulus(const Trajectory& traj) {
    if (traj.times.size() < 6) throw std::invalid_argument("holder_modulus: need at least 6 samples");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        for (std::size_t j = i + 1; j < traj.times.size(); ++j) {
            double gap = std::abs(traj.times[j] - traj.times[i]);
            if (gap == 0.0 || gap >= 1.0) continue;
            double diff = symmetric_difference_volume(traj.snapshots[i], traj.snapshots[j]);
            if (diff <= 0.0) continue;
            lx.push_back(std::log(gap));
            ly.push_back(std::log(diff));
        }
    if (lx.size() < 2) throw DegenerateFitError{};
    double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw DegenerateFitError{};
    HolderFit fit;
    fit.exponent = (n * sxy - sx * sy) / denom;
    fit.constant = std::exp((sy - fit.exponent * sx) / n);
    fit.pairs = static_cast<int>(lx.size());
    return fit;
}

}  // namespace gmm
