#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmmflow/energy.hpp"
#include "gmmflow/geometry.hpp"
#include "gmmflow/grid.hpp"
#include "gmmflow/maxflow.hpp"

namespace gmm {

struct TooLargeError : std::runtime_error {
    TooLargeError() : std::runtime_error("solve_exhaustive: state space exceeds limit") {}
};

enum class SolverKind { exact_cut, expansion, exhaustive };

struct StepResult {
    LabelField minimizer;
    EnergyBreakdown energy;   // relative to the previous state a
    double objective = 0.0;   // unary_total + partition perimeter (the solved functional)
    double moved_area = 0.0;  // |B Delta A|
    SolverKind solver = SolverKind::exact_cut;
    int sweeps = 0;
    bool converged = true;
};

namespace detail {

/// Sum of Crofton weights over stencil edges with differing labels. Equals
/// partition_perimeter: every crossing edge separates exactly two phases.
inline double potts_pairwise(const LabelField& b, const Neighborhood& nb) {
    const GridSpec& s = b.spec;
    double per = 0.0;
    for (const auto& e : nb.half_edges)
        for (int j = 0; j < s.height; ++j) {
            int j2 = j + e.dy;
            if (j2 < 0 || j2 >= s.height) continue;
            for (int i = 0; i < s.width; ++i) {
                int i2 = i + e.dx;
                if (i2 < 0 || i2 >= s.width) continue;
                if (b.labels[static_cast<std::size_t>(s.index(i, j))] !=
                    b.labels[static_cast<std::size_t>(s.index(i2, j2))])
                    per += e.weight;
            }
        }
    const int ext = b.exterior();
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i)
            if (b.label(i, j) != ext) per += exterior_edge_weight(s, nb, i, j);
    return per;
}

inline double potts_objective(const LabelField& b, const UnaryCosts& costs, const Neighborhood& nb) {
    return unary_total(costs, b) + potts_pairwise(b, nb);
}

/// Replaces bounded labels outside the hull mask of a by the exterior label.
inline LabelField restrict_to_hull_mask(const LabelField& candidate, const std::vector<char>& mask) {
    LabelField out = candidate;
    for (int c = 0; c < out.spec.cells(); ++c)
        if (!mask[static_cast<std::size_t>(c)] && out.labels[static_cast<std::size_t>(c)] < out.num_bounded)
            out.labels[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(out.exterior());
    return out;
}

inline StepResult finalize(LabelField b, const LabelField& a, const UnaryCosts& costs,
                           const Neighborhood& nb, SolverKind kind, int sweeps, bool converged) {
    StepResult r;
    if (a.phase_cells(a.exterior()) == a.spec.cells()) {
        r.minimizer = std::move(b);  // all-exterior previous state: no hull to clip against
    } else {
        LabelField clipped = restrict_to_hull_mask(b, convex_hull_mask(a));
        // clipping against the dilated convex hull never raises the energy
        r.minimizer = potts_objective(clipped, costs, nb) <= potts_objective(b, costs, nb) + 1e-9
                          ? std::move(clipped)
                          : std::move(b);
    }
    r.objective = potts_objective(r.minimizer, costs, nb);
    r.solver = kind;
    r.sweeps = sweeps;
    r.converged = converged;
    r.moved_area = symmetric_difference_volume(r.minimizer, a);
    r.energy.lambda = costs.lambda;
    r.energy.perimeter = partition_perimeter(r.minimizer, nb);
    r.energy.transport = sigma(r.minimizer, a);
    r.energy.total = r.energy.perimeter + 0.5 * costs.lambda * r.energy.transport;
    if (costs.forcing) {
        r.energy.forcing = forcing_energy(r.minimizer, *costs.forcing);
        r.energy.total += r.energy.forcing;
    }
    return r;
}

/// One alpha-expansion move solved exactly as a binary cut.
/// Returns true if any cell changed label.
inline bool expansion_move(LabelField& cur, int alpha, const UnaryCosts& costs,
                           const Neighborhood& nb) {
    const GridSpec& s = cur.spec;
    const int n = s.cells();
    BinarySubmodular bs(n);
    const int ext = cur.exterior();
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i) {
            int c = s.index(i, j);
            int l = cur.label(i, j);
            double bw = exterior_edge_weight(s, nb, i, j);
            double keep = costs.at(l, c) + (l != ext ? bw : 0.0);
            double go = costs.at(alpha, c) + (alpha != ext ? bw : 0.0);
            if (s.on_frame(i, j)) {
                // frame is pinned to the exterior label
                if (l != ext) keep = costs.sentinel * 2.0;
                if (alpha != ext) go = costs.sentinel * 2.0;
            }
            bs.add_unary(c, keep, go);
        }
    for (const auto& e : nb.half_edges)
        for (int j = 0; j < s.height; ++j) {
            int j2 = j + e.dy;
            if (j2 < 0 || j2 >= s.height) continue;
            for (int i = 0; i < s.width; ++i) {
                int i2 = i + e.dx;
                if (i2 < 0 || i2 >= s.width) continue;
                int p = s.index(i, j), q = s.index(i2, j2);
                int lp = cur.labels[static_cast<std::size_t>(p)];
                int lq = cur.labels[static_cast<std::size_t>(q)];
                double w = e.weight;
                double e00 = (lp != lq) ? w : 0.0;
                double e01 = (lp != alpha) ? w : 0.0;
                double e10 = (lq != alpha) ? w : 0.0;
                bs.add_pairwise(p, q, e00, e01, e10, 0.0);
            }
        }
    std::vector<char> x;
    bs.solve(x);
    bool moved = false;
    for (int c = 0; c < n; ++c)
        if (x[static_cast<std::size_t>(c)] && cur.labels[static_cast<std::size_t>(c)] != alpha) {
            cur.labels[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(alpha);
            moved = true;
        }
    return moved;
}

}  // namespace detail

/// Binary case: one expansion of the bounded label from the exterior-filled
/// field, then of the exterior, is equivalent to a single exact cut; we run
/// the cut directly over labels {0, exterior}.
inline StepResult solve_binary(const LabelField& a, const UnaryCosts& costs, const Neighborhood& nb) {
    if (a.num_bounded != 1) throw std::invalid_argument("solve_binary: requires N = 1");
    const GridSpec& s = a.spec;
    BinarySubmodular bs(s.cells());
    const int ext = a.exterior();
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i) {
            int c = s.index(i, j);
            double e_ext = costs.at(ext, c);
            double e_in = s.on_frame(i, j)
                              ? costs.sentinel * 2.0
                              : costs.at(0, c) + exterior_edge_weight(s, nb, i, j);
            bs.add_unary(c, e_ext, e_in);  // x=1 means bounded label
        }
    for (const auto& e : nb.half_edges)
        for (int j = 0; j < s.height; ++j) {
            int j2 = j + e.dy;
            if (j2 < 0 || j2 >= s.height) continue;
            for (int i = 0; i < s.width; ++i) {
                int i2 = i + e.dx;
                if (i2 < 0 || i2 >= s.width) continue;
                bs.add_pairwise(s.index(i, j), s.index(i2, j2), 0.0, e.weight, e.weight, 0.0);
            }
        }
    std::vector<char> x;
    bs.solve(x);
    LabelField b(s, 1);
    for (int c = 0; c < s.cells(); ++c)
        b.labels[static_cast<std::size_t>(c)] = x[static_cast<std::size_t>(c)] ? 0 : static_cast<std::uint8_t>(ext);
    return detail::finalize(std::move(b), a, costs, nb, SolverKind::exact_cut, 1, true);
}

/// Alpha-expansion over all labels; deterministic order from order_seed
/// (0 keeps the natural cyclic order 0..N).
inline StepResult solve_multilabel(const LabelField& a, const UnaryCosts& costs, const Neighborhood& nb,
                                   int max_sweeps = 50, unsigned order_seed = 0) {
    LabelField cur = a;
    std::vector<int> order(static_cast<std::size_t>(costs.num_labels));
    std::iota(order.begin(), order.end(), 0);
    if (order_seed != 0) {
        std::mt19937 rng(order_seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    int sweeps = 0;
    bool converged = false;
    while (sweeps < max_sweeps) {
        ++sweeps;
        bool moved = false;
        for (int alpha : order) moved |= detail::expansion_move(cur, alpha, costs, nb);
        if (!moved) {
            converged = true;
            break;
        }
    }
    return detail::finalize(std::move(cur), a, costs, nb, SolverKind::expansion, sweeps, converged);
}

/// Global optimum by enumeration over the non-frame cells; test oracle.
inline StepResult solve_exhaustive(const LabelField& a, const UnaryCosts& costs, const Neighborhood& nb) {
    const GridSpec& s = a.spec;
    std::vector<int> free_cells;
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i)
            if (!s.on_frame(i, j)) free_cells.push_back(s.index(i, j));
    double states = std::pow(static_cast<double>(costs.num_labels), static_cast<double>(free_cells.size()));
    if (states > 1e8) throw TooLargeError{};

    LabelField trial(s, a.num_bounded);
    std::vector<int> assign(free_cells.size(), 0);
    for (std::size_t k = 0; k < free_cells.size(); ++k)
        trial.labels[static_cast<std::size_t>(free_cells[k])] = 0;
    double best = std::numeric_limits<double>::infinity();
    LabelField best_field = trial;
    const long long total = static_cast<long long>(states);
    for (long long it = 0; it < total; ++it) {
        double v = detail::potts_objective(trial, costs, nb);
        if (v < best) {
            best = v;
            best_field = trial;
        }
        // odometer increment
        for (std::size_t k = 0; k < assign.size(); ++k) {
            if (++assign[k] < costs.num_labels) {
                trial.labels[static_cast<std::size_t>(free_cells[k])] = static_cast<std::uint8_t>(assign[k]);
                break;
            }
            assign[k] = 0;
            trial.labels[static_cast<std::size_t>(free_cells[k])] = 0;
        }
    }
    StepResult r;
    r.minimizer = std::move(best_field);
    r.objective = best;
    r.solver = SolverKind::exhaustive;
    r.sweeps = 0;
    r.moved_area = symmetric_difference_volume(r.minimizer, a);
    r.energy.lambda = costs.lambda;
    r.energy.perimeter = partition_perimeter(r.minimizer, nb);
    try {
        r.energy.transport = sigma(r.minimizer, a);
        r.energy.total = r.energy.perimeter + 0.5 * costs.lambda * r.energy.transport;
        if (costs.forcing) {
            r.energy.forcing = forcing_energy(r.minimizer, *costs.forcing);
            r.energy.total += r.energy.forcing;
        }
    } catch (const InfiniteSigmaError&) {
        r.energy.transport = std::numeric_limits<double>::infinity();
        r.energy.total = std::numeric_limits<double>::infinity();
    }
    return r;
}

/// Discrete analogue of cutting a competitor at the convex hull of a.
inline LabelField restrict_to_hull(const LabelField& a, const LabelField& candidate) {
    if (!(a.spec == candidate.spec)) throw std::invalid_argument("restrict_to_hull: spec mismatch");
    return detail::restrict_to_hull_mask(candidate, convex_hull_mask(a));
}

}  // namespace gmm
