#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gmmflow/energy.hpp"
#include "gmmflow/flow.hpp"
#include "gmmflow/geometry.hpp"
#include "gmmflow/grid.hpp"

namespace gmm {

/// Declared grid slacks for all theorem checks, gathered in one place.
struct VerifierSlack {
    static constexpr double energy_descent_rel = 1e-9;  // x Per(initial)
    static constexpr double density_radius_factor = 4.0;  // slack 4h/r on volume ratios
    static constexpr double density_min_radius_cells = 3.0;
    static constexpr double dilation_cells = 1.0;       // +h on dilation containment
    static constexpr double sup_jump_cells = 2.0;       // +2h on the L-infinity jump bound
    static constexpr double monotone_distance_cells = 2.0;
    static constexpr double stability_cells = 4.0;      // +4h on the Hausdorff bound
    static constexpr double small_time_area_cells = 3.0;  // x h^2 x #boundary cells
};

struct Measurement {
    std::string quantity;
    double value = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    bool upper = true;  // value <= bound + slack (else value >= bound - slack)
    std::string context;

    bool ok() const { return upper ? value <= bound + slack : value >= bound - slack; }
};

struct VerifierReport {
    std::string name;
    bool pass = true;
    std::vector<Measurement> measured;
    std::vector<std::string> skipped;

    void add(Measurement m) {
        pass = pass && m.ok();
        measured.push_back(std::move(m));
    }
};

/// lambda sigma(L_k, L_{k-1}) <= 2 (Per_{k-1} - Per_k) per step (unforced chains).
inline VerifierReport check_energy_descent(const ChainRecord& chain, const Neighborhood& nb) {
    VerifierReport rep;
    rep.name = "energy_descent";
    double per_prev = partition_perimeter(chain.states[0], nb);
    double tol = VerifierSlack::energy_descent_rel * std::max(per_prev, 1.0);
    for (std::size_t k = 1; k < chain.states.size(); ++k) {
        double per_k = partition_perimeter(chain.states[k], nb);
        double lhs = chain.lambda * chain.energies[k - 1].transport;
        rep.add({"lambda*sigma", lhs, 2.0 * (per_prev - per_k), tol, true,
                 "k=" + std::to_string(k)});
        per_prev = per_k;
    }
    return rep;
}

/// Volume density bounds at sampled boundary cells of every chain state, for
/// radii admitted by the theorem; inadmissible radii are reported as skipped.
inline VerifierReport check_density(const ChainRecord& chain, int r_samples = 4,
                                    int max_boundary_samples = 64) {
    VerifierReport rep;
    rep.name = "density";
    const GridSpec& s = chain.states[0].spec;
    const double h = s.h;
    const int N = chain.states[0].num_bounded;
    const int n = GridSpec::dimension;
    const double lower = std::pow(1.0 / (2.0 * (N + 1)), n);
    const double upper = 1.0 - std::pow(0.5, n) * std::pow(1.0 - 1.0 / (2.0 * N), n);
    for (std::size_t k = 1; k < chain.states.size(); ++k) {
        const LabelField& prev = chain.states[k - 1];
        const LabelField& cur = chain.states[k];
        // hull diameter of the previous state (the step's data)
        double diam = 0.0;
        {
            std::vector<detail::P2> pts;
            for (int j = 0; j < s.height; ++j)
                for (int i = 0; i < s.width; ++i)
                    if (prev.label(i, j) < N) pts.push_back({s.cx(i), s.cy(j)});
            if (pts.empty()) {
                rep.skipped.push_back("k=" + std::to_string(k) + ": previous state all exterior");
                continue;
            }
            auto hull = detail::convex_hull(std::move(pts));
            for (std::size_t p = 0; p < hull.size(); ++p)
                for (std::size_t q = p + 1; q < hull.size(); ++q)
                    diam = std::max(diam, std::hypot(hull[p].x - hull[q].x, hull[p].y - hull[q].y));
        }
        double r_max = std::min(1.0, n / (2.0 * chain.lambda * N * (diam + 2.0)));
        double r_min = VerifierSlack::density_min_radius_cells * h;
        if (r_max <= r_min) {
            rep.skipped.push_back("k=" + std::to_string(k) + ": no admissible radius (r_max=" +
                                  std::to_string(r_max) + ")");
            continue;
        }
        for (int l = 0; l <= N; ++l) {
            auto bcells = boundary_cells(cur, l);
            if (bcells.empty()) continue;
            std::size_t stride = std::max<std::size_t>(1, bcells.size() / static_cast<std::size_t>(max_boundary_samples));
            for (int ri = 0; ri < r_samples; ++ri) {
                double r = r_min + (r_max - r_min) * (ri + 1.0) / r_samples;
                int rad = static_cast<int>(std::ceil(r / h));
                for (std::size_t bi = 0; bi < bcells.size(); bi += stride) {
                    int c = bcells[bi];
                    int ci = c % s.width, cj = c / s.width;
                    long long in_phase = 0, in_ball = 0;
                    for (int dj = -rad; dj <= rad; ++dj)
                        for (int di = -rad; di <= rad; ++di) {
                            if (static_cast<double>(di) * di + static_cast<double>(dj) * dj >
                                (r / h) * (r / h))
                                continue;
                            ++in_ball;
                            int i2 = ci + di, j2 = cj + dj;
                            int lab = (i2 < 0 || i2 >= s.width || j2 < 0 || j2 >= s.height)
                                          ? N  // beyond the grid counts as exterior
                                          : cur.label(i2, j2);
                            if (lab == l) ++in_phase;
                        }
                    double ratio = static_cast<double>(in_phase) / static_cast<double>(in_ball);
                    double slack = VerifierSlack::density_radius_factor * h / r;
                    std::string ctx = "k=" + std::to_string(k) + " phase=" + std::to_string(l) +
                                      " r=" + std::to_string(r);
                    rep.add({"volume_ratio_lower", ratio, lower, slack, false, ctx});
                    rep.add({"volume_ratio_upper", ratio, upper, slack, true, ctx});
                }
            }
        }
    }
    return rep;
}

/// Every state's phase j stays inside the eps0/4-dilation of the previous
/// state's phase j once lambda clears the theorem threshold.
inline VerifierReport check_disjointness(const ChainRecord& chain, double eps0) {
    VerifierReport rep;
    rep.name = "disjointness";
    const int n = GridSpec::dimension;
    double threshold = std::pow(2.0, n + 6) * n / (eps0 * eps0);
    if (chain.lambda < threshold) {
        rep.skipped.push_back("lambda below threshold " + std::to_string(threshold));
        return rep;
    }
    const GridSpec& s = chain.states[0].spec;
    for (std::size_t k = 1; k < chain.states.size(); ++k) {
        const LabelField& prev = chain.states[k - 1];
        const LabelField& cur = chain.states[k];
        for (int l = 0; l < cur.num_bounded; ++l) {
            std::vector<char> mask(static_cast<std::size_t>(s.cells()), 0);
            bool any = false;
            for (int c = 0; c < s.cells(); ++c)
                if (prev.labels[static_cast<std::size_t>(c)] == l) {
                    mask[static_cast<std::size_t>(c)] = 1;
                    any = true;
                }
            if (!any) continue;  // vacuous for phases already gone
            auto dist = distance_to_cells(s, mask);
            double worst = 0.0;
            for (int c = 0; c < s.cells(); ++c)
                if (cur.labels[static_cast<std::size_t>(c)] == l)
                    worst = std::max(worst, dist[static_cast<std::size_t>(c)]);
            rep.add({"dilation_excess", worst, eps0 / 4.0, VerifierSlack::dilation_cells * s.h, true,
                     "k=" + std::to_string(k) + " phase=" + std::to_string(l)});
        }
    }
    return rep;
}

/// Per step, the multiphase minimizer's phase equals the two-phase step run
/// independently from the same previous phase, up to tie slack.
inline VerifierReport check_decoupling(const ChainRecord& chain,
                                       const std::vector<ChainRecord>& per_phase_chains,
                                       const Neighborhood& nb) {
    VerifierReport rep;
    rep.name = "decoupling";
    const GridSpec& s = chain.states[0].spec;
    for (std::size_t k = 1; k < chain.states.size(); ++k) {
        for (int l = 0; l < chain.states[0].num_bounded; ++l) {
            const ChainRecord& bin = per_phase_chains[static_cast<std::size_t>(l)];
            if (k >= bin.states.size()) continue;
            // compare phase l of the multiphase state against the binary state
            const LabelField& multi = chain.states[k];
            const LabelField& binf = bin.states[k];
            int diff = 0;
            for (int c = 0; c < s.cells(); ++c) {
                bool inm = multi.labels[static_cast<std::size_t>(c)] == l;
                bool inb = binf.labels[static_cast<std::size_t>(c)] == 0;
                diff += (inm != inb);
            }
            double boundary_len = phase_perimeter(binf, 0, nb);
            double tie_slack = 2.0 * s.h * s.h * (boundary_len / s.h);
            rep.add({"phase_symdiff", diff * s.h * s.h, 0.0, tie_slack, true,
                     "k=" + std::to_string(k) + " phase=" + std::to_string(l)});
        }
    }
    return rep;
}

/// Shrinking-disk law area(t) = pi (r0^2 - 2t) with extinction at r0^2/2.
inline VerifierReport check_shrinking_disk(const Trajectory& traj, double r0) {
    VerifierReport rep;
    rep.name = "shrinking_disk";
    const GridSpec& s = traj.snapshots[0].spec;
    double h = s.h;
    double t_ext = r0 * r0 / 2.0;
    for (std::size_t m = 0; m < traj.times.size(); ++m) {
        double t = traj.times[m];
        if (t >= t_ext) {
            int cells = traj.snapshots[m].phase_cells(0);
            rep.add({"post_extinction_area", cells * h * h, 0.0, 0.0, true, "t=" + std::to_string(t)});
            continue;
        }
        double expected = 3.14159265358979323846 * (r0 * r0 - 2.0 * t);
        double area = traj.snapshots[m].phase_cells(0) * h * h;
        double tol = 0.07 * expected + 4.0 * 3.14159265358979323846 * r0 * h;
        rep.add({"area_error", std::abs(area - expected), 0.0, tol, true, "t=" + std::to_string(t)});
    }
    if (traj.extinction_time)
        rep.add({"extinction_time_error", std::abs(*traj.extinction_time - t_ext), 0.0, 0.10 * t_ext,
                 true, ""});
    else
        rep.add({"extinction_observed", 0.0, 1.0, 0.0, false, "chain never went extinct"});
    return rep;
}

/// Small-time behaviour of one-step minimizers along an ascending lambda ladder.
inline VerifierReport check_small_time_consistency(const LabelField& initial,
                                                   const std::vector<double>& lambdas,
                                                   const Neighborhood& nb) {
    VerifierReport rep;
    rep.name = "small_time_consistency";
    const GridSpec& s = initial.spec;
    double per0 = partition_perimeter(initial, nb);
    int bcount = 0;
    for (int l = 0; l <= initial.num_bounded; ++l)
        bcount += static_cast<int>(boundary_cells(initial, l).size());
    std::vector<double> dvol, dper, lsig;
    for (double lam : lambdas) {
        UnaryCosts costs = compile_unaries(initial, lam);
        StepResult st = initial.num_bounded == 1 ? solve_binary(initial, costs, nb)
                                                 : solve_multilabel(initial, costs, nb);
        dvol.push_back(st.moved_area);
        dper.push_back(std::abs(partition_perimeter(st.minimizer, nb) - per0));
        lsig.push_back(lam * st.energy.transport);
    }
    double tiny = 1e-12;
    for (std::size_t i = 1; i < dvol.size(); ++i)
        rep.add({"symdiff_monotone", dvol[i], dvol[i - 1], tiny, true,
                 "lambda=" + std::to_string(lambdas[i])});
    rep.add({"symdiff_limit", dvol.back(),
             VerifierSlack::small_time_area_cells * s.h * s.h * bcount, 0.0, true, "largest lambda"});
    for (std::size_t i = 1; i < dper.size(); ++i)
        rep.add({"perimeter_gap_monotone", dper[i], dper[i - 1], tiny, true,
                 "lambda=" + std::to_string(lambdas[i])});
    for (std::size_t i = lsig.size() / 2 + 1; i < lsig.size(); ++i)
        rep.add({"lambda_sigma_monotone", lsig[i], lsig[i - 1], tiny, true,
                 "lambda=" + std::to_string(lambdas[i])});
    return rep;
}

/// Fitted Hoelder modulus of the trajectory: exponent at least 1/(n+1) minus
/// fit slack, and every sampled pair below the fitted bound at 1.5x.
inline VerifierReport check_holder(const Trajectory& traj) {
    VerifierReport rep;
    rep.name = "holder";
    HolderFit fit;
    try {
        fit = holder_modulus(traj);
    } catch (const DegenerateFitError&) {
        rep.skipped.push_back("stationary trajectory, nothing to fit");
        return rep;
    }
    const int n = GridSpec::dimension;
    rep.add({"fitted_exponent", fit.exponent, 1.0 / (n + 1), 0.05, false, ""});
    double c_bound = 1.5 * fit.constant;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        for (std::size_t j = i + 1; j < traj.times.size(); ++j) {
            double gap = std::abs(traj.times[j] - traj.times[i]);
            if (gap == 0.0 || gap >= 1.0) continue;
            double diff = symmetric_difference_volume(traj.snapshots[i], traj.snapshots[j]);
            rep.add({"pair_bound", diff, c_bound * std::pow(gap, 1.0 / (n + 1)), 0.0, true,
                     "t=" + std::to_string(traj.times[i]) + ",t'=" + std::to_string(traj.times[j])});
        }
    return rep;
}

/// Hull confinement of every chain state inside the initial hull mask.
inline VerifierReport check_hull_confinement(const ChainRecord& chain) {
    VerifierReport rep;
    rep.name = "hull_confinement";
    const GridSpec& s = chain.states[0].spec;
    if (chain.states[0].phase_cells(chain.states[0].exterior()) == s.cells()) {
        rep.skipped.push_back("initial partition all exterior");
        return rep;
    }
    auto mask = convex_hull_mask(chain.states[0]);
    for (std::size_t k = 0; k < chain.states.size(); ++k) {
        int escaped = 0;
        for (int c = 0; c < s.cells(); ++c)
            if (chain.states[k].labels[static_cast<std::size_t>(c)] < chain.states[k].num_bounded &&
                !mask[static_cast<std::size_t>(c)])
                ++escaped;
        rep.add({"cells_outside_hull", static_cast<double>(escaped), 0.0, 0.0, true,
                 "k=" + std::to_string(k)});
    }
    return rep;
}

/// Monotone pairwise distance for disjoint initial data, up to grid slack.
inline VerifierReport check_monotone_distance(const ChainRecord& chain) {
    VerifierReport rep;
    rep.name = "monotone_distance";
    const GridSpec& s = chain.states[0].spec;
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < chain.states.size(); ++k) {
        double d;
        try {
            d = min_pairwise_distance(chain.states[k]);
        } catch (const FewerThanTwoPhasesError&) {
            rep.skipped.push_back("k=" + std::to_string(k) + ": fewer than two phases left");
            break;
        }
        if (k > 0)
            rep.add({"pairwise_distance", d, prev, VerifierSlack::monotone_distance_cells * s.h,
                     false, "k=" + std::to_string(k)});
        prev = d;
    }
    return rep;
}

/// L-infinity jump bound per step: sup displacement <= sqrt(2^{n+2} n)/sqrt(lambda) + 2h.
inline VerifierReport check_sup_displacement(const ChainRecord& chain) {
    VerifierReport rep;
    rep.name = "sup_displacement";
    const int n = GridSpec::dimension;
    const double h = chain.states[0].spec.h;
    double bound = std::sqrt(std::pow(2.0, n + 2) * n) / std::sqrt(chain.lambda);
    for (std::size_t k = 0; k < chain.sup_displacements.size(); ++k)
        rep.add({"sup_displacement", chain.sup_displacements[k], bound,
                 VerifierSlack::sup_jump_cells * h, true, "k=" + std::to_string(k + 1)});
    return rep;
}

/// Forced-flow analogue of energy descent: Per + forcing is nonincreasing.
inline VerifierReport check_forced_descent(const ChainRecord& chain, const ForcingField& H,
                                           const Neighborhood& nb) {
    VerifierReport rep;
    rep.name = "forced_descent";
    double prev = partition_perimeter(chain.states[0], nb) + forcing_energy(chain.states[0], H);
    double tol = VerifierSlack::energy_descent_rel * std::max(std::abs(prev), 1.0);
    for (std::size_t k = 1; k < chain.states.size(); ++k) {
        double cur = partition_perimeter(chain.states[k], nb) + forcing_energy(chain.states[k], H);
        rep.add({"perimeter_plus_forcing", cur, prev, tol, true, "k=" + std::to_string(k)});
        prev = cur;
    }
    return rep;
}

/// Hausdorff stability of the flow under perturbation of the initial data:
/// flows from a ladder of perturbations track the flow from the center.
inline VerifierReport check_stability(const LabelField& center,
                                      const std::vector<LabelField>& perturbations, double t_probe,
                                      double lambda, const Neighborhood& nb) {
    VerifierReport rep;
    rep.name = "stability";
    int steps = static_cast<int>(std::ceil(lambda * t_probe)) + 1;
    ChainRecord ref = run_chain(center, lambda, steps, nb);
    const LabelField& ref_state = chain_state_at(ref, t_probe);
    std::vector<double> dh_initial, dh_probe;
    for (const auto& pert : perturbations) {
        dh_initial.push_back(hausdorff_distance(center, pert, 0));
        ChainRecord ch = run_chain(pert, lambda, steps, nb);
        dh_probe.push_back(hausdorff_distance(ref_state, chain_state_at(ch, t_probe), 0));
    }
    for (std::size_t i = 1; i < dh_probe.size(); ++i)
        rep.add({"hausdorff_monotone", dh_probe[i], dh_probe[i - 1], 1e-12, true,
                 "rung " + std::to_string(i)});
    rep.add({"hausdorff_finest", dh_probe.back(),
             2.0 * dh_initial.back() + VerifierSlack::stability_cells * center.spec.h, 0.0, true,
             "finest rung"});
    return rep;
}

}  // namespace gmm
