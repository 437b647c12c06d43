#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gmmflow/distance.hpp"
#include "gmmflow/geometry.hpp"
#include "gmmflow/grid.hpp"

namespace gmm {

struct InfiniteSigmaError : std::runtime_error {
    InfiniteSigmaError() : std::runtime_error("sigma: phase with empty boundary changed") {}
};

/// Per-phase forcing densities H_j, j = 0..N (j = N is the exterior phase).
struct ForcingField {
    GridSpec spec;
    std::vector<std::vector<double>> values;  // [label][cell]
    double radius = 0.0;                      // H_j >= H_exterior outside B_radius(center)

    double at(int label, int cell) const {
        return values[static_cast<std::size_t>(label)][static_cast<std::size_t>(cell)];
    }

    /// Checks the discrete forcing hypothesis: exterior forcing compactly
    /// supported in B_radius, and H_j >= H_exterior outside B_radius.
    void validate() const {
        int n = static_cast<int>(values.size());
        if (n < 2) throw std::invalid_argument("ForcingField: need at least two phases");
        double ccx = spec.width * spec.h / 2.0, ccy = spec.height * spec.h / 2.0;
        int ext = n - 1;
        for (int j = 0; j < spec.height; ++j)
            for (int i = 0; i < spec.width; ++i) {
                int c = spec.index(i, j);
                double r = std::hypot(spec.cx(i) - ccx, spec.cy(j) - ccy);
                if (r <= radius) continue;
                if (at(ext, c) != 0.0)
                    throw std::invalid_argument("ForcingField: exterior forcing not compactly supported");
                for (int l = 0; l < ext; ++l)
                    if (at(l, c) < at(ext, c))
                        throw std::invalid_argument("ForcingField: H_j < H_exterior outside B_R");
            }
    }
};

struct EnergyBreakdown {
    double perimeter = 0.0;
    double transport = 0.0;  // sigma value
    double forcing = 0.0;
    double lambda = 1.0;
    double total = 0.0;  // perimeter + lambda/2 * transport + forcing
};

/// Per-cell per-label costs whose sums reproduce (lambda/2) sigma + forcing
/// differences between competitors sharing the same previous state. c0 is the
/// constant dropped when the transport integral is split into per-cell terms.
struct UnaryCosts {
    GridSpec spec;
    int num_labels = 2;
    std::vector<std::vector<double>> u;  // [label][cell]
    double c0 = 0.0;
    double lambda = 1.0;
    double sentinel = 0.0;
    std::optional<ForcingField> forcing;

    double at(int label, int cell) const {
        return u[static_cast<std::size_t>(label)][static_cast<std::size_t>(cell)];
    }
};

/// Nonsymmetric transport distance sigma(b,a) = sum_j h^2 sum_{x in Bj Delta Aj} d(x, dAj).
inline double sigma(const LabelField& b, const LabelField& a) {
    if (!(a.spec == b.spec) || a.num_bounded != b.num_bounded)
        throw std::invalid_argument("sigma: shape mismatch");
    const GridSpec& s = a.spec;
    const double h2 = s.h * s.h;
    double total = 0.0;
    for (int l = 0; l <= a.num_bounded; ++l) {
        bool differ = false;
        for (int c = 0; c < s.cells(); ++c) {
            bool ina = a.labels[static_cast<std::size_t>(c)] == l;
            bool inb = b.labels[static_cast<std::size_t>(c)] == l;
            if (ina != inb) {
                differ = true;
                break;
            }
        }
        if (!differ) continue;
        SignedField d;
        try {
            d = signed_distance(a, l);
        } catch (const EmptyBoundaryError&) {
            throw InfiniteSigmaError{};
        }
        for (int c = 0; c < s.cells(); ++c) {
            bool ina = a.labels[static_cast<std::size_t>(c)] == l;
            bool inb = b.labels[static_cast<std::size_t>(c)] == l;
            if (ina != inb) total += h2 * std::abs(d.values[static_cast<std::size_t>(c)]);
        }
    }
    return total;
}

inline double forcing_energy(const LabelField& b, const ForcingField& H) {
    const double h2 = b.spec.h * b.spec.h;
    double f = 0.0;
    for (int c = 0; c < b.spec.cells(); ++c)
        f += h2 * H.at(b.labels[static_cast<std::size_t>(c)], c);
    return f;
}

inline EnergyBreakdown evaluate_F(const LabelField& b, const LabelField& a, double lambda,
                                  const Neighborhood& nb) {
    if (lambda < 1.0) throw std::invalid_argument("evaluate_F: lambda must be >= 1");
    EnergyBreakdown e;
    e.lambda = lambda;
    e.perimeter = partition_perimeter(b, nb);
    e.transport = sigma(b, a);
    e.total = e.perimeter + 0.5 * lambda * e.transport;
    return e;
}

inline EnergyBreakdown evaluate_FH(const LabelField& b, const LabelField& a, double lambda,
                                   const ForcingField& H, const Neighborhood& nb) {
    EnergyBreakdown e = evaluate_F(b, a, lambda, nb);
    e.forcing = forcing_energy(b, H);
    e.total += e.forcing;
    return e;
}

/// u_j(x) = (lambda/2) h^2 dtilde(x, dAj) + h^2 H_j(x); empty phases of the
/// previous state get a sentinel so minimizers keep them empty. c0 restores
/// the dropped sum over the previous state so that
/// sum_x u_{label(x)} + c0 = (lambda/2) sigma(b,a) + forcing(b).
inline UnaryCosts compile_unaries(const LabelField& a, double lambda,
                                  const std::optional<ForcingField>& H = std::nullopt) {
    if (lambda < 1.0) throw std::invalid_argument("compile_unaries: lambda must be >= 1");
    const GridSpec& s = a.spec;
    const double h2 = s.h * s.h;
    UnaryCosts uc;
    uc.spec = s;
    uc.num_labels = a.num_bounded + 1;
    uc.lambda = lambda;
    uc.forcing = H;
    uc.u.assign(static_cast<std::size_t>(uc.num_labels),
                std::vector<double>(static_cast<std::size_t>(s.cells()), 0.0));
    double max_abs = 0.0;
    std::vector<char> has_boundary(static_cast<std::size_t>(uc.num_labels), 0);
    for (int l = 0; l < uc.num_labels; ++l) {
        SignedField d;
        try {
            d = signed_distance(a, l);
        } catch (const EmptyBoundaryError&) {
            continue;  // empty or full phase, handled below
        }
        has_boundary[static_cast<std::size_t>(l)] = 1;
        auto& row = uc.u[static_cast<std::size_t>(l)];
        for (int c = 0; c < s.cells(); ++c) {
            double v = 0.5 * lambda * h2 * d.values[static_cast<std::size_t>(c)];
            if (H) v += h2 * H->at(l, c);
            row[static_cast<std::size_t>(c)] = v;
            max_abs = std::max(max_abs, std::abs(v));
            if (a.labels[static_cast<std::size_t>(c)] == l) uc.c0 -= v;
            if (H && a.labels[static_cast<std::size_t>(c)] == l)
                uc.c0 += h2 * H->at(l, c);  // c0 tracks only the transport offset
        }
    }
    uc.sentinel = std::max(1.0, max_abs) * 1e12;
    for (int l = 0; l < uc.num_labels; ++l) {
        if (has_boundary[static_cast<std::size_t>(l)]) continue;
        bool empty = a.phase_cells(l) == 0;
        auto& row = uc.u[static_cast<std::size_t>(l)];
        if (empty)
            row.assign(static_cast<std::size_t>(s.cells()), uc.sentinel);
        // a full phase keeps cost 0: all competitors differ only through
        // phases that are empty in a, which already carry the sentinel
    }
    return uc;
}

/// Sum of the compiled unaries over a labeling, plus c0. For costs compiled
/// from a previous state this equals (lambda/2) sigma(b,a) + forcing(b).
inline double unary_total(const UnaryCosts& uc, const LabelField& b) {
    double t = uc.c0;
    for (int c = 0; c < b.spec.cells(); ++c)
        t += uc.at(b.labels[static_cast<std::size_t>(c)], c);
    return t;
}

}  // namespace gmm
