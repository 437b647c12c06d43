#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gmmflow/distance.hpp"
#include "gmmflow/grid.hpp"

namespace gmm {

struct EmptyPhaseError : std::runtime_error {
    EmptyPhaseError() : std::runtime_error("phase is empty") {}
};
struct AllExteriorError : std::runtime_error {
    AllExteriorError() : std::runtime_error("all bounded phases are empty") {}
};
struct FewerThanTwoPhasesError : std::runtime_error {
    FewerThanTwoPhasesError() : std::runtime_error("fewer than two nonempty bounded phases") {}
};

/// Crofton perimeter of one phase: weighted count of stencil edges crossing
/// the phase boundary. Cells beyond the grid count as exterior.
inline double phase_perimeter(const LabelField& field, int label, const Neighborhood& nb) {
    const GridSpec& s = field.spec;
    if (label < 0 || label > field.num_bounded)
        throw std::invalid_argument("phase_perimeter: label out of range");
    double per = 0.0;
    for (const auto& e : nb.half_edges) {
        for (int j = 0; j < s.height; ++j) {
            int j2 = j + e.dy;
            if (j2 < 0 || j2 >= s.height) continue;
            for (int i = 0; i < s.width; ++i) {
                int i2 = i + e.dx;
                if (i2 < 0 || i2 >= s.width) continue;
                if ((field.label(i, j) == label) != (field.label(i2, j2) == label))
                    per += e.weight;
            }
        }
    }
    // edges leaving the grid cross the phase boundary iff exactly one of
    // {cell, exterior} carries the label; each such edge is counted once here
    // since its outer endpoint is never visited above
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i)
            if ((field.label(i, j) == label) != (label == field.exterior()))
                per += exterior_edge_weight(s, nb, i, j);
    return per;
}

/// Half the sum of phase perimeters: each interface counted once.
inline double partition_perimeter(const LabelField& field, const Neighborhood& nb) {
    double sum = 0.0;
    for (int l = 0; l <= field.num_bounded; ++l) sum += phase_perimeter(field, l, nb);
    return 0.5 * sum;
}

/// |A Delta B| = h^2 sum_j #{cells in exactly one of the phases}.
inline double symmetric_difference_volume(const LabelField& a, const LabelField& b) {
    if (!(a.spec == b.spec) || a.num_bounded != b.num_bounded)
        throw std::invalid_argument("symmetric_difference_volume: shape mismatch");
    int diff = 0;
    for (std::size_t c = 0; c < a.labels.size(); ++c) diff += (a.labels[c] != b.labels[c]);
    return 2.0 * a.spec.h * a.spec.h * diff;
}

/// Two-sided Hausdorff distance between the cell-center sets of one label.
inline double hausdorff_distance(const LabelField& a, const LabelField& b, int label) {
    if (!(a.spec == b.spec)) throw std::invalid_argument("hausdorff_distance: spec mismatch");
    const GridSpec& s = a.spec;
    std::vector<char> ma(static_cast<std::size_t>(s.cells())), mb(ma);
    bool anya = false, anyb = false;
    for (int c = 0; c < s.cells(); ++c) {
        ma[static_cast<std::size_t>(c)] = a.labels[static_cast<std::size_t>(c)] == label;
        mb[static_cast<std::size_t>(c)] = b.labels[static_cast<std::size_t>(c)] == label;
        anya |= ma[static_cast<std::size_t>(c)];
        anyb |= mb[static_cast<std::size_t>(c)];
    }
    if (!anya || !anyb) throw EmptyPhaseError{};
    auto da = distance_to_cells(s, ma);
    auto db = distance_to_cells(s, mb);
    double h1 = 0.0, h2 = 0.0;
    for (int c = 0; c < s.cells(); ++c) {
        if (ma[static_cast<std::size_t>(c)]) h1 = std::max(h1, db[static_cast<std::size_t>(c)]);
        if (mb[static_cast<std::size_t>(c)]) h2 = std::max(h2, da[static_cast<std::size_t>(c)]);
    }
    return std::max(h1, h2);
}

namespace detail {

struct P2 {
    double x, y;
};

inline double cross(const P2& o, const P2& a, const P2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew monotone chain; returns hull in counterclockwise order.
inline std::vector<P2> convex_hull(std::vector<P2> pts) {
    std::sort(pts.begin(), pts.end(), [](const P2& a, const P2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const P2& a, const P2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    int n = static_cast<int>(pts.size());
    if (n <= 2) return pts;
    std::vector<P2> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (int i = n - 2, lo = k + 1; i >= 0; --i) {
        while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

inline bool in_hull(const std::vector<P2>& hull, const P2& p, double eps) {
    int n = static_cast<int>(hull.size());
    if (n == 0) return false;
    if (n == 1) return std::abs(p.x - hull[0].x) <= eps && std::abs(p.y - hull[0].y) <= eps;
    if (n == 2) {
        // distance to the segment
        double dx = hull[1].x - hull[0].x, dy = hull[1].y - hull[0].y;
        double len2 = dx * dx + dy * dy;
        double t = ((p.x - hull[0].x) * dx + (p.y - hull[0].y) * dy) / len2;
        t = std::clamp(t, 0.0, 1.0);
        double qx = hull[0].x + t * dx, qy = hull[0].y + t * dy;
        return std::hypot(p.x - qx, p.y - qy) <= eps;
    }
    for (int i = 0; i < n; ++i)
        if (cross(hull[i], hull[(i + 1) % n], p) < -eps) return false;
    return true;
}

}  // namespace detail

/// Cells whose centers lie in the closed convex hull of all bounded-phase
/// cell centers, Minkowski-dilated by one cell (so the hull polygon stays
/// convex and intersecting with the mask never increases line crossings).
inline std::vector<char> convex_hull_mask(const LabelField& field) {
    const GridSpec& s = field.spec;
    std::vector<detail::P2> pts;
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i)
            if (field.label(i, j) < field.num_bounded) {
                double x = s.cx(i), y = s.cy(j);
                // Minkowski sum with the square [-h,h]^2 via corner copies
                pts.push_back({x - s.h, y - s.h});
                pts.push_back({x - s.h, y + s.h});
                pts.push_back({x + s.h, y - s.h});
                pts.push_back({x + s.h, y + s.h});
            }
    if (pts.empty()) throw AllExteriorError{};
    auto hull = detail::convex_hull(std::move(pts));
    std::vector<char> mask(static_cast<std::size_t>(s.cells()), 0);
    double eps = 1e-9 * s.h;
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i)
            if (detail::in_hull(hull, {s.cx(i), s.cy(j)}, eps))
                mask[static_cast<std::size_t>(s.index(i, j))] = 1;
    return mask;
}

/// Min cell-center distance between any two distinct nonempty bounded phases.
inline double min_pairwise_distance(const LabelField& field) {
    const GridSpec& s = field.spec;
    std::vector<int> nonempty;
    for (int l = 0; l < field.num_bounded; ++l)
        if (field.phase_cells(l) > 0) nonempty.push_back(l);
    if (nonempty.size() < 2) throw FewerThanTwoPhasesError{};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < nonempty.size(); ++p) {
        std::vector<char> mask(static_cast<std::size_t>(s.cells()));
        for (int c = 0; c < s.cells(); ++c)
            mask[static_cast<std::size_t>(c)] = field.labels[static_cast<std::size_t>(c)] == nonempty[p];
        auto d = distance_to_cells(s, mask);
        for (std::size_t q = p + 1; q < nonempty.size(); ++q)
            for (int c = 0; c < s.cells(); ++c)
                if (field.labels[static_cast<std::size_t>(c)] == nonempty[q])
                    best = std::min(best, d[static_cast<std::size_t>(c)]);
    }
    return best;
}

/// Cells of the phase with a 4-neighbor of a different label (cells beyond
/// the grid count as exterior).
inline std::vector<int> boundary_cells(const LabelField& field, int label) {
    const GridSpec& s = field.spec;
    std::vector<int> out;
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i) {
            if (field.label(i, j) != label) continue;
            for (int k = 0; k < 4; ++k) {
                int i2 = i + dx[k], j2 = j + dy[k];
                int l2 = (i2 < 0 || i2 >= s.width || j2 < 0 || j2 >= s.height)
                             ? field.exterior()
                             : field.label(i2, j2);
                if (l2 != label) {
                    out.push_back(s.index(i, j));
                    break;
                }
            }
        }
    return out;
}

}  // namespace gmm
