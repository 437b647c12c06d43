#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gmmflow/grid.hpp"

namespace gmm {

struct EmptyBoundaryError : std::runtime_error {
    EmptyBoundaryError() : std::runtime_error("signed_distance: phase has empty boundary") {}
};

/// Per-cell signed distance to one phase boundary, negative inside.
struct SignedField {
    GridSpec spec;
    std::vector<double> values;

    double at(int i, int j) const { return values[static_cast<std::size_t>(spec.index(i, j))]; }
};

namespace detail {

/// Felzenszwalb-Huttenlocher 1-D squared distance transform.
/// f holds squared distances (INF for no source); writes result into d.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n,
                   std::vector<int>& v, std::vector<double>& z) {
    const double INF = std::numeric_limits<double>::infinity();
    int k = 0;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for (int q = 1; q < n; ++q) {
        if (f[q] == INF) continue;
        if (f[v[0]] == INF) {
            v[0] = q;
            continue;
        }
        double s;
        while (true) {
            int p = v[k];
            s = ((f[q] + q * (double)q) - (f[p] + p * (double)p)) / (2.0 * (q - p));
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INF;
    }
    k = 0;
    if (f[v[0]] == INF) {
        for (int q = 0; q < n; ++q) d[q] = INF;
        return;
    }
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - (double)v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

/// Exact 2-D squared EDT over a W x H grid of INF / source values.
inline void edt_2d(std::vector<double>& grid, int W, int H) {
    int n = std::max(W, H);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    for (int x = 0; x < W; ++x) {
        for (int y = 0; y < H; ++y) f[y] = grid[y * (std::size_t)W + x];
        edt_1d(f, d, H, v, z);
        for (int y = 0; y < H; ++y) grid[y * (std::size_t)W + x] = d[y];
    }
    for (int y = 0; y < H; ++y) {
        double* row = &grid[y * (std::size_t)W];
        for (int x = 0; x < W; ++x) f[x] = row[x];
        edt_1d(f, d, W, v, z);
        for (int x = 0; x < W; ++x) row[x] = d[x];
    }
}

}  // namespace detail

/// Collects the boundary edge midpoints of the given phase on a half-step
/// refined lattice and returns the exact Euclidean distance from every cell
/// center, signed negative inside the phase. Boundary edges are the 4-neighbor
/// cell faces separating the phase from its complement; cells beyond the grid
/// count as exterior.
inline SignedField signed_distance(const LabelField& field, int label) {
    const GridSpec& s = field.spec;
    if (label < 0 || label > field.num_bounded)
        throw std::invalid_argument("signed_distance: label out of range");

    // refined lattice: point (u,v) sits at physical (u*h/2, v*h/2);
    // cell centers are (2i+1, 2j+1), face midpoints have one even coordinate.
    const int RW = 2 * s.width + 1, RH = 2 * s.height + 1;
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> g(static_cast<std::size_t>(RW) * RH, INF);

    bool any_boundary = false;
    auto in = [&](int i, int j) { return field.label(i, j) == label; };
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i) {
            bool a = in(i, j);
            if (i + 1 < s.width && a != in(i + 1, j)) {
                g[(2 * j + 1) * (std::size_t)RW + (2 * i + 2)] = 0.0;
                any_boundary = true;
            }
            if (j + 1 < s.height && a != in(i, j + 1)) {
                g[(2 * j + 2) * (std::size_t)RW + (2 * i + 1)] = 0.0;
                any_boundary = true;
            }
        }
    if (!any_boundary) throw EmptyBoundaryError{};

    detail::edt_2d(g, RW, RH);

    SignedField out;
    out.spec = s;
    out.values.resize(static_cast<std::size_t>(s.cells()));
    const double half = s.h / 2.0;
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i) {
            double d = std::sqrt(g[(2 * j + 1) * (std::size_t)RW + (2 * i + 1)]) * half;
            out.values[static_cast<std::size_t>(s.index(i, j))] = in(i, j) ? -d : d;
        }
    return out;
}

/// Unsigned distance from every cell center to the nearest cell of the given
/// set (0 on the set itself). Used for dilation and Hausdorff computations.
inline std::vector<double> distance_to_cells(const GridSpec& s, const std::vector<char>& mask) {
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> g(static_cast<std::size_t>(s.cells()), INF);
    bool any = false;
    for (int c = 0; c < s.cells(); ++c)
        if (mask[static_cast<std::size_t>(c)]) {
            g[static_cast<std::size_t>(c)] = 0.0;
            any = true;
        }
    if (!any) throw std::invalid_argument("distance_to_cells: empty set");
    detail::edt_2d(g, s.width, s.height);
    for (auto& v : g) v = std::sqrt(v) * s.h;
    return g;
}

}  // namespace gmm
