#pragma once

#include <cmath>
#include <random>

#include "gmmflow/grid.hpp"

namespace testutil {

/// Digitized disk: label 0 inside radius r (physical) around (cx, cy).
inline gmm::LabelField make_disk(int w, int h, double spacing, double cx, double cy, double r,
                                 int num_bounded = 1, int label = 0) {
    gmm::LabelField f(gmm::GridSpec(w, h, spacing), num_bounded);
    for (int j = 1; j < h - 1; ++j)
        for (int i = 1; i < w - 1; ++i) {
            double x = f.spec.cx(i), y = f.spec.cy(j);
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) f.set(i, j, label);
        }
    return f;
}

/// Uniform random labels over the non-frame cells.
inline gmm::LabelField random_field(int w, int h, double spacing, int num_bounded, std::mt19937& rng) {
    gmm::LabelField f(gmm::GridSpec(w, h, spacing), num_bounded);
    std::uniform_int_distribution<int> d(0, num_bounded);
    for (int j = 1; j < h - 1; ++j)
        for (int i = 1; i < w - 1; ++i) f.set(i, j, d(rng));
    return f;
}

/// Centered regular polygon with a vertex on the +x axis.
inline gmm::LabelField make_polygon(int w, int h, double spacing, double cx, double cy, double r,
                                    int sides) {
    gmm::LabelField f(gmm::GridSpec(w, h, spacing), 1);
    const double pi = 3.14159265358979323846;
    for (int j = 1; j < h - 1; ++j)
        for (int i = 1; i < w - 1; ++i) {
            double x = f.spec.cx(i) - cx, y = f.spec.cy(j) - cy;
            bool inside = true;
            for (int s = 0; s < sides; ++s) {
                // edge s connects vertices at angles 2 pi s / n and 2 pi (s+1) / n
                double mid = 2.0 * pi * (s + 0.5) / sides;
                double apothem = r * std::cos(pi / sides);
                if (x * std::cos(mid) + y * std::sin(mid) > apothem) {
                    inside = false;
                    break;
                }
            }
            if (inside) f.set(i, j, 0);
        }
    return f;
}

}  // namespace testutil
