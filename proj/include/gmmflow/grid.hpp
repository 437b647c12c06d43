#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmm {

/// Uniform square grid over a rectangular window of the plane.
/// Cell (i,j) has its center at ((i+1/2)h, (j+1/2)h).
struct GridSpec {
    int width = 0;
    int height = 0;
    double h = 1.0;

    static constexpr int dimension = 2;

    GridSpec() = default;
    GridSpec(int w, int ht, double spacing) : width(w), height(ht), h(spacing) {
        if (width < 4 || height < 4) throw std::invalid_argument("GridSpec: grid must be at least 4x4");
        if (!(h > 0.0)) throw std::invalid_argument("GridSpec: spacing must be positive");
    }

    int cells() const { return width * height; }
    int index(int i, int j) const { return j * width + i; }
    double cx(int i) const { return (i + 0.5) * h; }
    double cy(int j) const { return (j + 0.5) * h; }
    bool on_frame(int i, int j) const {
        return i == 0 || j == 0 || i == width - 1 || j == height - 1;
    }
    double diameter() const { return std::hypot(width * h, height * h); }

    bool operator==(const GridSpec& o) const {
        return width == o.width && height == o.height && h == o.h;
    }
};

/// A discrete bounded partition: one label per cell, labels 0..N where
/// label N is the unbounded exterior phase. The outermost one-cell frame
/// always carries the exterior label so the bounded phases stay bounded.
struct LabelField {
    GridSpec spec;
    int num_bounded = 1;
    std::vector<std::uint8_t> labels;

    LabelField() = default;
    LabelField(GridSpec s, int n_bounded)
        : spec(s), num_bounded(n_bounded),
          labels(static_cast<std::size_t>(s.cells()), static_cast<std::uint8_t>(n_bounded)) {
        if (num_bounded < 1 || num_bounded > 254)
            throw std::invalid_argument("LabelField: num_bounded out of range");
    }

    int exterior() const { return num_bounded; }
    int num_labels() const { return num_bounded + 1; }

    int label(int i, int j) const { return labels[static_cast<std::size_t>(spec.index(i, j))]; }
    void set(int i, int j, int l) {
        if (l < 0 || l > num_bounded) throw std::invalid_argument("LabelField: label out of range");
        labels[static_cast<std::size_t>(spec.index(i, j))] = static_cast<std::uint8_t>(l);
    }

    /// Frame cells exterior, labels in range.
    void validate() const {
        if (static_cast<int>(labels.size()) != spec.cells())
            throw std::invalid_argument("LabelField: label array size mismatch");
        for (int j = 0; j < spec.height; ++j)
            for (int i = 0; i < spec.width; ++i) {
                int l = label(i, j);
                if (l < 0 || l > num_bounded)
                    throw std::invalid_argument("LabelField: label out of range");
                if (spec.on_frame(i, j) && l != exterior())
                    throw std::invalid_argument("LabelField: frame cell not exterior");
            }
    }

    int phase_cells(int l) const {
        int c = 0;
        for (auto v : labels) c += (v == l);
        return c;
    }

    bool operator==(const LabelField& o) const {
        return spec == o.spec && num_bounded == o.num_bounded && labels == o.labels;
    }
};

/// One half-space offset of a neighborhood stencil with its Crofton weight.
struct NeighborEdge {
    int dx, dy;
    double weight;  // physical length units
};

/// Cauchy-Crofton edge stencil. half_edges lists one representative per
/// antipodal offset pair; weights already include the grid spacing.
struct Neighborhood {
    int arity = 8;
    std::vector<NeighborEdge> half_edges;

    static Neighborhood make(int arity, double h) {
        if (arity != 4 && arity != 8 && arity != 16)
            throw std::invalid_argument("Neighborhood: arity must be 4, 8 or 16");
        Neighborhood nb;
        nb.arity = arity;
        const double pi = 3.14159265358979323846;
        if (arity == 4) {
            double w = pi / 4.0 * h;
            nb.half_edges = {{1, 0, w}, {0, 1, w}};
        } else if (arity == 8) {
            double wa = pi / 8.0 * h;
            double wd = pi / (8.0 * std::sqrt(2.0)) * h;
            nb.half_edges = {{1, 0, wa}, {0, 1, wa}, {1, 1, wd}, {1, -1, wd}};
        } else {
            // angular cells around directions 0, atan(1/2), pi/4, atan(2), ...
            double a = std::atan(0.5);
            double wa = a / 2.0 * h;
            double wd = (pi / 4.0 - a) / (2.0 * std::sqrt(2.0)) * h;
            double wk = (pi / 8.0) / (2.0 * std::sqrt(5.0)) * h;
            nb.half_edges = {{1, 0, wa},  {0, 1, wa},  {1, 1, wd},  {1, -1, wd},
                             {2, 1, wk},  {1, 2, wk},  {2, -1, wk}, {1, -2, wk}};
        }
        return nb;
    }
};

/// Total Crofton weight of stencil edges leaving the grid from cell (i, j),
/// both orientations of each half edge. The missing endpoints are exterior,
/// so a cell with a bounded label pays this weight toward its perimeter.
inline double exterior_edge_weight(const GridSpec& s, const Neighborhood& nb, int i, int j) {
    double w = 0.0;
    for (const auto& e : nb.half_edges)
        for (int sgn : {1, -1}) {
            int i2 = i + sgn * e.dx, j2 = j + sgn * e.dy;
            if (i2 < 0 || i2 >= s.width || j2 < 0 || j2 >= s.height) w += e.weight;
        }
    return w;
}

}  // namespace gmm
