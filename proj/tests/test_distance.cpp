#include <doctest.h>

#include <random>

#include "gmmflow/distance.hpp"
#include "helpers.hpp"

using namespace gmm;
using testutil::make_disk;

namespace {

/// Brute-force distance to the nearest boundary edge midpoint.
double brute_distance(const LabelField& f, int label, int ci, int cj) {
    const GridSpec& s = f.spec;
    double best = 1e300;
    auto in = [&](int i, int j) { return f.label(i, j) == label; };
    double x = s.cx(ci), y = s.cy(cj);
    for (int j = 0; j < s.height; ++j)
        for (int i = 0; i < s.width; ++i) {
            if (i + 1 < s.width && in(i, j) != in(i + 1, j))
                best = std::min(best, std::hypot(x - (i + 1) * s.h, y - s.cy(j)));
            if (j + 1 < s.height && in(i, j) != in(i, j + 1))
                best = std::min(best, std::hypot(x - s.cx(i), y - (j + 1) * s.h));
        }
    return best;
}

}  // namespace

TEST_CASE("signed_distance: disk center, against brute force") {
    auto f = make_disk(48, 48, 1.0, 24.0, 24.0, 20.0);
    auto d = signed_distance(f, 0);
    // center cell is 20h inside, up to one cell diagonal
    int ci = 23, cj = 23;
    CHECK(d.at(ci, cj) < 0.0);
    CHECK(std::abs(-d.at(ci, cj) - 20.0) <= std::sqrt(2.0));
    CHECK(-d.at(ci, cj) == doctest::Approx(brute_distance(f, 0, ci, cj)));
}

TEST_CASE("signed_distance: half-plane-like phase, adjacent outside cell") {
    GridSpec s(16, 16, 1.0);
    LabelField f(s, 1);
    for (int j = 1; j < 15; ++j)
        for (int i = 1; i <= 7; ++i) f.set(i, j, 0);
    auto d = signed_distance(f, 0);
    // cell (8, 8) sits just outside the phase: h/2 from the face midpoints
    CHECK(d.at(8, 8) > 0.0);
    CHECK(std::abs(d.at(8, 8) - 0.5) <= 1.0);
    CHECK(d.at(8, 8) == doctest::Approx(brute_distance(f, 0, 8, 8)));
}

TEST_CASE("signed_distance: exact match with brute force on random fields") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        auto f = testutil::random_field(10, 10, 0.5, 1, rng);
        if (f.phase_cells(0) == 0) continue;
        auto d = signed_distance(f, 0);
        for (int j = 0; j < 10; ++j)
            for (int i = 0; i < 10; ++i)
                CHECK(std::abs(d.at(i, j)) == doctest::Approx(brute_distance(f, 0, i, j)));
    }
}

TEST_CASE("signed_distance: sign flips exactly across boundary edges") {
    auto f = make_disk(32, 32, 1.0, 16.0, 16.0, 10.0);
    auto d = signed_distance(f, 0);
    for (int j = 0; j < 32; ++j)
        for (int i = 0; i + 1 < 32; ++i) {
            bool cross = (f.label(i, j) == 0) != (f.label(i + 1, j) == 0);
            bool sign_flip = (d.at(i, j) < 0.0) != (d.at(i + 1, j) < 0.0);
            CHECK(cross == sign_flip);
        }
}

TEST_CASE("signed_distance: boundary-adjacent cells within one diagonal") {
    auto f = make_disk(32, 32, 1.0, 16.0, 16.0, 9.0);
    auto d = signed_distance(f, 0);
    for (int j = 1; j < 31; ++j)
        for (int i = 1; i < 31; ++i) {
            bool adj = false;
            for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                if ((f.label(i, j) == 0) != (f.label(i + di, j + dj) == 0)) adj = true;
            if (adj) CHECK(std::abs(d.at(i, j)) <= std::sqrt(2.0) + 1e-12);
        }
}

TEST_CASE("signed_distance: empty boundary throws") {
    LabelField f(GridSpec(8, 8, 1.0), 1);
    CHECK_THROWS_AS(signed_distance(f, 0), EmptyBoundaryError);   // empty phase
    CHECK_THROWS_AS(signed_distance(f, 1), EmptyBoundaryError);   // full phase
}

TEST_CASE("distance_to_cells: zero on the set, exact elsewhere") {
    GridSpec s(12, 12, 0.25);
    std::vector<char> mask(s.cells(), 0);
    mask[s.index(3, 4)] = 1;
    mask[s.index(8, 9)] = 1;
    auto d = distance_to_cells(s, mask);
    CHECK(d[s.index(3, 4)] == 0.0);
    double expect = std::min(std::hypot(3 - 6, 4 - 2), std::hypot(8 - 6, 9 - 2)) * 0.25;
    CHECK(d[s.index(6, 2)] == doctest::Approx(expect));
}
