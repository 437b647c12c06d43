#include <doctest.h>

#include "gmmflow/verify.hpp"
#include "helpers.hpp"

using namespace gmm;
using testutil::make_disk;

namespace {

ChainRecord stationary_chain(const LabelField& g, int steps) {
    ChainRecord ch;
    ch.lambda = 10.0;
    for (int k = 0; k <= steps; ++k) ch.states.push_back(g);
    for (int k = 0; k < steps; ++k) {
        EnergyBreakdown e;
        e.lambda = ch.lambda;
        ch.energies.push_back(e);
        ch.moved_areas.push_back(0.0);
        ch.sup_displacements.push_back(0.0);
    }
    return ch;
}

}  // namespace

TEST_CASE("check_energy_descent: stationary passes, disk chain passes, injected violation fails") {
    auto nb = Neighborhood::make(16, 1.0 / 64.0);
    auto g = make_disk(64, 64, 1.0 / 64.0, 0.5, 0.5, 0.3);

    CHECK(check_energy_descent(stationary_chain(g, 3), nb).pass);

    auto chain = run_chain(g, 400.0, 6, nb);
    CHECK(check_energy_descent(chain, nb).pass);

    // inject a perimeter increase: replace a late state by a dilated disk
    ChainRecord bad = chain;
    bad.states.back() = make_disk(64, 64, 1.0 / 64.0, 0.5, 0.5, 0.31);
    bad.energies.back().transport =
        sigma(bad.states.back(), bad.states[bad.states.size() - 2]);
    CHECK_FALSE(check_energy_descent(bad, nb).pass);
}

TEST_CASE("check_density: flat boundary ratios near one half") {
    GridSpec s(64, 64, 1.0 / 64.0);
    LabelField g(s, 1);
    for (int j = 1; j < 63; ++j)
        for (int i = 1; i <= 31; ++i) g.set(i, j, 0);
    ChainRecord ch;
    ch.lambda = 1.0;  // generous admissible radii
    ch.states = {g, g};
    EnergyBreakdown e;
    ch.energies = {e};
    ch.moved_areas = {0.0};
    ch.sup_displacements = {0.0};
    auto rep = check_density(ch);
    CHECK(rep.pass);
    bool saw_half = false;
    for (const auto& m : rep.measured)
        if (m.quantity == "volume_ratio_lower" && std::abs(m.value - 0.5) < 0.2) saw_half = true;
    CHECK(saw_half);
}

TEST_CASE("check_density: single-cell phase violates the lower bound") {
    // fine grid: the declared slack 4h/r must stay below the 1/16 bound at
    // the largest admissible radius for the violation to register
    GridSpec s(256, 256, 1.0 / 256.0);
    LabelField prev(s, 1);
    for (int j = 80; j < 176; ++j)
        for (int i = 80; i < 176; ++i) prev.set(i, j, 0);
    LabelField bad(s, 1);
    bad.set(128, 128, 0);  // a lone cell: the ratio at r ~ 0.4 is ~1e-4 < 1/16
    ChainRecord ch;
    ch.lambda = 1.0;
    ch.states = {prev, bad};
    ch.energies.resize(1);
    ch.moved_areas = {0.0};
    ch.sup_displacements = {0.0};
    auto rep = check_density(ch);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("check_density: huge lambda reports skipped radii") {
    auto g = make_disk(32, 32, 1.0 / 32.0, 0.5, 0.5, 0.2);
    ChainRecord ch;
    ch.lambda = 1e6;
    ch.states = {g, g};
    ch.energies.resize(1);
    ch.moved_areas = {0.0};
    ch.sup_displacements = {0.0};
    auto rep = check_density(ch);
    CHECK(rep.pass);
    CHECK(!rep.skipped.empty());
    CHECK(rep.measured.empty());
}

TEST_CASE("check_disjointness: below threshold skips, vacuous single phase passes") {
    auto g = make_disk(32, 32, 1.0 / 32.0, 0.5, 0.5, 0.2);
    ChainRecord ch = stationary_chain(g, 2);
    ch.lambda = 10.0;
    auto rep = check_disjointness(ch, 0.3);  // needs lambda >= 512/0.09
    CHECK(rep.pass);
    CHECK(!rep.skipped.empty());

    ch.lambda = 1e5;
    auto rep2 = check_disjointness(ch, 0.3);
    CHECK(rep2.pass);  // single phase: every state inside its own dilation
}

TEST_CASE("check_disjointness: injected escape fails") {
    GridSpec s(64, 64, 1.0 / 64.0);
    LabelField g(s, 2);
    for (int j = 1; j < 63; ++j)
        for (int i = 1; i < 63; ++i) {
            if (std::hypot(s.cx(i) - 0.25, s.cy(j) - 0.5) <= 0.12) g.set(i, j, 0);
            if (std::hypot(s.cx(i) - 0.75, s.cy(j) - 0.5) <= 0.12) g.set(i, j, 1);
        }
    LabelField bad = g;
    bad.set(32, 10, 0);  // far from phase 0
    ChainRecord ch;
    ch.lambda = 1e5;
    ch.states = {g, bad};
    ch.energies.resize(1);
    ch.moved_areas = {0.0};
    ch.sup_displacements = {0.0};
    CHECK_FALSE(check_disjointness(ch, 0.3).pass);
}

TEST_CASE("check_shrinking_disk: exact at t=0, detects a wrong area") {
    const int n = 64;
    const double h = 1.0 / n;
    auto g = make_disk(n, n, h, 0.5, 0.5, 0.25);
    Trajectory traj;
    traj.times = {0.0};
    traj.snapshots = {g};
    traj.extinction_time = 0.25 * 0.25 / 2.0;
    CHECK(check_shrinking_disk(traj, 0.25).pass);

    Trajectory badtraj = traj;
    badtraj.times = {0.02};
    CHECK_FALSE(check_shrinking_disk(badtraj, 0.25).pass);  // area did not shrink
}

TEST_CASE("check_small_time_consistency: already-stationary input gives zeros") {
    // a huge disk at tiny lambda would move; use large lambdas so nothing moves
    auto g = make_disk(48, 48, 1.0 / 48.0, 0.5, 0.5, 0.2);
    auto nb = Neighborhood::make(16, 1.0 / 48.0);
    auto rep = check_small_time_consistency(g, {5e5, 1e6}, nb);
    CHECK(rep.pass);
    for (const auto& m : rep.measured)
        if (m.quantity == "symdiff_limit") CHECK(m.value == 0.0);
}

TEST_CASE("check_small_time_consistency: square input trends hold") {
    GridSpec s(96, 96, 1.0 / 96.0);
    LabelField g(s, 1);
    for (int j = 1; j < 95; ++j)
        for (int i = 1; i < 95; ++i)
            if (std::abs(s.cx(i) - 0.5) <= 0.22 && std::abs(s.cy(j) - 0.5) <= 0.22) g.set(i, j, 0);
    auto nb = Neighborhood::make(16, s.h);
    auto rep = check_small_time_consistency(g, {50.0, 100.0, 200.0, 400.0, 800.0}, nb);
    CHECK(rep.pass);
}

TEST_CASE("check_sup_displacement and check_hull_confinement on a disk chain") {
    const int n = 96;
    const double h = 1.0 / n;
    auto g = make_disk(n, n, h, 0.5, 0.5, 0.3);
    auto nb = Neighborhood::make(16, h);
    auto chain = run_chain(g, 400.0, 8, nb);
    CHECK(check_sup_displacement(chain).pass);
    CHECK(check_hull_confinement(chain).pass);

    ChainRecord bad = chain;
    bad.sup_displacements[0] = 10.0;
    CHECK_FALSE(check_sup_displacement(bad).pass);

    ChainRecord escape = chain;
    escape.states.back().set(2, 2, 0);
    CHECK_FALSE(check_hull_confinement(escape).pass);
}

TEST_CASE("check_monotone_distance: injected approach fails") {
    GridSpec s(64, 64, 1.0 / 64.0);
    auto two_disks = [&](double gap) {
        LabelField f(s, 2);
        for (int j = 1; j < 63; ++j)
            for (int i = 1; i < 63; ++i) {
                if (std::hypot(s.cx(i) - (0.5 - gap / 2), s.cy(j) - 0.5) <= 0.1) f.set(i, j, 0);
                if (std::hypot(s.cx(i) - (0.5 + gap / 2), s.cy(j) - 0.5) <= 0.1) f.set(i, j, 1);
            }
        return f;
    };
    ChainRecord good;
    good.lambda = 100.0;
    good.states = {two_disks(0.5), two_disks(0.55)};
    good.energies.resize(1);
    good.moved_areas = {0.0};
    good.sup_displacements = {0.0};
    CHECK(check_monotone_distance(good).pass);

    ChainRecord bad = good;
    bad.states = {two_disks(0.55), two_disks(0.4)};
    CHECK_FALSE(check_monotone_distance(bad).pass);
}

TEST_CASE("check_forced_descent: detects an injected increase") {
    auto nb = Neighborhood::make(16, 1.0 / 64.0);
    auto g = make_disk(64, 64, 1.0 / 64.0, 0.5, 0.5, 0.25);
    ForcingField H;
    H.spec = g.spec;
    H.radius = g.spec.diameter();
    H.values = {std::vector<double>(static_cast<std::size_t>(g.spec.cells()), 4.0),
                std::vector<double>(static_cast<std::size_t>(g.spec.cells()), 0.0)};
    auto chain = run_chain(g, 200.0, 5, nb, H);
    CHECK(check_forced_descent(chain, H, nb).pass);

    ChainRecord bad = chain;
    bad.states.back() = make_disk(64, 64, 1.0 / 64.0, 0.5, 0.5, 0.3);
    CHECK_FALSE(check_forced_descent(bad, H, nb).pass);
}

TEST_CASE("check_holder: stationary trajectory is reported skipped") {
    auto g = make_disk(32, 32, 1.0 / 32.0, 0.5, 0.5, 0.2);
    Trajectory traj;
    for (int m = 0; m < 7; ++m) {
        traj.times.push_back(0.01 * m);
        traj.snapshots.push_back(g);
    }
    auto rep = check_holder(traj);
    CHECK(rep.pass);
    CHECK(!rep.skipped.empty());
}

TEST_CASE("check_stability: unperturbed ladder gives zero distance") {
    auto g = make_disk(64, 64, 1.0 / 64.0, 0.5, 0.5, 0.25);
    auto nb = Neighborhood::make(16, 1.0 / 64.0);
    auto rep = check_stability(g, {g, g}, 0.01, 200.0, nb);
    CHECK(rep.pass);
    for (const auto& m : rep.measured)
        if (m.quantity == "hausdorff_finest") CHECK(m.value == 0.0);
}
