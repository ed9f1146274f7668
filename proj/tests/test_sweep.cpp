#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "bistab/presets.hpp"
#include "bistab/roots.hpp"
#include "bistab/stability.hpp"
#include "bistab/sweep.hpp"
#include "kerr.hpp"

using namespace bistab;

namespace {
const double uW = 1e-6;

std::vector<double> delta_grid(int n) {
    return linspace(2 * M_PI * -2.0e9, 2 * M_PI * 8.0e9, n);
}
} // namespace

TEST_CASE("detuning sweeps: single peak at low pump, bistable window above") {
    const auto sys = baseline_system();
    auto drv = baseline_drive();
    drv.p_co = 0.05 * 0.03 * uW; // quoted 0.03 uW through the in-coupling
    const auto grid = delta_grid(101);

    drv.p_pu = 0.01 * uW;
    auto low = sweep(sys, drv, SweepAxis::Delta1, grid);
    for (const auto& pt : low.points) CHECK(pt.roots.size() == 1);

    drv.p_pu = 0.10 * uW;
    auto mid = sweep(sys, drv, SweepAxis::Delta1, grid);
    const auto w_mid = multistability_windows(mid, 3);
    REQUIRE(w_mid.size() == 1);

    drv.p_pu = 0.20 * uW;
    auto high = sweep(sys, drv, SweepAxis::Delta1, grid);
    const auto w_high = multistability_windows(high, 3);
    REQUIRE(w_high.size() == 1);

    // stronger pump pushes the window onset to larger detuning
    CHECK(grid[w_high[0].first] > grid[w_mid[0].first]);
}

TEST_CASE("sweep results are identical under worker-thread parallelism") {
    const auto sys = baseline_system();
    auto drv = baseline_drive();
    drv.p_pu = 0.10 * uW;
    const auto grid = delta_grid(41);

    const auto serial = sweep(sys, drv, SweepAxis::Delta1, grid, {}, 1);
    const auto threaded = sweep(sys, drv, SweepAxis::Delta1, grid, {}, 3);
    REQUIRE(serial.points.size() == threaded.points.size());
    for (size_t i = 0; i < serial.points.size(); ++i) {
        REQUIRE(serial.points[i].roots.size() == threaded.points[i].roots.size());
        for (size_t k = 0; k < serial.points[i].roots.size(); ++k) {
            CHECK(serial.points[i].roots[k].n1 == threaded.points[i].roots[k].n1);
            CHECK(serial.points[i].roots[k].n2 == threaded.points[i].roots[k].n2);
        }
    }
}

TEST_CASE("hysteresis on the pump axis: one loop with the expected geometry") {
    const auto sys = baseline_system();
    const auto drv = baseline_drive(); // control at quoted 0.010 uW
    const auto values = geomspace(0.001 * uW, 1.0 * uW, 201);

    const auto up = follow_hysteresis(sys, drv, SweepAxis::PumpPower, values,
                                      HysteresisMode::Static);
    auto rev = values;
    std::reverse(rev.begin(), rev.end());
    const auto down = follow_hysteresis(sys, drv, SweepAxis::PumpPower, rev,
                                        HysteresisMode::Static);

    REQUIRE(up.jumps.size() == 1);
    REQUIRE(down.jumps.size() == 1);
    // the up-jump happens at strictly larger pump power than the down-jump
    CHECK(up.jumps[0].x > down.jumps[0].x);

    // between jumps the occupied branch index is constant
    for (size_t i = 1; i < up.branch.size(); ++i) {
        const bool at_jump = up.jumps[0].index == i;
        if (!at_jump && up.branch[i] != up.branch[i - 1]) {
            // a label change without a jump event must be a pure re-indexing
            // (root count changed while the occupied state stayed continuous)
            const double step = std::abs(std::log1p(up.occupied[i].n1) -
                                         std::log1p(up.occupied[i - 1].n1));
            CHECK(step < 0.3);
        }
    }

    // up and down traces agree outside the bistable window and differ inside
    const double lo = down.jumps[0].x, hi = up.jumps[0].x;
    size_t differ_inside = 0, differ_outside = 0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double x = values[i];
        const auto& a = up.occupied[i];
        const auto& b = down.occupied[values.size() - 1 - i];
        const bool same = std::abs(a.n1 - b.n1) <= 1e-6 * std::max(a.n1, 1.0);
        if (x > lo * 1.02 && x < hi * 0.98) differ_inside += !same;
        if (x < lo * 0.98 || x > hi * 1.02) differ_outside += !same;
    }
    CHECK(differ_inside > 0);
    CHECK(differ_outside == 0);
}

TEST_CASE("below-threshold power range produces identical traces and no jumps") {
    const auto sys = baseline_system();
    const auto drv = baseline_drive();
    const auto values = geomspace(0.001 * uW, 0.01 * uW, 41);

    const auto up = follow_hysteresis(sys, drv, SweepAxis::PumpPower, values,
                                      HysteresisMode::Static);
    auto rev = values;
    std::reverse(rev.begin(), rev.end());
    const auto down = follow_hysteresis(sys, drv, SweepAxis::PumpPower, rev,
                                        HysteresisMode::Static);
    CHECK(up.jumps.empty());
    CHECK(down.jumps.empty());
    for (size_t i = 0; i < values.size(); ++i) {
        const auto& a = up.occupied[i];
        const auto& b = down.occupied[values.size() - 1 - i];
        CHECK(a.n1 == Catch::Approx(b.n1).epsilon(1e-9));
    }
}

TEST_CASE("mechanical traces jump at the same axis points as the photon traces") {
    const auto sys = baseline_system();
    const auto drv = baseline_drive();
    const auto values = geomspace(0.001 * uW, 1.0 * uW, 201);
    const auto up = follow_hysteresis(sys, drv, SweepAxis::PumpPower, values,
                                      HysteresisMode::Static);
    REQUIRE(up.jumps.size() == 1);

    // the displacement trace is the same occupied root through a fixed linear
    // map, so its discontinuity must sit at the identical sample index
    std::vector<double> x1s(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        const auto X = steady_displacements(sys, up.occupied[i].n1, up.occupied[i].n2);
        x1s[i] = X[0];
    }
    size_t biggest = 0;
    double biggest_step = 0;
    for (size_t i = 1; i < x1s.size(); ++i) {
        const double step = std::abs(std::log1p(x1s[i]) - std::log1p(x1s[i - 1]));
        if (step > biggest_step) {
            biggest_step = step;
            biggest = i;
        }
    }
    CHECK(biggest == up.jumps[0].index);
}

TEST_CASE("critical axis values: fold powers match the single-cavity analytics") {
    // decouple everything except the pump cavity's own Kerr shift, then the
    // fold powers follow from the cubic discriminant in closed form
    auto sys = baseline_system();
    auto drv = baseline_drive();
    sys.J = 0;
    sys.g21 = sys.g22 = 0;
    drv.p_co = 0;

    const auto c = shift_matrix(sys);
    const auto kf = testutil::kerr_folds(sys.kappa1, drv.delta1, c.c11);
    REQUIRE(kf.bistable);
    const double hbar = 1.054571817e-34;
    auto to_power = [&](double D) {
        return D * hbar * sys.omega_pu / (2 * sys.kappa_e1 * sys.kappa_e1);
    };
    const double p_lo = to_power(kf.D_lo), p_hi = to_power(kf.D_hi);

    const auto values = geomspace(std::min(p_lo, p_hi) * 0.2, std::max(p_lo, p_hi) * 5, 201);
    const auto folds = critical_axis_values(sys, drv, SweepAxis::PumpPower, values);
    REQUIRE(folds.size() == 2);
    CHECK(folds[0].x == Catch::Approx(p_lo).epsilon(1e-5));
    CHECK(folds[1].x == Catch::Approx(p_hi).epsilon(1e-5));
    CHECK(folds[0].count_below == 1);
    CHECK(folds[0].count_above == 3);
    CHECK(folds[1].count_below == 3);
    CHECK(folds[1].count_above == 1);
}

TEST_CASE("fold positions are stable under grid doubling") {
    const auto sys = baseline_system();
    const auto drv = baseline_drive();
    const auto coarse = geomspace(0.001 * uW, 1.0 * uW, 101);
    const auto fine = geomspace(0.001 * uW, 1.0 * uW, 201);

    const auto fa = critical_axis_values(sys, drv, SweepAxis::PumpPower, coarse);
    const auto fb = critical_axis_values(sys, drv, SweepAxis::PumpPower, fine);
    REQUIRE(fa.size() == fb.size());
    for (size_t i = 0; i < fa.size(); ++i)
        CHECK(fa[i].x == Catch::Approx(fb[i].x).epsilon(2e-6));
}

TEST_CASE("lower fold power decreases with control power across the presets") {
    const auto sys = baseline_system();
    const auto values = geomspace(0.001 * uW, 1.0 * uW, 101);

    double prev = 1e300;
    for (double pco_quoted : {0.005, 0.010, 0.015}) {
        DriveParams<double> drv = baseline_drive();
        drv.p_co = 0.05 * pco_quoted * uW;
        const auto folds = critical_axis_values(sys, drv, SweepAxis::PumpPower, values);
        REQUIRE(!folds.empty());
        CHECK(folds[0].x < prev);
        prev = folds[0].x;
    }
}

TEST_CASE("preset catalogue exposes the published panels") {
    const auto& all = figure_presets();
    CHECK(all.size() == 14);

    // family lookup: fig5 resolves to the a/b pair, unknown ids throw
    const auto fam = find_presets("fig5");
    CHECK(fam.size() == 2);
    CHECK_THROWS_AS(find_presets("fig99"), ConfigError);

    for (const auto& p : all) {
        CHECK(!p.variants.empty());
        CHECK(p.axis_values.size() >= 2);
        for (const auto& v : p.variants) {
            CHECK(v.sys.omega_m1 > 0);
            CHECK(v.drv.p_pu >= 0);
        }
    }
}
