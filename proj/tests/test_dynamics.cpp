// Time-evolution checks: the adaptive integrator against closed-form linear
// solutions, settling behaviour, relaxation/escape probes at classified fixed
// points, ramp adiabaticity, and failure modes of the step controller.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "bistab/dynamics.hpp"
#include "bistab/exact.hpp"
#include "bistab/presets.hpp"
#include "bistab/roots.hpp"
#include "bistab/stability.hpp"

using namespace bistab;

TEST_CASE("decoupled flow matches the closed-form linear solution") {
    // With every coupling off, each cavity is a driven damped rotation in the
    // (u, v) plane and each resonator a free damped oscillator. Both have
    // textbook solutions the integrator has to reproduce to its tolerance.
    SystemParams<double> sys = baseline_system();
    DriveParams<double> drv = baseline_drive();
    sys.g11 = sys.g12 = sys.g21 = sys.g22 = 0.0;
    sys.J = 0.0;

    const double h1 = sys.kappa1 / 2, h2 = sys.kappa2 / 2;
    const double s1 = std::sqrt(sys.kappa_e1 *
                                drive_amplitude_sq(drv.p_pu, sys.kappa_e1, sys.omega_pu));
    const double s2 = std::sqrt(sys.kappa_e2 *
                                drive_amplitude_sq(drv.p_co, sys.kappa_e2, sys.omega_co));

    State8 y0;
    y0 << 50.0, -20.0, 3.0, 7.0, 0.3, 0.0, -0.1, 2e9;

    const double t1 = 2e-9; // a few optical decay times, thousands of (u,v) turns
    State8 y = y0;
    IntegrateOptions opts;
    opts.rtol = 1e-10;
    opts.weights = default_error_scales(sys, drv);
    integrate_adaptive(FlowField<double>{sys, drv}, y, 0.0, t1, opts);

    // da/dt = -(h + i*delta) a + s  =>  a(t) = a_inf + (a0 - a_inf) e^{-(h+i*delta)t}
    auto cavity_ref = [&](std::complex<double> a0, double h, double delta,
                          double s) -> std::complex<double> {
        const std::complex<double> lam(h, delta);
        const std::complex<double> a_inf = s / lam;
        return a_inf + (a0 - a_inf) * std::exp(-lam * t1);
    };
    const auto a1 = cavity_ref({y0[0], y0[1]}, h1, drv.delta1, s1);
    const auto a2 = cavity_ref({y0[2], y0[3]}, h2, drv.delta2, s2);

    // free damped oscillator: X'' = -gamma X' - w^2 X
    auto mech_ref = [&](double X0, double V0, double w, double g) {
        const double wd = std::sqrt(w * w - g * g / 4);
        const double c = std::cos(wd * t1), s = std::sin(wd * t1);
        const double e = std::exp(-g * t1 / 2);
        const double B = (V0 + g * X0 / 2) / wd;
        const double X = e * (X0 * c + B * s);
        const double V = e * ((-g / 2) * (X0 * c + B * s) + wd * (-X0 * s + B * c));
        return std::pair<double, double>{X, V};
    };
    const auto [X1, V1] = mech_ref(y0[4], y0[5], sys.omega_m1, sys.gamma_m1);
    const auto [X2, V2] = mech_ref(y0[6], y0[7], sys.omega_m2, sys.gamma_m2);

    State8 ref;
    ref << a1.real(), a1.imag(), a2.real(), a2.imag(), X1, V1, X2, V2;

    // thousands of periods at rtol 1e-10: allow 1e-6 of the component scale
    for (int i = 0; i < 8; ++i) {
        INFO("component " << i << ": got " << y[i] << " want " << ref[i]);
        CHECK(std::abs(y[i] - ref[i]) <= 1e-6 * opts.weights[i]);
    }
}

TEST_CASE("undriven system rings down to the origin and reports it") {
    SystemParams<double> sys = baseline_system();
    // stiffer mechanical damping so the ring-down fits a short horizon
    sys.gamma_m1 = sys.gamma_m2 = 2 * M_PI * 10e6;
    DriveParams<double> drv = baseline_drive();
    drv.p_pu = 0.0;
    drv.p_co = 0.0;

    State8 y0 = State8::Zero();
    y0[4] = 0.05;
    y0[6] = -0.02;

    IntegrationReport rep = integrate(sys, drv, y0, 5e-6, {}, {{0.0, 0.0}});
    CHECK(rep.settled);
    CHECK(rep.nearest_fixed_point == 0);
    CHECK(rep.nearest_distance < 1e-12);
    CHECK(std::abs(rep.final_state[4]) < 1e-8);
    CHECK(std::abs(rep.final_state[6]) < 1e-8);
}

TEST_CASE("exact fixed point is stationary under the full flow") {
    const SystemParams<double> sys = baseline_system();
    const DriveParams<double> drv = baseline_drive();
    const auto roots = solve_exact_complex(sys, drv);
    REQUIRE(roots.size() == 3);

    // lowest branch; its reconstructed state nulls the flow to solver tolerance
    const State8 y0 = reconstruct_state(sys, drv, roots[0].n1, roots[0].n2,
                                        AmplitudeReconstruction::ExactComplex);
    REQUIRE(flow_residual(sys, drv, y0) < 1e-10);

    State8 y = y0;
    IntegrateOptions opts;
    opts.rtol = 1e-10;
    opts.weights = balance_scales(sys, y0); // error control in local state units
    integrate_adaptive(FlowField<double>{sys, drv}, y, 0.0, 2e-7, opts);

    const double n1 = y[0] * y[0] + y[1] * y[1];
    const double n2 = y[2] * y[2] + y[3] * y[3];
    CHECK(std::abs(n1 / roots[0].n1 - 1.0) < 1e-6);
    CHECK(std::abs(n2 / roots[0].n2 - 1.0) < 1e-6);
    CHECK(flow_residual(sys, drv, y) < 1e-7);
}

TEST_CASE("perturbations relax at a stable point and grow at an unstable one") {
    const SystemParams<double> sys = baseline_system();
    const DriveParams<double> drv = baseline_drive();

    SECTION("stable lowest branch contracts along its slowest direction") {
        const auto roots = solve_exact_complex(sys, drv);
        REQUIRE(roots.size() == 3);
        const State8 y0 = reconstruct_state(sys, drv, roots[0].n1, roots[0].n2,
                                            AmplitudeReconstruction::ExactComplex);
        const StabilityResult cls = classify_state(sys, drv, y0);
        REQUIRE(cls.cls == StabilityClass::Stable);

        const double slow = std::abs(cls.max_real);
        const double horizon = std::min(2.0 / slow, 8e-6);
        const State8 dir = least_stable_direction(sys, drv, y0);
        CHECK(std::abs(dir.norm() - 1.0) < 1e-12);

        const double ratio = relaxation_ratio(sys, drv, y0, dir, 1e-3, horizon);
        INFO("contraction ratio " << ratio << " over " << horizon << " s");
        CHECK(ratio < 0.5);
    }

    SECTION("unstable middle branch escapes and lands on an outer branch") {
        // mid-window pump keeps the three branches far apart in occupation
        DriveParams<double> d = drv;
        d.p_pu = 0.30e-6;
        const auto exact = solve_exact_complex(sys, d);
        REQUIRE(exact.size() == 3);
        const StabilityResult mid = classify(sys, d, exact[1].n1, exact[1].n2,
                                             AmplitudeReconstruction::ExactComplex);
        REQUIRE(mid.cls == StabilityClass::Unstable);

        const State8 y0 = reconstruct_state(sys, d, exact[1].n1, exact[1].n2,
                                            AmplitudeReconstruction::ExactComplex);
        const double grow = mid.max_real;
        REQUIRE(grow > 0);
        const double horizon = 3.0 / grow;
        const State8 dir = least_stable_direction(sys, d, y0);

        const double ratio = relaxation_ratio(sys, d, y0, dir, 1e-3, horizon);
        INFO("escape ratio " << ratio << " over " << horizon << " s");
        CHECK(ratio > 5.0);

        // long free run afterwards must end up near one of the outer branches
        const State8 sc = balance_scales(sys, y0);
        State8 db;
        for (int i = 0; i < 8; ++i) db[i] = dir[i] / sc[i];
        db /= db.norm();
        State8 y = y0;
        for (int i = 0; i < 8; ++i) y[i] += 1e-3 * db[i] * sc[i];
        IntegrationReport rep = integrate(sys, d, y, 30e-6, {}, exact);
        INFO("landed nearest branch " << rep.nearest_fixed_point << " at distance "
                                      << rep.nearest_distance);
        CHECK((rep.nearest_fixed_point == 0 || rep.nearest_fixed_point == 2));
        CHECK(rep.nearest_distance < 0.3);
    }
}

TEST_CASE("settled occupations are integrator-tolerance independent") {
    SystemParams<double> sys = baseline_system();
    sys.gamma_m1 = sys.gamma_m2 = 2 * M_PI * 1e6; // shorter ring-down, same physics
    DriveParams<double> drv = baseline_drive();
    drv.p_pu = 0.01e-6; // single-branch drive: every start settles to one point

    const auto exact = solve_exact_complex(sys, drv);
    REQUIRE(exact.size() == 1);

    auto settle_from_vacuum = [&](double rtol) {
        SettleOptions sopts;
        sopts.integ.rtol = rtol;
        IntegrationReport rep = integrate(sys, drv, State8::Zero(), 3e-5, sopts, exact);
        REQUIRE(rep.settled);
        REQUIRE(flow_residual(sys, drv, rep.final_state) < 1e-7);
        return rep;
    };

    const IntegrationReport a = settle_from_vacuum(1e-8);
    const IntegrationReport b = settle_from_vacuum(0.5e-8);

    auto occ = [](const IntegrationReport& r) {
        const State8& y = r.final_state;
        return std::pair<double, double>{y[0] * y[0] + y[1] * y[1],
                                         y[2] * y[2] + y[3] * y[3]};
    };
    const auto [n1a, n2a] = occ(a);
    const auto [n1b, n2b] = occ(b);
    CHECK(std::abs(n1a / n1b - 1.0) < 1e-6);
    CHECK(std::abs(n2a / n2b - 1.0) < 1e-6);

    // and the settled point is the true fixed point
    CHECK(std::abs(n1a / exact[0].n1 - 1.0) < 1e-5);
    CHECK(std::abs(n2a / exact[0].n2 - 1.0) < 1e-5);
    CHECK(a.nearest_fixed_point == 0);
}

TEST_CASE("pump ramps hold a branch and follow slow power changes") {
    SystemParams<double> sys = baseline_system();
    sys.gamma_m1 = sys.gamma_m2 = 2 * M_PI * 1e6;
    DriveParams<double> drv = baseline_drive();

    SECTION("constant-power ramp stays on the starting branch") {
        drv.p_pu = 0.10e-6;
        const auto roots = solve_exact_complex(sys, drv);
        REQUIRE(roots.size() == 3);
        const State8 y0 = reconstruct_state(sys, drv, roots[0].n1, roots[0].n2,
                                            AmplitudeReconstruction::ExactComplex);

        const int samples = 50;
        RampTrace tr = ramp_drive(sys, drv, drv.p_pu, drv.p_pu, 2e-6, samples, y0);
        REQUIRE(tr.n1.size() >= static_cast<size_t>(samples));
        for (double n1 : tr.n1) CHECK(std::abs(n1 / roots[0].n1 - 1.0) < 0.02);
        CHECK(std::abs(tr.n1.back() / tr.n1.front() - 1.0) < 1e-3);
        CHECK(tr.p_pu.front() == tr.p_pu.back());
    }

    SECTION("slow ramp across a single-branch range tracks the static root") {
        drv.p_pu = 0.01e-6;
        const auto start = solve_exact_complex(sys, drv);
        REQUIRE(start.size() == 1);
        DriveParams<double> d_end = drv;
        d_end.p_pu = 0.02e-6;
        const auto stop = solve_exact_complex(sys, d_end);
        REQUIRE(stop.size() == 1);

        const State8 y0 = reconstruct_state(sys, drv, start[0].n1, start[0].n2,
                                            AmplitudeReconstruction::ExactComplex);
        RampTrace tr = ramp_drive(sys, drv, 0.01e-6, 0.02e-6, 4e-6, 40, y0);
        CHECK(std::abs(tr.p_pu.back() / 0.02e-6 - 1.0) < 1e-9);
        CHECK(std::abs(tr.n1.back() / stop[0].n1 - 1.0) < 0.02);
        CHECK(std::abs(tr.n2.back() / stop[0].n2 - 1.0) < 0.02);
        // occupation grows monotonically apart from the mechanical ring
        CHECK(tr.n1.back() > tr.n1.front());
    }
}

TEST_CASE("exhausted step budget raises the solver error") {
    const SystemParams<double> sys = baseline_system();
    const DriveParams<double> drv = baseline_drive();
    State8 y = State8::Zero();
    IntegrateOptions opts;
    opts.weights = default_error_scales(sys, drv);
    opts.max_steps = 10;
    CHECK_THROWS_AS(
        integrate_adaptive(FlowField<double>{sys, drv}, y, 0.0, 1e-6, opts),
        SolveError);
}
