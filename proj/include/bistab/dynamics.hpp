#pragma once

// Time evolution of the full 8-dimensional mean-field system, for hysteresis
// ramps and for confirming linear stability verdicts by direct perturbation.
// Integrator: adaptive Dormand-Prince 5(4) with FSAL and a PI step controller.

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "roots.hpp"
#include "stability.hpp"

namespace bistab {

// rhs of the coupled equations at fixed drive
template <class Real = double>
struct FlowField {
    SystemParams<Real> sys;
    DriveParams<Real> drv;

    State8 operator()(double /*t*/, const State8& y) const { return eval(drv, y); }

    State8 eval(const DriveParams<Real>& d, const State8& y) const {
        const Real u1 = y[0], v1 = y[1], u2 = y[2], v2 = y[3];
        const Real X1 = y[4], V1 = y[5], X2 = y[6], V2 = y[7];
        const auto dt = effective_detunings_at(sys, d, X1, X2);
        const Real h1 = sys.kappa1 / 2, h2 = sys.kappa2 / 2;
        const Real s1 =
            std::sqrt(sys.kappa_e1 * drive_amplitude_sq(d.p_pu, sys.kappa_e1, sys.omega_pu));
        const Real s2 =
            std::sqrt(sys.kappa_e2 * drive_amplitude_sq(d.p_co, sys.kappa_e2, sys.omega_co));
        const Real n1 = u1 * u1 + v1 * v1;
        const Real n2 = u2 * u2 + v2 * v2;
        State8 f;
        f[0] = -h1 * u1 + dt[0] * v1 - sys.J * v2 + s1;
        f[1] = -dt[0] * u1 - h1 * v1 + sys.J * u2;
        f[2] = -h2 * u2 + dt[1] * v2 - sys.J * v1 + s2;
        f[3] = -dt[1] * u2 - h2 * v2 + sys.J * u1;
        f[4] = V1;
        f[5] = -sys.gamma_m1 * V1 - sys.omega_m1 * sys.omega_m1 * X1 +
               Real(2) * sys.omega_m1 * (sys.g11 * n1 + sys.g21 * n2);
        f[6] = V2;
        f[7] = -sys.gamma_m2 * V2 - sys.omega_m2 * sys.omega_m2 * X2 +
               Real(2) * sys.omega_m2 * (sys.g12 * n1 + sys.g22 * n2);
        return f;
    }
};

// same flow with the pump power ramped linearly over [0, t_ramp]
template <class Real = double>
struct PumpRampField {
    FlowField<Real> base;
    Real p_from = 0, p_to = 0;
    double t_ramp = 0;

    State8 operator()(double t, const State8& y) const {
        DriveParams<Real> d = base.drv;
        const double frac = t_ramp > 0 ? std::clamp(t / t_ramp, 0.0, 1.0) : 1.0;
        d.p_pu = p_from + (p_to - p_from) * Real(frac);
        return base.eval(d, y);
    }

    Real power_at(double t) const {
        const double frac = t_ramp > 0 ? std::clamp(t / t_ramp, 0.0, 1.0) : 1.0;
        return p_from + (p_to - p_from) * Real(frac);
    }
};

// characteristic per-component magnitudes for integrator error weighting,
// derived from the drive-and-loss envelope of the occupations
template <class Real>
State8 default_error_scales(const SystemParams<Real>& sys, const DriveParams<Real>& drv) {
    detail::BalanceContext<Real> ctx(sys, drv);
    const auto b = detail::occupation_bounds(ctx);
    const Real a1 = std::sqrt(b[0] + Real(1));
    const Real a2 = std::sqrt(b[1] + Real(1));
    const auto X = steady_displacements(sys, b[0] + Real(1), b[1] + Real(1));
    // floor the displacement scales at one quadrature unit: decoupled (g = 0)
    // or undriven setups would otherwise produce zero weights and poison the
    // step-size heuristics
    const Real x1 = std::max(X[0], Real(1));
    const Real x2 = std::max(X[1], Real(1));
    State8 w;
    w << a1, a1, a2, a2, x1, x1 * sys.omega_m1, x2, x2 * sys.omega_m2;
    return w;
}

struct IntegrateOptions {
    double rtol = 1e-8;
    State8 weights = State8::Ones(); // characteristic magnitudes per component
    double h_init = 0;               // 0: choose from the initial slope
    double h_max = std::numeric_limits<double>::infinity();
    long long max_steps = 400'000'000;
};

// Adaptive DP5(4). Calls observer(t, y) after every accepted step (and once at
// t0); an observer returning bool stops the run early on false. Throws
// SolveError if the step budget is exhausted or the step size underflows.
template <class Rhs, class Observer>
void integrate_adaptive(Rhs&& rhs, State8& y, double t0, double t1,
                        const IntegrateOptions& opts, Observer&& observer) {
    auto notify = [&](double tc, const State8& yc) -> bool {
        if constexpr (std::is_void_v<std::invoke_result_t<Observer&, double, const State8&>>) {
            observer(tc, yc);
            return true;
        } else {
            return static_cast<bool>(observer(tc, yc));
        }
    };
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    double t = t0;
    State8 k1 = rhs(t, y);
    if (!notify(t, y)) return;

    auto err_norm = [&](const State8& e, const State8& ya, const State8& yb) {
        double acc = 0;
        for (int i = 0; i < 8; ++i) {
            const double w =
                opts.rtol * (opts.weights[i] + std::max(std::abs(ya[i]), std::abs(yb[i])));
            const double q = e[i] / w;
            acc += q * q;
        }
        return std::sqrt(acc / 8);
    };

    double h = opts.h_init;
    if (h <= 0) {
        double ny = 0, nf = 0;
        for (int i = 0; i < 8; ++i) {
            ny = std::max(ny, std::abs(y[i]) / opts.weights[i] + 1.0);
            nf = std::max(nf, std::abs(k1[i]) / opts.weights[i]);
        }
        h = nf > 0 ? 0.01 * ny / nf : (t1 - t0) * 1e-6;
    }
    h = std::min({h, opts.h_max, t1 - t0});

    double prev_err = 1.0;
    long long steps = 0;
    while (t < t1) {
        if (++steps > opts.max_steps)
            throw SolveError("time integration exceeded the step budget");
        h = std::min({h, opts.h_max, t1 - t});
        if (!(h > 0) || t + h == t)
            throw SolveError("time integration step size underflow");

        const State8 k2 = rhs(t + c2 * h, y + h * (a21 * k1));
        const State8 k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const State8 k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State8 k5 =
            rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State8 k6 =
            rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State8 ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State8 k7 = rhs(t + h, ynew); // FSAL
        const State8 errv =
            h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double err = err_norm(errv, y, ynew);
        if (err <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;
            if (!notify(t, y)) return;
            const double grow =
                0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(prev_err, 0.4 / 5.0);
            h *= std::clamp(grow, 0.2, 5.0);
            prev_err = std::max(err, 1e-10);
        } else {
            h *= std::max(0.9 * std::pow(err, -0.2), 0.2);
        }
    }
}

template <class Rhs>
void integrate_adaptive(Rhs&& rhs, State8& y, double t0, double t1,
                        const IntegrateOptions& opts) {
    integrate_adaptive(static_cast<Rhs&&>(rhs), y, t0, t1, opts,
                       [](double, const State8&) {});
}

// least-stable eigendirection of the linearization at a state (real part of
// the eigenvector of the rightmost eigenvalue), in raw state units
template <class Real>
State8 least_stable_direction(const SystemParams<Real>& s, const DriveParams<Real>& d,
                              const State8& st) {
    const Matrix8 J = assemble_jacobian(s, d, st);
    const State8 sc = balance_scales(s, st);
    Matrix8 Jb;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) Jb(i, j) = J(i, j) * sc[j] / sc[i];
    Eigen::EigenSolver<Matrix8> es(Jb, /*computeEigenvectors=*/true);
    int arg = 0;
    for (int i = 1; i < 8; ++i)
        if (es.eigenvalues()[i].real() > es.eigenvalues()[arg].real()) arg = i;
    State8 dir;
    for (int i = 0; i < 8; ++i) dir[i] = es.eigenvectors()(i, arg).real() * sc[i];
    const double n = dir.norm();
    if (n == 0) {
        for (int i = 0; i < 8; ++i) dir[i] = es.eigenvectors()(i, arg).imag() * sc[i];
    }
    dir.normalize();
    return dir;
}

struct SettleOptions {
    double rhs_tol = 1e-8;      // scaled rhs norm counted as "at rest"
    double quiet_periods = 10;  // mechanical periods the norm must stay at rest
    IntegrateOptions integ;
};

struct IntegrationReport {
    State8 final_state = State8::Zero();
    bool settled = false;
    double settle_time = 0;          // s; start of the quiet stretch
    int nearest_fixed_point = -1;    // index into the supplied root set, -1 if none
    double nearest_distance = std::numeric_limits<double>::infinity();
};

// Integrate at fixed drive until the scaled rhs norm stays below rhs_tol for
// quiet_periods mechanical periods (or t_max runs out). Integration happens in
// scaled time tau = omega_m1 * t, which keeps step sizes O(1). The report
// names the nearest entry of a caller-supplied root set in the occupation
// plane (log1p metric on (n1, n2)).
template <class Real>
IntegrationReport integrate(const SystemParams<Real>& sys, const DriveParams<Real>& drv,
                            State8 y, double t_max, const SettleOptions& sopts = {},
                            const std::vector<Root<Real>>& fixed_points = {}) {
    const double w = sys.omega_m1;
    FlowField<Real> flow{sys, drv};
    IntegrateOptions opts = sopts.integ;
    if ((opts.weights.array() == 1.0).all()) opts.weights = default_error_scales(sys, drv);
    if (!std::isfinite(opts.h_max)) {
        // Near equilibrium the error estimate vanishes and the controller
        // would grow the step onto the stability boundary of the fastest
        // oscillation, where step noise holds the rhs norm above the settle
        // threshold forever. Capping the step at ~1/20 of the fastest period
        // keeps ring-down decay physical all the way to rounding level.
        const double w_fast =
            std::max({sys.omega_m1, sys.omega_m2, std::abs(drv.delta1),
                      std::abs(drv.delta2), sys.kappa1, sys.kappa2});
        opts.h_max = 0.3 * w / w_fast; // in tau units
    }

    const double quiet_span = sopts.quiet_periods * 2.0 * M_PI; // in tau
    double quiet_start = std::numeric_limits<double>::quiet_NaN();
    bool settled = false;

    auto scaled_rhs_norm = [&](const State8& yc) {
        const State8 f = flow(0.0, yc);
        double m = 0;
        for (int i = 0; i < 8; ++i) m = std::max(m, std::abs(f[i]) / (opts.weights[i] * w));
        return m;
    };

    integrate_adaptive([&](double tau, const State8& yc) { return flow(tau / w, yc) / w; },
                       y, 0.0, t_max * w, opts, [&](double tau, const State8& yc) {
                           if (scaled_rhs_norm(yc) < sopts.rhs_tol) {
                               if (std::isnan(quiet_start)) quiet_start = tau;
                               if (tau - quiet_start >= quiet_span) {
                                   settled = true;
                                   return false;
                               }
                           } else {
                               quiet_start = std::numeric_limits<double>::quiet_NaN();
                           }
                           return true;
                       });

    IntegrationReport rep;
    rep.final_state = y;
    rep.settled = settled;
    rep.settle_time = settled ? quiet_start / w : 0.0;
    const double n1 = y[0] * y[0] + y[1] * y[1];
    const double n2 = y[2] * y[2] + y[3] * y[3];
    for (size_t i = 0; i < fixed_points.size(); ++i) {
        const double dist = std::abs(std::log1p(n1) - std::log1p(fixed_points[i].n1)) +
                            std::abs(std::log1p(n2) - std::log1p(fixed_points[i].n2));
        if (dist < rep.nearest_distance) {
            rep.nearest_distance = dist;
            rep.nearest_fixed_point = static_cast<int>(i);
        }
    }
    return rep;
}

struct RampTrace {
    std::vector<double> t;      // s
    std::vector<double> p_pu;   // W, instantaneous ramped power
    std::vector<double> n1, n2; // |a_l|^2 along the trajectory
    std::vector<double> X1, X2;
};

// Slowly ramp the pump power while integrating, sampling the occupied state.
// The ramp must be slow against every relaxation time along the branch for
// the trace to follow the static hysteresis; jump locations then match the
// algebraic fold positions up to critical slowing-down smearing.
template <class Real>
RampTrace ramp_drive(const SystemParams<Real>& sys, const DriveParams<Real>& drv,
                     Real p_from, Real p_to, double t_ramp, int samples,
                     State8 y0, const IntegrateOptions& iopts = {}) {
    const double w = sys.omega_m1;
    DriveParams<Real> d_hi = drv;
    d_hi.p_pu = std::max(p_from, p_to);
    PumpRampField<Real> field{FlowField<Real>{sys, drv}, p_from, p_to, t_ramp};
    IntegrateOptions opts = iopts;
    if ((opts.weights.array() == 1.0).all()) opts.weights = default_error_scales(sys, d_hi);

    RampTrace tr;
    tr.t.reserve(samples + 1);
    const double dtau = t_ramp * w / samples;
    double next_tau = 0;
    State8 y = y0;
    integrate_adaptive([&](double tau, const State8& yc) { return field(tau / w, yc) / w; },
                       y, 0.0, t_ramp * w, opts, [&](double tau, const State8& yc) {
                           if (tau + 1e-12 < next_tau) return;
                           next_tau = tau + dtau;
                           tr.t.push_back(tau / w);
                           tr.p_pu.push_back(field.power_at(tau / w));
                           tr.n1.push_back(yc[0] * yc[0] + yc[1] * yc[1]);
                           tr.n2.push_back(yc[2] * yc[2] + yc[3] * yc[3]);
                           tr.X1.push_back(yc[4]);
                           tr.X2.push_back(yc[6]);
                       });
    // the sampling stride can step past the end; pin the final state so the
    // trace always covers the full ramp
    if (tr.t.empty() || tr.t.back() < t_ramp) {
        tr.t.push_back(t_ramp);
        tr.p_pu.push_back(field.power_at(t_ramp));
        tr.n1.push_back(y[0] * y[0] + y[1] * y[1]);
        tr.n2.push_back(y[2] * y[2] + y[3] * y[3]);
        tr.X1.push_back(y[4]);
        tr.X2.push_back(y[6]);
    }
    return tr;
}

// Relaxation probe: displace a steady state by the fraction eps of its own
// scale along a direction, evolve for the horizon, return final/initial
// distance in the balanced norm (initial distance is eps by construction).
// Ratios << 1 confirm Stable, >> 1 confirm Unstable. The direction is
// re-normalized in balanced units, so any raw-unit mix works — a raw vector
// dominated by the huge velocity components still perturbs every mode.
template <class Real>
double relaxation_ratio(const SystemParams<Real>& s, const DriveParams<Real>& d,
                        const State8& fixed_point, const State8& direction, double eps,
                        double horizon, const IntegrateOptions& opts = {}) {
    const State8 sc = balance_scales(s, fixed_point);
    auto dist = [&](const State8& y) {
        double acc = 0;
        for (int i = 0; i < 8; ++i) {
            const double q = (y[i] - fixed_point[i]) / sc[i];
            acc += q * q;
        }
        return std::sqrt(acc);
    };
    State8 db;
    for (int i = 0; i < 8; ++i) db[i] = direction[i] / sc[i];
    const double dn = db.norm();
    if (dn == 0) return 0.0;
    State8 y = fixed_point;
    for (int i = 0; i < 8; ++i) y[i] += eps * (db[i] / dn) * sc[i];
    const double d0 = dist(y);
    IntegrateOptions io = opts;
    if ((io.weights.array() == 1.0).all()) io.weights = sc;
    FlowField<Real> flow{s, d};
    integrate_adaptive(flow, y, 0.0, horizon, io);
    return dist(y) / d0;
}

} // namespace bistab
