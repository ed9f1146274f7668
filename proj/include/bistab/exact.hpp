#pragma once

// Fixed points of the full complex-amplitude flow. The photon balance adds
// the tunneling feed as an incoherent power J^2 n; the flow adds the tunneled
// field coherently, so its fixed points sit at (slightly) different
// occupations. This solver finds them in amplitude space: with the mechanics
// slaved to the static response X_m(n), a fixed point is a zero of the four
// optical rows of the flow, located by damped Newton from many starts (the
// balance roots plus a coarse magnitude/phase lattice) and verified against
// the full 8-dimensional right-hand side.
//
// At any such zero the occupation pair (n1, n2) determines the amplitudes
// uniquely (the optical system is linear once the detunings are fixed, and
// the detunings depend only on the occupations), so roots are returned and
// deduplicated in occupation space; reconstruct_state with ExactComplex
// rebuilds the exact amplitudes bit-for-bit from a returned pair.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "dynamics.hpp"
#include "roots.hpp"
#include "stability.hpp"

namespace bistab {

template <class Real = double>
struct ExactSolveOptions {
    int magnitudes = 5;        // radial lattice points per cavity
    int phases = 4;            // phase lattice points per cavity
    Real tol = 1e-11;          // scaled optical residual accepted as converged
    Real dedup_rel = 1e-6;     // occupation-space duplicate threshold
    int newton_max_iters = 80;
    RootFindOptions<Real> seed_roots{}; // balance solve used for seeding
};

// Scaled residual of the full flow at a state: per-row magnitude of the
// right-hand side relative to the size of the terms entering that row. Zero
// exactly at a fixed point; ~1e-15 at a numerically converged one.
template <class Real>
double flow_residual(const SystemParams<Real>& s, const DriveParams<Real>& d,
                     const State8& st) {
    const FlowField<Real> flow{s, d};
    const State8 f = flow(0.0, st);
    const auto dt = effective_detunings_at(s, d, st[4], st[6]);
    const Real h1 = s.kappa1 / 2, h2 = s.kappa2 / 2;
    const Real s1 = std::sqrt(s.kappa_e1 * drive_amplitude_sq(d.p_pu, s.kappa_e1, s.omega_pu));
    const Real s2 = std::sqrt(s.kappa_e2 * drive_amplitude_sq(d.p_co, s.kappa_e2, s.omega_co));
    const Real u1 = st[0], v1 = st[1], u2 = st[2], v2 = st[3];
    const Real X1 = st[4], V1 = st[5], X2 = st[6], V2 = st[7];
    const Real n1 = u1 * u1 + v1 * v1, n2 = u2 * u2 + v2 * v2;

    auto rowmax = [](std::initializer_list<Real> tt) {
        Real m = Real(1e-300);
        for (Real t : tt) m = std::max(m, std::abs(t));
        return m;
    };
    const std::array<Real, 8> scale = {
        rowmax({h1 * u1, dt[0] * v1, s.J * v2, s1}),
        rowmax({dt[0] * u1, h1 * v1, s.J * u2, s1}),
        rowmax({h2 * u2, dt[1] * v2, s.J * v1, s2}),
        rowmax({dt[1] * u2, h2 * v2, s.J * u1, s2}),
        rowmax({V1, s.omega_m1 * X1, Real(1)}),
        rowmax({s.gamma_m1 * V1, s.omega_m1 * s.omega_m1 * X1,
                Real(2) * s.omega_m1 * (s.g11 * n1 + s.g21 * n2)}),
        rowmax({V2, s.omega_m2 * X2, Real(1)}),
        rowmax({s.gamma_m2 * V2, s.omega_m2 * s.omega_m2 * X2,
                Real(2) * s.omega_m2 * (s.g12 * n1 + s.g22 * n2)})};
    double r = 0;
    for (int i = 0; i < 8; ++i) r = std::max(r, std::abs(f[i]) / scale[i]);
    return r;
}

template <class Real>
double flow_residual(const SystemParams<Real>& s, const DriveParams<Real>& d, Real n1,
                     Real n2) {
    return flow_residual(s, d,
                         reconstruct_state(s, d, n1, n2, AmplitudeReconstruction::ExactComplex));
}

namespace detail {

// assemble the full state from optical amplitudes with the mechanics slaved
template <class Real>
inline State8 slaved_state(const SystemParams<Real>& s, const Eigen::Vector4d& z) {
    const Real n1 = Real(z[0] * z[0] + z[1] * z[1]);
    const Real n2 = Real(z[2] * z[2] + z[3] * z[3]);
    const auto X = steady_displacements(s, n1, n2);
    State8 st;
    st << z[0], z[1], z[2], z[3], X[0], Real(0), X[1], Real(0);
    return st;
}

// damped Newton on the four optical rows; true on convergence (scaled)
template <class Real>
inline bool polish_amplitudes(const SystemParams<Real>& s, const DriveParams<Real>& d,
                              Eigen::Vector4d& z, Real tol, int max_iters) {
    const FlowField<Real> flow{s, d};

    auto scaled_sq = [&](const Eigen::Vector4d& zz) {
        const State8 st = slaved_state(s, zz);
        return std::pow(flow_residual(s, d, st), 2);
    };
    auto reduced_jacobian = [&](const Eigen::Vector4d& zz) {
        const State8 st = slaved_state(s, zz);
        const Matrix8 J8 = assemble_jacobian(s, d, st);
        // chain rule through the slaved displacements:
        // dX_m/dz_j picks up 4 g_{jm} z_j / omega_m
        Eigen::Matrix4d J;
        const std::array<double, 4> dX1 = {
            4 * double(s.g11) * zz[0] / double(s.omega_m1),
            4 * double(s.g11) * zz[1] / double(s.omega_m1),
            4 * double(s.g21) * zz[2] / double(s.omega_m1),
            4 * double(s.g21) * zz[3] / double(s.omega_m1)};
        const std::array<double, 4> dX2 = {
            4 * double(s.g12) * zz[0] / double(s.omega_m2),
            4 * double(s.g12) * zz[1] / double(s.omega_m2),
            4 * double(s.g22) * zz[2] / double(s.omega_m2),
            4 * double(s.g22) * zz[3] / double(s.omega_m2)};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                J(i, j) = J8(i, j) + J8(i, 4) * dX1[j] + J8(i, 6) * dX2[j];
        return J;
    };

    double phi = scaled_sq(z);
    for (int it = 0; it < max_iters; ++it) {
        if (phi <= double(tol) * double(tol)) return true;
        const State8 st = slaved_state(s, z);
        const State8 f = flow(0.0, st);
        const Eigen::Vector4d r(f[0], f[1], f[2], f[3]);
        const Eigen::Matrix4d J = reduced_jacobian(z);
        const Eigen::Vector4d step = J.fullPivLu().solve(r);
        if (!step.allFinite()) return false;
        bool accepted = false;
        double lam = 1.0;
        for (int ls = 0; ls < 16; ++ls, lam /= 2) {
            const Eigen::Vector4d trial = z - lam * step;
            const double tphi = scaled_sq(trial);
            if (tphi < phi) {
                z = trial;
                phi = tphi;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    return phi <= double(tol) * double(tol);
}

} // namespace detail

// All fixed points of the exact flow, as occupation pairs sorted by n1.
template <class Real>
std::vector<Root<Real>> solve_exact_complex(const SystemParams<Real>& sys,
                                            const DriveParams<Real>& drv,
                                            const ExactSolveOptions<Real>& opts = {}) {
    std::vector<Eigen::Vector4d> seeds;

    // balance roots, rebuilt with the coherent two-port amplitudes
    const auto balance = find_all_roots(sys, drv, opts.seed_roots);
    for (const auto& r : balance) {
        const State8 st = reconstruct_state(sys, drv, r.n1, r.n2,
                                            AmplitudeReconstruction::ExactComplex);
        seeds.emplace_back(st[0], st[1], st[2], st[3]);
        const State8 sb = reconstruct_state(sys, drv, r.n1, r.n2,
                                            AmplitudeReconstruction::BalanceModuli);
        seeds.emplace_back(sb[0], sb[1], sb[2], sb[3]);
    }

    // coarse magnitude/phase lattice up to the occupation envelope
    detail::BalanceContext<Real> ctx(sys, drv);
    const auto bounds = detail::occupation_bounds(ctx);
    const double a1max = std::sqrt(double(bounds[0]) + 1.0);
    const double a2max = std::sqrt(double(bounds[1]) + 1.0);
    const int M = std::max(opts.magnitudes, 1), P = std::max(opts.phases, 1);
    std::vector<double> m1(M), m2(M), ph(P);
    for (int i = 0; i < M; ++i) {
        const double f = M == 1 ? 1.0 : std::pow(0.05, 1.0 - double(i) / double(M - 1));
        m1[i] = a1max * f;
        m2[i] = a2max * f;
    }
    for (int i = 0; i < P; ++i) ph[i] = 2.0 * M_PI * double(i) / double(P);
    for (double r1 : m1)
        for (double t1 : ph)
            for (double r2 : m2)
                for (double t2 : ph)
                    seeds.emplace_back(r1 * std::cos(t1), r1 * std::sin(t1),
                                       r2 * std::cos(t2), r2 * std::sin(t2));
    seeds.emplace_back(0, 0, 0, 0);

    std::vector<Root<Real>> roots;
    for (Eigen::Vector4d z : seeds) {
        if (!detail::polish_amplitudes(sys, drv, z, opts.tol, opts.newton_max_iters)) continue;
        const Real n1 = Real(z[0] * z[0] + z[1] * z[1]);
        const Real n2 = Real(z[2] * z[2] + z[3] * z[3]);
        // final gate: the full flow must vanish at the reconstructed state
        if (flow_residual(sys, drv, n1, n2) > double(opts.tol) * 10) continue;
        roots.push_back({n1, n2});
    }
    detail::sort_roots(roots);
    detail::dedup_sorted(roots, opts.dedup_rel);
    return roots;
}

} // namespace bistab
