#pragma once

// Linear stability of a steady state under the full coupled dynamics.
//
// State vector (8 real components):
//   [Re a1, Im a1, Re a2, Im a2, X1, V1, X2, V2]
// The optical rows linearize the driven cavity equations at the operating
// point; each mechanical pair contributes a damped-oscillator companion block
// [[0, 1], [-omega_m^2, -gamma_m]] with radiation-pressure coupling entering
// the velocity rows. A steady state is Stable when every eigenvalue satisfies
// Re(lambda) < -eps with eps = 1e-9 * omega_m1, Unstable when any exceeds
// +eps, Marginal in between. Saddle points of the static balance and
// dynamically antidamped (oscillatory) branches both land in Unstable, which
// is what perturbed time evolution confirms.

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "model.hpp"
#include "roots.hpp"

namespace bistab {

enum class StabilityClass { Stable, Unstable, Marginal };

inline char stability_tag(StabilityClass c) {
    switch (c) {
        case StabilityClass::Stable: return 'S';
        case StabilityClass::Unstable: return 'U';
        default: return 'M';
    }
}

// How optical amplitudes are rebuilt from a photon-balance root (n1, n2):
//  - BalanceModuli: moduli fixed to sqrt(n_l), phases taken from the coherent
//    two-port solve. Matches the balance the roots actually satisfy. Default.
//  - ExactComplex: amplitudes from the coherent two-port solve as-is; moduli
//    then differ from sqrt(n_l) by the tunneling interference terms.
enum class AmplitudeReconstruction { BalanceModuli, ExactComplex };

using State8 = Eigen::Matrix<double, 8, 1>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

template <class Real>
State8 reconstruct_state(const SystemParams<Real>& s, const DriveParams<Real>& d, Real n1,
                         Real n2,
                         AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli) {
    const auto dt = effective_detunings(s, d, n1, n2);
    const auto amps = coherent_amplitudes(s, d, dt[0], dt[1]);
    std::complex<Real> a1 = amps[0], a2 = amps[1];
    if (mode == AmplitudeReconstruction::BalanceModuli) {
        auto rescale = [](std::complex<Real> a, Real n) {
            const Real mag = std::abs(a);
            if (mag > Real(0)) return a * (std::sqrt(n) / mag);
            return std::complex<Real>(std::sqrt(n), Real(0));
        };
        a1 = rescale(a1, n1);
        a2 = rescale(a2, n2);
    }
    const auto X = steady_displacements(s, Real(std::norm(a1)), Real(std::norm(a2)));
    State8 st;
    st << a1.real(), a1.imag(), a2.real(), a2.imag(), X[0], Real(0), X[1], Real(0);
    return st;
}

// analytic Jacobian of the 8-dimensional flow at an arbitrary state
template <class Real>
Matrix8 assemble_jacobian(const SystemParams<Real>& s, const DriveParams<Real>& d,
                          const State8& st) {
    const Real u1 = st[0], v1 = st[1], u2 = st[2], v2 = st[3];
    const Real X1 = st[4], X2 = st[6];
    const auto dt = effective_detunings_at(s, d, X1, X2);
    const Real h1 = s.kappa1 / 2, h2 = s.kappa2 / 2;
    const Real w1 = s.omega_m1, w2 = s.omega_m2;

    Matrix8 J = Matrix8::Zero();
    // d(u1)/dt = -h1 u1 + dt1 v1 - J v2 + drive
    J(0, 0) = -h1;
    J(0, 1) = dt[0];
    J(0, 3) = -s.J;
    J(0, 4) = -s.g11 * v1;
    J(0, 6) = -s.g12 * v1;
    // d(v1)/dt = -dt1 u1 - h1 v1 + J u2
    J(1, 0) = -dt[0];
    J(1, 1) = -h1;
    J(1, 2) = s.J;
    J(1, 4) = s.g11 * u1;
    J(1, 6) = s.g12 * u1;
    // d(u2)/dt = -h2 u2 + dt2 v2 - J v1 + drive
    J(2, 1) = -s.J;
    J(2, 2) = -h2;
    J(2, 3) = dt[1];
    J(2, 4) = -s.g21 * v2;
    J(2, 6) = -s.g22 * v2;
    // d(v2)/dt = -dt2 u2 - h2 v2 + J u1
    J(3, 0) = s.J;
    J(3, 2) = -dt[1];
    J(3, 3) = -h2;
    J(3, 4) = s.g21 * u2;
    J(3, 6) = s.g22 * u2;
    // mechanical companion pairs, radiation pressure in the velocity rows
    J(4, 5) = Real(1);
    J(5, 0) = Real(4) * w1 * s.g11 * u1;
    J(5, 1) = Real(4) * w1 * s.g11 * v1;
    J(5, 2) = Real(4) * w1 * s.g21 * u2;
    J(5, 3) = Real(4) * w1 * s.g21 * v2;
    J(5, 4) = -w1 * w1;
    J(5, 5) = -s.gamma_m1;
    J(6, 7) = Real(1);
    J(7, 0) = Real(4) * w2 * s.g12 * u1;
    J(7, 1) = Real(4) * w2 * s.g12 * v1;
    J(7, 2) = Real(4) * w2 * s.g22 * u2;
    J(7, 3) = Real(4) * w2 * s.g22 * v2;
    J(7, 6) = -w2 * w2;
    J(7, 7) = -s.gamma_m2;
    return J;
}

// similarity scaling that brings amplitude, displacement and velocity rows to
// comparable magnitude before the eigensolve (does not change eigenvalues)
template <class Real>
inline State8 balance_scales(const SystemParams<Real>& s, const State8& st) {
    const Real aref = std::max({std::abs(st[0]), std::abs(st[1]), std::abs(st[2]),
                                std::abs(st[3]), Real(1)});
    const Real xref = std::max({std::abs(st[4]), std::abs(st[6]), Real(1)});
    State8 sc;
    sc << aref, aref, aref, aref, xref, xref * s.omega_m1, xref, xref * s.omega_m2;
    return sc;
}

struct StabilityResult {
    StabilityClass cls = StabilityClass::Marginal;
    double max_real = 0;                                // most unstable Re(lambda), rad/s
    std::array<std::complex<double>, 8> eigenvalues{};  // unsorted
};

template <class Real>
StabilityResult classify_state(const SystemParams<Real>& s, const DriveParams<Real>& d,
                               const State8& st) {
    const Matrix8 J = assemble_jacobian(s, d, st);
    const State8 sc = balance_scales(s, st);
    Matrix8 Jb;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) Jb(i, j) = J(i, j) * sc[j] / sc[i] / s.omega_m1;
    Eigen::EigenSolver<Matrix8> es(Jb, /*computeEigenvectors=*/false);

    StabilityResult out;
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 8; ++i) {
        const std::complex<double> lam = es.eigenvalues()[i] * s.omega_m1;
        out.eigenvalues[i] = lam;
        mx = std::max(mx, lam.real());
    }
    out.max_real = mx;
    const double eps = 1e-9 * s.omega_m1;
    if (mx < -eps) out.cls = StabilityClass::Stable;
    else if (mx > eps) out.cls = StabilityClass::Unstable;
    else out.cls = StabilityClass::Marginal;
    return out;
}

template <class Real>
StabilityResult classify(const SystemParams<Real>& s, const DriveParams<Real>& d, Real n1,
                         Real n2,
                         AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli) {
    return classify_state(s, d, reconstruct_state(s, d, n1, n2, mode));
}

// Root lies close to a fold of the static balance: the 2x2 Jacobian of the
// balance is nearly singular there, and stability tags are unreliable within
// solver tolerance of the fold.
template <class Real>
bool fold_proximal(const SystemParams<Real>& s, const DriveParams<Real>& d, Real n1, Real n2,
                   Real rel_tol = Real(1e-6)) {
    const auto Jm = photon_balance_jacobian(s, d, n1, n2);
    const Real det = Jm[0] * Jm[3] - Jm[1] * Jm[2];
    const Real r0 = std::hypot(Jm[0], Jm[1]);
    const Real r1 = std::hypot(Jm[2], Jm[3]);
    const Real scale = std::max(r0 * r1, Real(1e-300));
    return std::abs(det) < rel_tol * scale;
}

// Central finite-difference Jacobian of a callable rhs(state)->State8, step
// per component h_i = h_rel * max(|x_i|, 1).
template <class Rhs>
Matrix8 finite_difference_jacobian(Rhs&& rhs, const State8& st, double h_rel = 1e-6) {
    Matrix8 J;
    for (int j = 0; j < 8; ++j) {
        const double h = h_rel * std::max(std::abs(st[j]), 1.0);
        State8 p = st, m = st;
        p[j] += h;
        m[j] -= h;
        const State8 fp = rhs(p);
        const State8 fm = rhs(m);
        for (int i = 0; i < 8; ++i) J(i, j) = (fp[i] - fm[i]) / (2 * h);
    }
    return J;
}

// Error metric for Jacobian validation: both matrices are brought to the
// balanced scale, then compared in max norm relative to the largest balanced
// entry. Keeps the optical block visible next to the omega_m^2 mechanical
// entries.
template <class Real>
double jacobian_relative_error(const SystemParams<Real>& s, const State8& st,
                               const Matrix8& analytic, const Matrix8& fd) {
    const State8 sc = balance_scales(s, st);
    double num = 0, den = 0;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            const double w = sc[j] / sc[i];
            num = std::max(num, std::abs(analytic(i, j) - fd(i, j)) * w);
            den = std::max(den, std::abs(analytic(i, j)) * w);
        }
    }
    return den > 0 ? num / den : num;
}

} // namespace bistab
