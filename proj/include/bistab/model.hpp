#pragma once

// Two optical cavities coupled by tunneling J, each dispersively coupled to two
// mechanical modes. Classical mean-field equations (rotating frames of the two
// drive lasers; detunings delta_l = cavity - laser):
//
//   da1/dt = -(i*dt1(X) + kappa1/2) a1 + i J a2 + sqrt(kappa_e1) E_pu
//   da2/dt = -(i*dt2(X) + kappa2/2) a2 + i J a1 + sqrt(kappa_e2) E_co
//   d2Xm/dt2 = -gamma_m dXm/dt - omega_m^2 Xm + 2 omega_m (g_1m n1 + g_2m n2)
//
// with dt1 = delta1 - g11 X1 - g12 X2, dt2 = delta2 - g21 X1 - g22 X2 and
// n_l = |a_l|^2. Displacements are in zero-point units, amplitudes in photon
// units, every rate in rad/s.
//
// Eliminating the mechanics (X at its static value) closes the photon balance
// into two coupled cubic-like equations in (n1, n2); that algebraic system is
// what the root finder solves, and the full 8-dimensional linearization of the
// equations above is what decides stability.

#include <array>
#include <cmath>
#include <complex>

namespace bistab {

inline constexpr double hbar = 1.054571817e-34; // J*s

template <class Real = double>
struct SystemParams {
    Real omega_pu = 0, omega_co = 0;   // laser carrier angular frequencies
    Real omega_m1 = 0, omega_m2 = 0;   // mechanical angular frequencies
    Real gamma_m1 = 0, gamma_m2 = 0;   // mechanical damping rates
    Real kappa1 = 0, kappa2 = 0;       // total cavity linewidths
    Real kappa_e1 = 0, kappa_e2 = 0;   // external (in/out) coupling rates
    Real g11 = 0, g12 = 0;             // pump cavity -> mode 1, mode 2
    Real g21 = 0, g22 = 0;             // control cavity -> mode 1, mode 2
    Real J = 0;                        // intercavity tunneling
};

template <class Real = double>
struct DriveParams {
    Real p_pu = 0, p_co = 0;           // in-coupled drive powers (W)
    Real delta1 = 0, delta2 = 0;       // laser-cavity detunings (rad/s)
};

// |E|^2 = 2 kappa P / (hbar omega): photon flux squared-amplitude of a drive of
// power P entering through a port of rate kappa. The model couples drives in
// through the external rates, so callers pass kappa_e here; the injected photon
// rate into the cavity is then kappa_e * |E|^2.
template <class Real>
Real drive_amplitude_sq(Real power, Real kappa, Real omega) {
    return Real(2) * kappa * power / (Real(hbar) * omega);
}

// Static detuning shift per photon: eliminating X at steady state turns the
// radiation-pressure terms into an intensity-dependent detuning,
//   dt1 = delta1 - c11 n1 - c12 n2,   dt2 = delta2 - c12 n1 - c22 n2.
// The cross coefficient is symmetric because both cavities push the same
// mechanical modes.
template <class Real = double>
struct ShiftMatrix {
    Real c11, c12, c22;
};

template <class Real>
ShiftMatrix<Real> shift_matrix(const SystemParams<Real>& s) {
    return {
        Real(2) * (s.g11 * s.g11 / s.omega_m1 + s.g12 * s.g12 / s.omega_m2),
        Real(2) * (s.g11 * s.g21 / s.omega_m1 + s.g12 * s.g22 / s.omega_m2),
        Real(2) * (s.g21 * s.g21 / s.omega_m1 + s.g22 * s.g22 / s.omega_m2),
    };
}

// Static mechanical displacements produced by given photon numbers.
template <class Real>
std::array<Real, 2> steady_displacements(const SystemParams<Real>& s, Real n1, Real n2) {
    return {
        (Real(2) / s.omega_m1) * (s.g11 * n1 + s.g21 * n2),
        (Real(2) / s.omega_m2) * (s.g12 * n1 + s.g22 * n2),
    };
}

// Effective detunings at displacements X (dt_l = delta_l - g_l1 X1 - g_l2 X2).
template <class Real>
std::array<Real, 2> effective_detunings_at(const SystemParams<Real>& s,
                                           const DriveParams<Real>& d,
                                           Real X1, Real X2) {
    return {
        d.delta1 - s.g11 * X1 - s.g12 * X2,
        d.delta2 - s.g21 * X1 - s.g22 * X2,
    };
}

// Effective detunings at photon numbers (n1, n2), via the shift matrix.
template <class Real>
std::array<Real, 2> effective_detunings(const SystemParams<Real>& s,
                                        const DriveParams<Real>& d,
                                        Real n1, Real n2) {
    const auto c = shift_matrix(s);
    return {
        d.delta1 - c.c11 * n1 - c.c12 * n2,
        d.delta2 - c.c12 * n1 - c.c22 * n2,
    };
}

// Photon injection rates D_l = kappa_e_l * |E_l|^2 for the two drive lines.
template <class Real>
std::array<Real, 2> injected_rates(const SystemParams<Real>& s, const DriveParams<Real>& d) {
    const Real E1sq = drive_amplitude_sq(d.p_pu, s.kappa_e1, s.omega_pu);
    const Real E2sq = drive_amplitude_sq(d.p_co, s.kappa_e2, s.omega_co);
    return {s.kappa_e1 * E1sq, s.kappa_e2 * E2sq};
}

// Photon-balance residuals of the closed algebraic system:
//   F1 = n1 [ (kappa1/2)^2 + dt1^2 ] - (D1 + J^2 n2)
//   F2 = n2 [ (kappa2/2)^2 + dt2^2 ] - (D2 + J^2 n1)
// The tunneling enters as an incoherent photon feed J^2 n_other; the exact
// coherent amplitudes are available separately below for cross-checks.
template <class Real>
std::array<Real, 2> photon_balance(const SystemParams<Real>& s, const DriveParams<Real>& d,
                                   Real n1, Real n2) {
    const auto dt = effective_detunings(s, d, n1, n2);
    const auto D = injected_rates(s, d);
    const Real h1 = s.kappa1 / 2, h2 = s.kappa2 / 2;
    return {
        n1 * (h1 * h1 + dt[0] * dt[0]) - (D[0] + s.J * s.J * n2),
        n2 * (h2 * h2 + dt[1] * dt[1]) - (D[1] + s.J * s.J * n1),
    };
}

// Residuals scaled to O(1): each component divided by the larger of its two
// constituent terms, so a root satisfies |F_scaled| << 1 regardless of the
// absolute photon scale.
template <class Real>
std::array<Real, 2> photon_balance_scaled(const SystemParams<Real>& s,
                                          const DriveParams<Real>& d,
                                          Real n1, Real n2) {
    const auto dt = effective_detunings(s, d, n1, n2);
    const auto D = injected_rates(s, d);
    const Real h1 = s.kappa1 / 2, h2 = s.kappa2 / 2;
    const Real lhs1 = n1 * (h1 * h1 + dt[0] * dt[0]);
    const Real lhs2 = n2 * (h2 * h2 + dt[1] * dt[1]);
    const Real rhs1 = D[0] + s.J * s.J * n2;
    const Real rhs2 = D[1] + s.J * s.J * n1;
    const Real s1 = std::max({std::abs(lhs1), std::abs(rhs1), Real(1e-300)});
    const Real s2 = std::max({std::abs(lhs2), std::abs(rhs2), Real(1e-300)});
    return {(lhs1 - rhs1) / s1, (lhs2 - rhs2) / s2};
}

// Jacobian of (F1, F2) with respect to (n1, n2); used by the Newton polish and
// by fold diagnostics.
template <class Real>
std::array<Real, 4> photon_balance_jacobian(const SystemParams<Real>& s,
                                            const DriveParams<Real>& d,
                                            Real n1, Real n2) {
    const auto c = shift_matrix(s);
    const auto dt = effective_detunings(s, d, n1, n2);
    const Real h1 = s.kappa1 / 2, h2 = s.kappa2 / 2;
    // dF1/dn1, dF1/dn2, dF2/dn1, dF2/dn2
    return {
        (h1 * h1 + dt[0] * dt[0]) + n1 * Real(2) * dt[0] * (-c.c11),
        n1 * Real(2) * dt[0] * (-c.c12) - s.J * s.J,
        n2 * Real(2) * dt[1] * (-c.c12) - s.J * s.J,
        (h2 * h2 + dt[1] * dt[1]) + n2 * Real(2) * dt[1] * (-c.c22),
    };
}

// Exact coherent steady-state amplitudes for FIXED effective detunings: solves
//   (i dt1 + kappa1/2) a1 - i J a2 = sqrt(kappa_e1) E_pu
//   (i dt2 + kappa2/2) a2 - i J a1 = sqrt(kappa_e2) E_co
// Used by the linearization (amplitude reconstruction) and by the dynamics; at
// nonzero J its moduli differ from the incoherent photon balance above by
// O(J^2/kappa^2) interference terms.
template <class Real>
std::array<std::complex<Real>, 2> coherent_amplitudes(const SystemParams<Real>& s,
                                                      const DriveParams<Real>& d,
                                                      Real dt1, Real dt2) {
    using C = std::complex<Real>;
    const Real s1 = std::sqrt(std::max(drive_amplitude_sq(d.p_pu, s.kappa_e1, s.omega_pu), Real(0)));
    const Real s2 = std::sqrt(std::max(drive_amplitude_sq(d.p_co, s.kappa_e2, s.omega_co), Real(0)));
    const C A(s.kappa1 / 2, dt1), B(0, -s.J);
    const C Cc(0, -s.J), Dd(s.kappa2 / 2, dt2);
    const C b1 = std::sqrt(s.kappa_e1) * s1;
    const C b2 = std::sqrt(s.kappa_e2) * s2;
    const C det = A * Dd - B * Cc;
    return {(b1 * Dd - B * b2) / det, (A * b2 - b1 * Cc) / det};
}

} // namespace bistab
