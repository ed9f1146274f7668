#pragma once

// Single-cavity Kerr-type fold analytics, used as an independent oracle.
//
// A lone driven cavity whose resonance shifts linearly with its own occupation
// obeys n [ (kappa/2)^2 + (delta - C n)^2 ] = D. Writing t = delta - C n for
// the effective detuning, dD/dn = 0 at the folds gives
//   3 t^2 - 2 delta t + (kappa/2)^2 = 0,
// so the folds sit at t_pm = (delta -+ sqrt(delta^2 - 3 (kappa/2)^2)) / 3 ...
// solved below with the stable quadratic form. Bistability requires
// delta > sqrt(3) * kappa / 2. Fold drives follow by back-substitution.

#include <cmath>

namespace testutil {

struct KerrFolds {
    bool bistable = false;
    double t_hi = 0, t_lo = 0; // effective detunings at the folds (t_hi > t_lo)
    double n_lo = 0, n_hi = 0; // occupations at the folds (n_lo < n_hi)
    double D_hi = 0, D_lo = 0; // drive rates: D_hi ends the lower branch,
                               // D_lo is where the upper branch is born
};

inline KerrFolds kerr_folds(double kappa, double delta, double C) {
    KerrFolds out;
    const double h = kappa / 2;
    const double disc = delta * delta - 3 * h * h;
    if (!(delta > 0) || !(C > 0) || disc <= 0) return out;
    out.bistable = true;
    const double s = std::sqrt(disc);
    out.t_hi = (delta + s) / 3;
    out.t_lo = (delta - s) / 3;
    out.n_lo = (delta - out.t_hi) / C; // larger t means smaller shift
    out.n_hi = (delta - out.t_lo) / C;
    out.D_hi = out.n_lo * (h * h + out.t_hi * out.t_hi);
    out.D_lo = out.n_hi * (h * h + out.t_lo * out.t_lo);
    return out;
}

} // namespace testutil
