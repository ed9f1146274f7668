#pragma once

// Shared randomized-draw helper: jitter every physical parameter by a uniform
// factor in [1-frac, 1+frac] around the baseline operating point. Determinism
// comes from the caller-owned engine (fixed seeds in the tests).

#include <random>

#include "bistab/model.hpp"
#include "bistab/presets.hpp"

namespace testutil {

template <class Rng>
void jitter_draw(bistab::SystemParams<double>& sys, bistab::DriveParams<double>& drv, Rng& rng,
                 double frac = 0.2) {
    std::uniform_real_distribution<double> u(1.0 - frac, 1.0 + frac);
    sys.kappa1 *= u(rng);
    sys.kappa2 *= u(rng);
    sys.kappa_e1 *= u(rng);
    sys.kappa_e2 *= u(rng);
    sys.g11 *= u(rng);
    sys.g12 *= u(rng);
    sys.g21 *= u(rng);
    sys.g22 *= u(rng);
    sys.J *= u(rng);
    sys.omega_m1 *= u(rng);
    sys.omega_m2 *= u(rng);
    sys.gamma_m1 *= u(rng);
    sys.gamma_m2 *= u(rng);
    drv.p_pu *= u(rng);
    drv.p_co *= u(rng);
    drv.delta1 *= u(rng);
    drv.delta2 *= u(rng);
}

// max-norm relative distance in the occupation plane, the dedup metric
inline double rel_dist(const bistab::Root<double>& a, const bistab::Root<double>& b) {
    const double s1 = std::max({std::abs(a.n1), std::abs(b.n1), 1.0});
    const double s2 = std::max({std::abs(a.n2), std::abs(b.n2), 1.0});
    return std::max(std::abs(a.n1 - b.n1) / s1, std::abs(a.n2 - b.n2) / s2);
}

// true when the two sorted root lists match pairwise within tol
inline bool same_root_set(const std::vector<bistab::Root<double>>& a,
                          const std::vector<bistab::Root<double>>& b, double tol) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (rel_dist(a[i], b[i]) > tol) return false;
    return true;
}

} // namespace testutil
