#pragma once

// All nonnegative steady states of the coupled photon balance.
//
// Strategy: at fixed pump occupation n1, the pump equation
//   F1 = n1 [ (kappa1/2)^2 + (A - c12 n2)^2 ] - D1 - J^2 n2,   A = delta1 - c11 n1
// is a quadratic in n2 solved in closed form, giving up to two branches
// n2_k(n1). Substituting each branch into the control equation yields 1-D
// residuals
//   G_k(n1) = n2_k [ (kappa2/2)^2 + dt2^2 ] - (D2 + J^2 n1)
// whose sign changes are bracketed on a merged linear+geometric n1 grid and
// bisected; every candidate is then polished by a damped 2-D Newton on the
// full balance. brute_force_roots runs the same branch scan on a denser grid
// with plain bisection and no Newton step, serving as a completeness check
// that shares no refinement machinery with the fast path.
//
// Configurations where a closed form exists (a dark cavity, or no tunneling
// and no cross shift) bypass the scan entirely and solve the decoupled cubics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace bistab {

template <class Real = double>
struct Root {
    Real n1, n2;
};

template <class Real = double>
struct RootFindOptions {
    int grid = 4096;             // base scan resolution in n1
    int max_refinements = 2;     // grid doublings tried when root count is even
    Real dedup_rel = 1e-6;       // relative separation below which roots merge
    Real residual_tol = 1e-9;    // scaled residual accepted as a root
    int newton_max_iters = 60;
};

template <class Real = double>
struct RootFindReport {
    bool parity_suspect = false; // even root count after all refinements
    int refinements_used = 0;
};

// ---------------------------------------------------------------------------
// cubic helper

// Real roots of a x^3 + b x^2 + c x + d, ascending. Closed form (trigonometric
// for the three-real case, Cardano otherwise) plus a Newton cleanup on the
// original coefficients.
template <class Real>
inline int cubic_real_roots(Real a, Real b, Real c, Real d, std::array<Real, 3>& out) {
    auto polish = [&](Real x) {
        for (int it = 0; it < 3; ++it) {
            const Real f = ((a * x + b) * x + c) * x + d;
            const Real fp = (Real(3) * a * x + Real(2) * b) * x + c;
            if (fp == Real(0)) break;
            const Real step = f / fp;
            x -= step;
            if (std::abs(step) <= std::abs(x) * Real(1e-17)) break;
        }
        return x;
    };

    int n = 0;
    if (a == Real(0)) {
        if (b == Real(0)) {
            if (c == Real(0)) return 0; // constant: no isolated roots
            out[n++] = -d / c;
        } else {
            // stable quadratic formula
            const Real disc = c * c - Real(4) * b * d;
            if (disc < Real(0)) return 0;
            const Real sq = std::sqrt(disc);
            const Real q = -(c + (c >= Real(0) ? sq : -sq)) / Real(2);
            out[n++] = q / b;
            if (q != Real(0)) out[n++] = d / q;
            else out[n++] = Real(0);
        }
        std::sort(out.begin(), out.begin() + n);
        return n;
    }

    const Real B = b / a, C = c / a, D = d / a;
    const Real p = C - B * B / Real(3);
    const Real q = Real(2) * B * B * B / Real(27) - B * C / Real(3) + D;
    const Real shift = -B / Real(3);
    const Real disc = -(Real(4) * p * p * p + Real(27) * q * q);

    if (disc > Real(0)) {
        // three distinct real roots
        const Real m = Real(2) * std::sqrt(-p / Real(3));
        Real arg = Real(3) * q / (p * m);
        arg = std::clamp(arg, Real(-1), Real(1));
        const Real phi = std::acos(arg) / Real(3);
        for (int k = 0; k < 3; ++k)
            out[n++] = polish(shift + m * std::cos(phi - Real(2) * Real(M_PI) * Real(k) / Real(3)));
    } else if (p == Real(0) && q == Real(0)) {
        out[n++] = polish(shift);
    } else {
        // one real root; Cardano with cancellation-safe branch
        const Real half_q = q / Real(2);
        const Real rad = std::sqrt(std::max(half_q * half_q + p * p * p / Real(27), Real(0)));
        const Real u3 = -half_q - (half_q >= Real(0) ? rad : -rad);
        const Real u = std::cbrt(u3);
        Real t;
        if (u != Real(0)) t = u - p / (Real(3) * u);
        else t = std::cbrt(-q);
        out[n++] = polish(shift + t);
        // near the tangency boundary (disc ~ 0) the double root may still be
        // physically present; recover it from the quadratic factor
        if (disc > -std::abs(Real(4) * p * p * p) * Real(1e-12) && p < Real(0)) {
            const Real r = out[0] - shift;
            // t^3 + p t + q = (t - r)(t^2 + r t + (r^2 + p))
            const Real dq = r * r / Real(4) - (r * r + p);
            if (dq >= Real(0)) {
                const Real sq = std::sqrt(dq);
                out[n++] = polish(shift - r / Real(2) + sq);
                out[n++] = polish(shift - r / Real(2) - sq);
            }
        }
    }
    std::sort(out.begin(), out.begin() + n);
    return n;
}

// ---------------------------------------------------------------------------
// internals

namespace detail {

template <class Real>
struct BalanceContext {
    const SystemParams<Real>& sys;
    const DriveParams<Real>& drv;
    Real h1, h2;       // half linewidths
    Real D1, D2;       // injected photon rates
    Real c11, c12, c22;
    Real Jsq;

    BalanceContext(const SystemParams<Real>& s, const DriveParams<Real>& d)
        : sys(s), drv(d) {
        h1 = s.kappa1 / 2;
        h2 = s.kappa2 / 2;
        const auto D = injected_rates(s, d);
        D1 = D[0];
        D2 = D[1];
        const auto c = shift_matrix(s);
        c11 = c.c11;
        c12 = c.c12;
        c22 = c.c22;
        Jsq = s.J * s.J;
    }

    // Quadratic coefficients of the pump equation in n2 at fixed n1:
    //   c12^2 n1 n2^2 - (2 n1 A c12 + J^2) n2 + n1 (h1^2 + A^2) - D1 = 0
    // with A = delta1 - c11 n1.
    void branch_coeffs(Real n1, Real& qa, Real& qb, Real& qc) const {
        const Real A = drv.delta1 - c11 * n1;
        qa = c12 * c12 * n1;
        qb = -(Real(2) * n1 * A * c12 + Jsq);
        qc = n1 * (h1 * h1 + A * A) - D1;
    }

    // n2 value at the vertex of the branch quadratic: where the two branches
    // meet when the discriminant crosses zero (fold in the branch structure)
    Real branch_vertex(Real n1) const {
        Real qa, qb, qc;
        branch_coeffs(n1, qa, qb, qc);
        if (qa == Real(0)) return Real(0);
        return std::max(-qb / (Real(2) * qa), Real(0));
    }

    Real control_residual(Real n1, Real n2) const {
        const Real dt2 = drv.delta2 - c12 * n1 - c22 * n2;
        return n2 * (h2 * h2 + dt2 * dt2) - (D2 + Jsq * n1);
    }

    Real control_scale(Real n1, Real n2) const {
        const Real dt2 = drv.delta2 - c12 * n1 - c22 * n2;
        return std::max({std::abs(n2 * (h2 * h2 + dt2 * dt2)), std::abs(D2 + Jsq * n1),
                         Real(1e-300)});
    }
};

// damped Newton on the full 2-D balance; returns true when the scaled residual
// converges below tol with nonnegative occupations
template <class Real>
inline bool polish_root(const SystemParams<Real>& s, const DriveParams<Real>& d, Real& n1,
                        Real& n2, Real tol, int max_iters) {
    auto objective = [&](Real a, Real b) {
        const auto f = photon_balance_scaled(s, d, a, b);
        return f[0] * f[0] + f[1] * f[1];
    };
    Real phi = objective(n1, n2);
    for (int it = 0; it < max_iters; ++it) {
        if (phi <= tol * tol) return true;
        const auto F = photon_balance(s, d, n1, n2);
        const auto Jm = photon_balance_jacobian(s, d, n1, n2);
        const Real det = Jm[0] * Jm[3] - Jm[1] * Jm[2];
        if (det == Real(0)) return false;
        const Real dn1 = (F[0] * Jm[3] - F[1] * Jm[1]) / det;
        const Real dn2 = (Jm[0] * F[1] - Jm[2] * F[0]) / det;
        bool accepted = false;
        Real lam = Real(1);
        for (int ls = 0; ls < 14; ++ls, lam /= Real(2)) {
            const Real t1 = std::max(n1 - lam * dn1, Real(0));
            const Real t2 = std::max(n2 - lam * dn2, Real(0));
            const Real tphi = objective(t1, t2);
            if (tphi < phi) {
                n1 = t1;
                n2 = t2;
                phi = tphi;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    return phi <= tol * tol;
}

// Relative max-norm duplicate merge on (n1, n2); input must be sorted.
template <class Real>
inline void dedup_sorted(std::vector<Root<Real>>& roots, Real rel) {
    std::vector<Root<Real>> out;
    for (const auto& r : roots) {
        bool dup = false;
        for (const auto& k : out) {
            const Real s1 = std::max({std::abs(r.n1), std::abs(k.n1), Real(1)});
            const Real s2 = std::max({std::abs(r.n2), std::abs(k.n2), Real(1)});
            const Real dist = std::max(std::abs(r.n1 - k.n1) / s1, std::abs(r.n2 - k.n2) / s2);
            if (dist <= rel) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(r);
    }
    roots.swap(out);
}

// occupation bounds from the linear envelope of the balance; falls back to a
// fixed-point iteration if the tunneling feed is too strong for the closed form
template <class Real>
inline std::array<Real, 2> occupation_bounds(const BalanceContext<Real>& ctx) {
    const Real a1 = ctx.D1 / (ctx.h1 * ctx.h1);
    const Real a2 = ctx.D2 / (ctx.h2 * ctx.h2);
    const Real r1 = ctx.Jsq / (ctx.h1 * ctx.h1);
    const Real r2 = ctx.Jsq / (ctx.h2 * ctx.h2);
    const Real rho = r1 * r2;
    if (rho < Real(0.99)) {
        return {(a1 + r1 * a2) / (Real(1) - rho), (a2 + r2 * a1) / (Real(1) - rho)};
    }
    Real b1 = a1, b2 = a2;
    for (int it = 0; it < 200; ++it) {
        const Real t1 = a1 + r1 * b2;
        const Real t2 = a2 + r2 * b1;
        if (t1 <= b1 * (Real(1) + Real(1e-12)) && t2 <= b2 * (Real(1) + Real(1e-12)))
            return {t1, t2};
        b1 = t1;
        b2 = t2;
        if (!(b1 < Real(1e300)) || !(b2 < Real(1e300)))
            throw SolveError("photon occupation bound diverges: tunneling feed exceeds losses");
    }
    return {b1, b2};
}

// Merged grid over [0, hi]: a linear sweep covering the bulk plus a geometric
// sweep resolving narrow features decades below the bound. `points` counts
// each half.
template <class Real>
inline std::vector<Real> scan_grid(Real hi, int points) {
    std::vector<Real> xs;
    xs.reserve(static_cast<size_t>(points) * 2 + 2);
    xs.push_back(Real(0));
    if (hi <= Real(0)) return xs;
    for (int i = 1; i <= points; ++i) xs.push_back(hi * Real(i) / Real(points));
    const Real lo = hi * Real(1e-12);
    for (int i = 0; i < points; ++i)
        xs.push_back(lo * std::pow(hi / lo, Real(i) / Real(points)));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

// One evaluated scan station. Branches are labeled by the sign choice in the
// quadratic formula (slot 0 takes -sqrt, slot 1 takes +sqrt), NOT by sorted
// order of the kept roots: the sign-choice branches are continuous functions
// of n1 wherever the discriminant stays positive, so comparing residual signs
// slot-by-slot between stations never pairs up two different branches. A slot
// is valid when its root exists and is nonnegative; G is only compared where
// the same slot is valid at both ends.
template <class Real>
struct ScanLevel {
    Real n1;
    std::array<Real, 2> n2;
    std::array<Real, 2> g;
    std::array<bool, 2> valid;
};

template <class Real>
inline ScanLevel<Real> eval_level(const BalanceContext<Real>& ctx, Real n1) {
    ScanLevel<Real> L;
    L.n1 = n1;
    L.valid = {false, false};
    Real qa, qb, qc;
    ctx.branch_coeffs(n1, qa, qb, qc);
    if (qa == Real(0)) {
        // linear: the single root continues the -sqrt branch when qb < 0 and
        // the +sqrt branch when qb > 0 (limits of the stable formulas below)
        if (qb != Real(0)) {
            const int slot = qb < Real(0) ? 0 : 1;
            L.n2[slot] = -qc / qb;
            L.valid[slot] = L.n2[slot] >= Real(0);
        }
    } else {
        const Real disc = qb * qb - Real(4) * qa * qc;
        if (disc >= Real(0)) {
            const Real s = std::sqrt(disc);
            const Real q = -(qb + (qb >= Real(0) ? s : -s)) / Real(2);
            // qa > 0 here, so ascending order equals sign-choice order
            const Real lo = qb >= Real(0) ? q / qa : qc / q;
            const Real hi = qb >= Real(0) ? (q == Real(0) ? Real(0) : qc / q) : q / qa;
            L.n2 = {lo, hi};
            L.valid = {lo >= Real(0), hi >= Real(0)};
        }
    }
    for (int k = 0; k < 2; ++k)
        if (L.valid[k]) L.g[k] = ctx.control_residual(n1, L.n2[k]);
    return L;
}

// Bisect a sign change of G_k between two stations. Follows the slot and
// stops early (reporting the bracket edge) if the branch pinches off or goes
// negative inside the bracket.
template <class Real>
inline Root<Real> bisect_branch(const BalanceContext<Real>& ctx, ScanLevel<Real> a,
                                ScanLevel<Real> b, int k) {
    for (int it = 0; it < 200; ++it) {
        const Real mid = a.n1 + (b.n1 - a.n1) / Real(2);
        if (mid == a.n1 || mid == b.n1) break;
        const ScanLevel<Real> m = eval_level(ctx, mid);
        if (!m.valid[k]) break; // branch vanished inside: seed what we have
        if ((a.g[k] <= Real(0)) == (m.g[k] <= Real(0))) a = m;
        else b = m;
    }
    return {a.n1, a.n2[k]};
}

// Shared scan skeleton for the fast path and the brute-force oracle: walks the
// grid, reports every bracketed sign change through `on_bracket(a, b, k)` and
// every suspicious station (tiny residual or a change in branch validity)
// through `on_seed(n1, n2)`.
template <class Real, class Bracket, class Seed>
inline void scan_branches(const BalanceContext<Real>& ctx, const std::vector<Real>& xs,
                          Bracket&& on_bracket, Seed&& on_seed, bool want_seeds) {
    auto near_miss = [&](const ScanLevel<Real>& L) {
        for (int k = 0; k < 2; ++k)
            if (L.valid[k] &&
                std::abs(L.g[k]) < Real(1e-2) * ctx.control_scale(L.n1, L.n2[k]))
                on_seed(L.n1, L.n2[k]);
    };
    ScanLevel<Real> prev = eval_level(ctx, xs[0]);
    if (want_seeds) near_miss(prev);
    for (size_t i = 1; i < xs.size(); ++i) {
        const ScanLevel<Real> cur = eval_level(ctx, xs[i]);
        for (int k = 0; k < 2; ++k)
            if (prev.valid[k] && cur.valid[k] &&
                (prev.g[k] < Real(0)) != (cur.g[k] < Real(0)))
                on_bracket(prev, cur, k);
        if (want_seeds) {
            if (prev.valid != cur.valid) {
                // a branch appeared, vanished, or crossed zero between the
                // stations: seed the endpoints and the quadratic vertex where
                // coalescing branches meet
                for (int k = 0; k < 2; ++k) {
                    if (prev.valid[k]) on_seed(prev.n1, prev.n2[k]);
                    if (cur.valid[k]) on_seed(cur.n1, cur.n2[k]);
                }
                const Real mid = (prev.n1 + cur.n1) / Real(2);
                on_seed(mid, ctx.branch_vertex(mid));
            }
            near_miss(cur);
        }
        prev = cur;
    }
}

template <class Real>
inline void sort_roots(std::vector<Root<Real>>& roots) {
    std::sort(roots.begin(), roots.end(), [](const Root<Real>& a, const Root<Real>& b) {
        return a.n1 != b.n1 ? a.n1 < b.n1 : a.n2 < b.n2;
    });
}

// Exact closed-form paths for configurations that decouple. Returns true when
// handled. Shared by both solvers since no iteration is involved.
template <class Real>
inline bool closed_form_roots(const BalanceContext<Real>& ctx, std::vector<Root<Real>>& roots) {
    const auto& drv = ctx.drv;

    // cubic in x of x [ h^2 + (delta - c x)^2 ] = R, nonnegative solutions
    auto lorentzian_cubic = [](Real h, Real delta, Real c, Real R, std::array<Real, 3>& out) {
        int n;
        if (c == Real(0)) {
            out[0] = R / (h * h + delta * delta);
            n = 1;
        } else {
            n = cubic_real_roots(c * c, Real(-2) * delta * c, h * h + delta * delta, -R, out);
        }
        int m = 0;
        for (int i = 0; i < n; ++i) {
            Real x = out[i];
            if (x < Real(0)) {
                if (x > -std::abs(R) * Real(1e-14) - Real(1e-300)) x = Real(0);
                else continue;
            }
            out[m++] = x;
        }
        return m;
    };

    if (ctx.D1 == Real(0) && ctx.D2 == Real(0)) {
        // undriven: with J^2 below the loss product the only steady state is
        // dark (the coupled linear envelope contracts to zero)
        roots.push_back({Real(0), Real(0)});
        return true;
    }
    if (ctx.Jsq == Real(0) && ctx.D2 == Real(0)) {
        // dark control cavity: pump cubic alone
        std::array<Real, 3> br{};
        const int m = lorentzian_cubic(ctx.h1, drv.delta1, ctx.c11, ctx.D1, br);
        for (int k = 0; k < m; ++k) roots.push_back({br[k], Real(0)});
        return true;
    }
    if (ctx.Jsq == Real(0) && ctx.D1 == Real(0)) {
        // dark pump cavity: control cubic alone
        std::array<Real, 3> br{};
        const int m = lorentzian_cubic(ctx.h2, drv.delta2, ctx.c22, ctx.D2, br);
        for (int k = 0; k < m; ++k) roots.push_back({Real(0), br[k]});
        return true;
    }
    if (ctx.Jsq == Real(0) && ctx.c12 == Real(0)) {
        // no tunneling and no cross shift: the two balances separate and every
        // pairing of their cubic roots is a steady state
        std::array<Real, 3> b1{}, b2{};
        const int m1 = lorentzian_cubic(ctx.h1, drv.delta1, ctx.c11, ctx.D1, b1);
        const int m2 = lorentzian_cubic(ctx.h2, drv.delta2, ctx.c22, ctx.D2, b2);
        for (int i = 0; i < m1; ++i)
            for (int j = 0; j < m2; ++j) roots.push_back({b1[i], b2[j]});
        return true;
    }
    return false;
}

} // namespace detail

// ---------------------------------------------------------------------------
// find_all_roots

template <class Real>
std::vector<Root<Real>> find_all_roots(const SystemParams<Real>& sys,
                                       const DriveParams<Real>& drv,
                                       const RootFindOptions<Real>& opts = {},
                                       RootFindReport<Real>* report = nullptr) {
    detail::BalanceContext<Real> ctx(sys, drv);
    if (report) *report = {};

    std::vector<Root<Real>> roots;
    if (detail::closed_form_roots(ctx, roots)) {
        detail::sort_roots(roots);
        detail::dedup_sorted(roots, opts.dedup_rel);
        return roots;
    }

    const auto bounds = detail::occupation_bounds(ctx);
    const Real n1_hi = std::max(bounds[0], Real(1e-300)) * Real(1.05);

    auto accept = [&](Real n1, Real n2) {
        if (detail::polish_root(sys, drv, n1, n2, opts.residual_tol, opts.newton_max_iters) &&
            n1 >= Real(0) && n2 >= Real(0))
            roots.push_back({n1, n2});
    };

    int grid = std::max(opts.grid, 64);
    for (int attempt = 0;; ++attempt) {
        roots.clear();
        const auto xs = detail::scan_grid(n1_hi, grid);

        std::vector<Root<Real>> cands;
        detail::scan_branches(
            ctx, xs,
            [&](const detail::ScanLevel<Real>& a, const detail::ScanLevel<Real>& b, int k) {
                cands.push_back(detail::bisect_branch(ctx, a, b, k));
            },
            [&](Real n1, Real n2) { cands.push_back({n1, n2}); }, /*want_seeds=*/true);

        for (const auto& c : cands) accept(c.n1, c.n2);

        detail::sort_roots(roots);
        detail::dedup_sorted(roots, opts.dedup_rel);

        const bool parity_ok = (roots.size() % 2) == 1;
        if (parity_ok || attempt >= opts.max_refinements) {
            if (report) {
                report->parity_suspect = !parity_ok;
                report->refinements_used = attempt;
            }
            return roots;
        }
        grid *= 2;
    }
}

// ---------------------------------------------------------------------------
// brute-force oracle: the same branch scan on a dense grid, pure bisection,
// no Newton polish anywhere

template <class Real = double>
struct BruteForceOptions {
    int grid = 16384;        // per-half scan resolution (linear + geometric)
    Real dedup_rel = 1e-6;
};

template <class Real>
std::vector<Root<Real>> brute_force_roots(const SystemParams<Real>& sys,
                                          const DriveParams<Real>& drv,
                                          const BruteForceOptions<Real>& opts = {}) {
    detail::BalanceContext<Real> ctx(sys, drv);

    std::vector<Root<Real>> roots;
    if (detail::closed_form_roots(ctx, roots)) {
        detail::sort_roots(roots);
        detail::dedup_sorted(roots, opts.dedup_rel);
        return roots;
    }

    const auto bounds = detail::occupation_bounds(ctx);
    const Real n1_hi = std::max(bounds[0], Real(1e-300)) * Real(1.05);
    const auto xs = detail::scan_grid(n1_hi, std::max(opts.grid, 1024));

    detail::scan_branches(
        ctx, xs,
        [&](const detail::ScanLevel<Real>& a, const detail::ScanLevel<Real>& b, int k) {
            roots.push_back(detail::bisect_branch(ctx, a, b, k));
        },
        [&](Real, Real) {}, /*want_seeds=*/false);

    detail::sort_roots(roots);
    detail::dedup_sorted(roots, opts.dedup_rel);
    return roots;
}

} // namespace bistab
