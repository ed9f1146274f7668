#pragma once

// Parameter sweeps of the steady-state structure: root sets with stability
// tags along an axis, multistability windows, hysteresis branch following,
// and bisected critical drive values (fold positions).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "roots.hpp"
#include "stability.hpp"

namespace bistab {

enum class SweepAxis { Delta1, Delta2, PumpPower, ControlPower };

inline const char* axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::Delta1: return "delta1";
        case SweepAxis::Delta2: return "delta2";
        case SweepAxis::PumpPower: return "p_pu";
        case SweepAxis::ControlPower: return "p_co";
    }
    return "?";
}

template <class Real>
void apply_axis(SweepAxis axis, Real value, DriveParams<Real>& d) {
    switch (axis) {
        case SweepAxis::Delta1: d.delta1 = value; break;
        case SweepAxis::Delta2: d.delta2 = value; break;
        case SweepAxis::PumpPower: d.p_pu = value; break;
        case SweepAxis::ControlPower: d.p_co = value; break;
    }
}

// worker count: BISTAB_THREADS wins, otherwise hardware concurrency
inline unsigned thread_count() {
    if (const char* env = std::getenv("BISTAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

template <class Real = double>
struct SweepPoint {
    Real x = 0;
    std::vector<Root<Real>> roots;               // ascending n1
    std::vector<StabilityResult> cls;            // parallel to roots
    std::vector<bool> fold_flag;                 // fold-proximal tags
    bool parity_suspect = false;
};

template <class Real = double>
struct SweepResult {
    SweepAxis axis = SweepAxis::PumpPower;
    std::vector<SweepPoint<Real>> points;
};

template <class Real>
SweepResult<Real> sweep(const SystemParams<Real>& sys, const DriveParams<Real>& drv,
                        SweepAxis axis, const std::vector<Real>& values,
                        const RootFindOptions<Real>& ropts = {}, unsigned nthreads = 0) {
    SweepResult<Real> out;
    out.axis = axis;
    out.points.resize(values.size());

    auto solve_point = [&](size_t i) {
        DriveParams<Real> d = drv;
        apply_axis(axis, values[i], d);
        SweepPoint<Real>& pt = out.points[i];
        pt.x = values[i];
        RootFindReport<Real> rep;
        pt.roots = find_all_roots(sys, d, ropts, &rep);
        pt.parity_suspect = rep.parity_suspect;
        pt.cls.reserve(pt.roots.size());
        pt.fold_flag.reserve(pt.roots.size());
        for (const auto& r : pt.roots) {
            pt.cls.push_back(classify(sys, d, r.n1, r.n2));
            pt.fold_flag.push_back(fold_proximal(sys, d, r.n1, r.n2));
        }
    };

    unsigned workers = nthreads > 0 ? nthreads : thread_count();
    workers = std::min<unsigned>(workers, values.size() > 0 ? values.size() : 1);
    if (workers <= 1) {
        for (size_t i = 0; i < values.size(); ++i) solve_point(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (size_t i = next++; i < values.size(); i = next++) solve_point(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

// contiguous index ranges [first, last] whose root count reaches min_count
template <class Real>
std::vector<std::pair<size_t, size_t>> multistability_windows(const SweepResult<Real>& sr,
                                                              size_t min_count = 3) {
    std::vector<std::pair<size_t, size_t>> out;
    size_t i = 0;
    const size_t n = sr.points.size();
    while (i < n) {
        if (sr.points[i].roots.size() >= min_count) {
            size_t j = i;
            while (j + 1 < n && sr.points[j + 1].roots.size() >= min_count) ++j;
            out.emplace_back(i, j);
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// hysteresis

// StableOnly follows only dynamically stable branches and fails hard when the
// occupied branch loses stability or no stable root exists (strict contract).
// Static follows the static branch structure regardless of the dynamic class
// and flags unstable occupancy instead, which is how jump positions of the
// folds are traced even where the upper branch self-oscillates.
enum class HysteresisMode { StableOnly, Static };

template <class Real = double>
struct JumpEvent {
    size_t index = 0;    // trace index where the new branch is first occupied
    Real x = 0;
    Root<Real> from{}, to{};
};

template <class Real = double>
struct HysteresisTrace {
    std::vector<Real> xs;
    std::vector<Root<Real>> occupied;
    std::vector<int> branch; // index of the occupied root (ascending n1) per point
    std::vector<StabilityClass> cls;
    std::vector<JumpEvent<Real>> jumps;
};

namespace detail {

template <class Real>
Real branch_distance(const Root<Real>& a, const Root<Real>& b) {
    return std::abs(std::log1p(a.n1) - std::log1p(b.n1)) +
           std::abs(std::log1p(a.n2) - std::log1p(b.n2));
}

} // namespace detail

template <class Real = double>
struct HysteresisOptions {
    RootFindOptions<Real> roots{};
    Real jump_log_threshold = Real(0.3); // continuation distance beyond which a
                                         // branch is declared vanished
};

template <class Real>
HysteresisTrace<Real> follow_hysteresis(const SystemParams<Real>& sys,
                                        const DriveParams<Real>& drv, SweepAxis axis,
                                        const std::vector<Real>& values, HysteresisMode mode,
                                        const HysteresisOptions<Real>& opts = {}) {
    if (values.empty()) return {};
    HysteresisTrace<Real> tr;
    tr.xs = values;
    tr.occupied.reserve(values.size());
    tr.cls.reserve(values.size());

    auto solve_at = [&](Real x, DriveParams<Real>& d) {
        d = drv;
        apply_axis(axis, x, d);
        return find_all_roots(sys, d, opts.roots);
    };

    DriveParams<Real> d;
    {
        auto roots = solve_at(values[0], d);
        if (roots.empty()) throw SolveError("hysteresis start: no steady state found");
        std::vector<StabilityClass> cls;
        for (const auto& r : roots) cls.push_back(classify(sys, d, r.n1, r.n2).cls);
        size_t pick = roots.size();
        for (size_t k = 0; k < roots.size(); ++k) {
            if (cls[k] == StabilityClass::Stable) { pick = k; break; } // lowest stable
        }
        if (pick == roots.size()) {
            if (mode == HysteresisMode::StableOnly)
                throw SolveError("hysteresis start: no stable steady state at axis value " +
                                 std::to_string(double(values[0])));
            pick = 0;
        }
        tr.occupied.push_back(roots[pick]);
        tr.branch.push_back(static_cast<int>(pick));
        tr.cls.push_back(cls[pick]);
    }

    for (size_t i = 1; i < values.size(); ++i) {
        auto roots = solve_at(values[i], d);
        if (roots.empty()) throw SolveError("hysteresis: no steady state at axis value " +
                                            std::to_string(double(values[i])));
        const Root<Real> prev = tr.occupied.back();
        size_t best = 0;
        Real bestd = detail::branch_distance(roots[0], prev);
        for (size_t k = 1; k < roots.size(); ++k) {
            const Real dk = detail::branch_distance(roots[k], prev);
            if (dk < bestd) { bestd = dk; best = k; }
        }

        std::vector<StabilityClass> cls;
        for (const auto& r : roots) cls.push_back(classify(sys, d, r.n1, r.n2).cls);

        if (bestd > opts.jump_log_threshold) {
            // occupied branch vanished at a fold between the previous grid
            // point and this one: land on the nearest surviving attractor
            size_t land = roots.size();
            Real landd = std::numeric_limits<Real>::infinity();
            for (size_t k = 0; k < roots.size(); ++k) {
                if (mode == HysteresisMode::StableOnly && cls[k] != StabilityClass::Stable)
                    continue;
                const Real dk = detail::branch_distance(roots[k], prev);
                if (dk < landd) { landd = dk; land = k; }
            }
            if (land == roots.size()) {
                if (mode == HysteresisMode::StableOnly)
                    throw SolveError(
                        "hysteresis: occupied branch vanished and no stable root exists at "
                        "axis value " + std::to_string(double(values[i])));
                land = best;
            }
            tr.jumps.push_back({i, values[i], prev, roots[land]});
            best = land;
        }

        if (mode == HysteresisMode::StableOnly && cls[best] != StabilityClass::Stable)
            throw SolveError("hysteresis: occupied branch is not dynamically stable at axis "
                             "value " + std::to_string(double(values[i])));

        tr.occupied.push_back(roots[best]);
        tr.branch.push_back(static_cast<int>(best));
        tr.cls.push_back(cls[best]);
    }
    return tr;
}

// ---------------------------------------------------------------------------
// fold localisation

template <class Real = double>
struct Fold {
    Real x = 0;          // bisected transition position
    int count_below = 0; // root count just below / above
    int count_above = 0;
};

// Bisect every root-count transition of the axis to rel_tol. The samples grid
// sets which transitions are visible; windows narrower than the grid spacing
// are the caller's responsibility.
template <class Real>
std::vector<Fold<Real>> critical_axis_values(const SystemParams<Real>& sys,
                                             const DriveParams<Real>& drv, SweepAxis axis,
                                             const std::vector<Real>& samples,
                                             Real rel_tol = Real(1e-6),
                                             const RootFindOptions<Real>& ropts = {}) {
    auto count_at = [&](Real x) {
        DriveParams<Real> d = drv;
        apply_axis(axis, x, d);
        return static_cast<int>(find_all_roots(sys, d, ropts).size());
    };

    std::vector<Fold<Real>> out;
    if (samples.size() < 2) return out;
    int prev = count_at(samples[0]);
    for (size_t i = 1; i < samples.size(); ++i) {
        int cur = count_at(samples[i]);
        if (cur != prev) {
            Real lo = samples[i - 1], hi = samples[i];
            // Tolerance is relative to the axis magnitude so power axes
            // (~1e-7 W) refine as far as detuning axes (~1e10 rad/s).
            // Counts are reported at the sample endpoints: right at the
            // transition two roots coalesce and the count there is a
            // dedup artifact, not a property of the adjacent intervals.
            while (hi - lo > rel_tol * std::max(std::abs(lo), std::abs(hi))) {
                const Real mid = (lo + hi) / 2;
                if (mid <= lo || mid >= hi) break; // interval is one ulp wide
                if (count_at(mid) == prev) lo = mid;
                else hi = mid;
            }
            out.push_back({(lo + hi) / 2, prev, cur});
        }
        prev = cur;
    }
    return out;
}

} // namespace bistab
