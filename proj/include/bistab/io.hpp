#pragma once

// Output serialization. The CSV schema is fixed: one row per (axis value,
// root), columns
//   <axis>, n_p1, n_p2, x1s, x2s, stability, branch_label, residual
// with a mandatory header and floats at 17 significant digits, so files
// round-trip losslessly and can serve as regression pins. branch_label is
// the root's index in ascending n_p1 at its axis point; residual is the
// scaled photon-balance residual. The JSON mirrors carry extras (leading
// eigenvalue real parts, fold proximity, jump events) that have no CSV
// column.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynamics.hpp"
#include "exact.hpp"
#include "model.hpp"
#include "roots.hpp"
#include "stability.hpp"
#include "sweep.hpp"

namespace bistab {

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

// Residual a root is held to: the photon-balance mismatch for balance roots,
// the full flow at the reconstructed amplitudes for exact-mode roots.
inline double scaled_residual(const SystemParams<double>& s, const DriveParams<double>& d,
                              double n1, double n2,
                              AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli) {
    if (mode == AmplitudeReconstruction::ExactComplex) return flow_residual(s, d, n1, n2);
    const auto F = photon_balance_scaled(s, d, n1, n2);
    return std::max(std::abs(F[0]), std::abs(F[1]));
}

inline void csv_row(std::ostream& os, const SystemParams<double>& s,
                    const DriveParams<double>& d, const Root<double>& r,
                    StabilityClass cls, int branch, const std::string& prefix,
                    AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli) {
    const auto [X1, X2] = steady_displacements(s, r.n1, r.n2);
    os << prefix << format_full(r.n1) << ',' << format_full(r.n2) << ','
       << format_full(X1) << ',' << format_full(X2) << ',' << stability_tag(cls) << ','
       << branch << ',' << format_full(scaled_residual(s, d, r.n1, r.n2, mode)) << '\n';
}

} // namespace detail

// single-point root set: same columns as sweeps, minus the axis
inline void write_roots_csv(std::ostream& os, const SystemParams<double>& s,
                            const DriveParams<double>& d,
                            const std::vector<Root<double>>& roots,
                            AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli) {
    os << "n_p1,n_p2,x1s,x2s,stability,branch_label,residual\n";
    for (size_t i = 0; i < roots.size(); ++i)
        detail::csv_row(os, s, d, roots[i], classify(s, d, roots[i].n1, roots[i].n2, mode).cls,
                        static_cast<int>(i), "", mode);
}

inline nlohmann::json roots_to_json(const SystemParams<double>& s,
                                    const DriveParams<double>& d,
                                    const std::vector<Root<double>>& roots,
                                    AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli) {
    nlohmann::json arr = nlohmann::json::array();
    for (size_t i = 0; i < roots.size(); ++i) {
        const auto& r = roots[i];
        const auto [X1, X2] = steady_displacements(s, r.n1, r.n2);
        const auto [dt1, dt2] = effective_detunings(s, d, r.n1, r.n2);
        const auto st = classify(s, d, r.n1, r.n2, mode);
        arr.push_back({{"n_p1", r.n1},
                       {"n_p2", r.n2},
                       {"x1s", X1},
                       {"x2s", X2},
                       {"eff_delta1", dt1},
                       {"eff_delta2", dt2},
                       {"stability", std::string(1, stability_tag(st.cls))},
                       {"branch_label", i},
                       {"residual", detail::scaled_residual(s, d, r.n1, r.n2, mode)},
                       {"max_re_eigenvalue", st.max_real},
                       {"fold_proximal", fold_proximal(s, d, r.n1, r.n2)}});
    }
    return arr;
}

inline void write_sweep_csv(std::ostream& os, const SystemParams<double>& s,
                            const DriveParams<double>& d_base,
                            const SweepResult<double>& sr,
                            AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli) {
    os << axis_name(sr.axis) << ",n_p1,n_p2,x1s,x2s,stability,branch_label,residual\n";
    for (const auto& pt : sr.points) {
        DriveParams<double> d = d_base;
        apply_axis(sr.axis, pt.x, d);
        for (size_t i = 0; i < pt.roots.size(); ++i)
            detail::csv_row(os, s, d, pt.roots[i], pt.cls[i].cls, static_cast<int>(i),
                            format_full(pt.x) + ",", mode);
    }
}

inline nlohmann::json sweep_to_json(const SystemParams<double>& s,
                                    const DriveParams<double>& d_base,
                                    const SweepResult<double>& sr,
                                    AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : sr.points) {
        DriveParams<double> d = d_base;
        apply_axis(sr.axis, pt.x, d);
        nlohmann::json roots = nlohmann::json::array();
        for (size_t i = 0; i < pt.roots.size(); ++i) {
            const auto& r = pt.roots[i];
            const auto [X1, X2] = steady_displacements(s, r.n1, r.n2);
            roots.push_back({{"n_p1", r.n1},
                             {"n_p2", r.n2},
                             {"x1s", X1},
                             {"x2s", X2},
                             {"stability", std::string(1, stability_tag(pt.cls[i].cls))},
                             {"branch_label", i},
                             {"residual", detail::scaled_residual(s, d, r.n1, r.n2, mode)},
                             {"max_re_eigenvalue", pt.cls[i].max_real},
                             {"fold_proximal", bool(pt.fold_flag[i])}});
        }
        pts.push_back({{"axis_value", pt.x},
                       {"roots", std::move(roots)},
                       {"parity_suspect", pt.parity_suspect}});
    }
    return nlohmann::json{{"axis", axis_name(sr.axis)}, {"points", std::move(pts)}};
}

inline void write_hysteresis_csv(std::ostream& os, const SystemParams<double>& s,
                                 const DriveParams<double>& d_base, SweepAxis axis,
                                 const HysteresisTrace<double>& tr) {
    os << axis_name(axis) << ",n_p1,n_p2,x1s,x2s,stability,branch_label,residual\n";
    for (size_t i = 0; i < tr.xs.size(); ++i) {
        DriveParams<double> d = d_base;
        apply_axis(axis, tr.xs[i], d);
        detail::csv_row(os, s, d, tr.occupied[i], tr.cls[i], tr.branch[i],
                        format_full(tr.xs[i]) + ",");
    }
}

inline nlohmann::json hysteresis_to_json(SweepAxis axis, const HysteresisTrace<double>& tr) {
    nlohmann::json jumps = nlohmann::json::array();
    for (const auto& j : tr.jumps)
        jumps.push_back({{"index", j.index},
                         {"axis_value", j.x},
                         {"from", {{"n_p1", j.from.n1}, {"n_p2", j.from.n2}}},
                         {"to", {{"n_p1", j.to.n1}, {"n_p2", j.to.n2}}}});
    nlohmann::json pts = nlohmann::json::array();
    for (size_t i = 0; i < tr.xs.size(); ++i)
        pts.push_back({{"axis_value", tr.xs[i]},
                       {"n_p1", tr.occupied[i].n1},
                       {"n_p2", tr.occupied[i].n2},
                       {"branch_label", tr.branch[i]},
                       {"stability", std::string(1, stability_tag(tr.cls[i]))}});
    return nlohmann::json{{"axis", axis_name(axis)}, {"points", pts}, {"jumps", jumps}};
}

// time-domain trajectory samples from a drive ramp
inline void write_ramp_csv(std::ostream& os, const RampTrace& tr) {
    os << "t,p_pu,n_p1,n_p2,x1,x2\n";
    for (size_t i = 0; i < tr.t.size(); ++i)
        os << format_full(tr.t[i]) << ',' << format_full(tr.p_pu[i]) << ','
           << format_full(tr.n1[i]) << ',' << format_full(tr.n2[i]) << ','
           << format_full(tr.X1[i]) << ',' << format_full(tr.X2[i]) << '\n';
}

} // namespace bistab
