#pragma once

// JSON scenario configuration.
//
// Schema (all blocks optional; omitted parameters keep baseline values):
//   {
//     "system": {"kappa1": "2pi*520 MHz", "g11": "850 kHz", ...},
//     "drive":  {"p_pu": "0.10 uW", "delta1": "2 GHz", ...},
//     "sweep":  {"axis": "p_pu", "from": "0.001 uW", "to": "1 uW",
//                "points": 501, "scale": "log"},
//     "mode":   "eq5" | "exact",
//     "output": {"path": "out.csv", "format": "csv" | "json"}
//   }
//
// Every parameter value is a quantity string with an explicit unit; bare JSON
// numbers are rejected because a bare rate is ambiguous (Hz vs rad/s is the
// dominant reproduction hazard). Frequency-unit values are cyclic and are
// converted to angular internally; writing "2pi*520 MHz" or "rad/s" values
// makes the number angular as written. "2pi*520 MHz" and "520 MHz" therefore
// load identically. Powers are watts at the coupling port. Errors carry the
// offending field path.

#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "model.hpp"
#include "presets.hpp"
#include "stability.hpp"
#include "sweep.hpp"
#include "units.hpp"

namespace bistab {

struct SweepSpec {
    SweepAxis axis = SweepAxis::PumpPower;
    double from = 0, to = 0; // rad/s or W, matching the axis
    int points = 201;
    bool log_scale = false;
};

struct OutputSpec {
    std::string path;          // empty: stdout
    std::string format = "csv";
};

struct ScenarioConfig {
    SystemParams<double> sys;
    DriveParams<double> drv;
    std::optional<SweepSpec> sweep;
    AmplitudeReconstruction mode = AmplitudeReconstruction::BalanceModuli;
    std::optional<OutputSpec> output;
};

namespace detail {

inline QuantityParts quantity_field(const nlohmann::json& v, const std::string& path) {
    if (v.is_number())
        throw ConfigError(path + ": bare numbers are ambiguous, write a unit string "
                          "like \"2pi*2 GHz\" or \"0.1 uW\"");
    if (!v.is_string())
        throw ConfigError(path + ": expected a quantity string");
    try {
        return parse_quantity_parts(v.get<std::string>());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// angular rate in rad/s: cyclic (Hz-family) values are multiplied by 2*pi,
// already-angular spellings ("2pi*...", "... rad/s") pass through
inline double angular_rate_field(const nlohmann::json& v, const std::string& path) {
    const QuantityParts q = quantity_field(v, path);
    if (q.dim == Dimension::Power || q.dim == Dimension::Time)
        throw ConfigError(path + ": expected a frequency, got a different dimension");
    if (q.dim == Dimension::None && q.value != 0.0 && !q.angular_prefix)
        throw ConfigError(path + ": missing frequency unit");
    if (q.angular_prefix || q.angular_unit) return q.value;
    return 2.0 * M_PI * q.value;
}

inline double power_field(const nlohmann::json& v, const std::string& path) {
    const QuantityParts q = quantity_field(v, path);
    if (q.angular_prefix)
        throw ConfigError(path + ": a power cannot carry a 2pi prefix");
    if (q.dim == Dimension::None && q.value != 0.0)
        throw ConfigError(path + ": missing power unit");
    if (q.dim != Dimension::Power && q.dim != Dimension::None)
        throw ConfigError(path + ": expected a power, got a different dimension");
    return q.value;
}

} // namespace detail

inline SweepAxis axis_from_name(const std::string& name) {
    if (name == "delta1") return SweepAxis::Delta1;
    if (name == "delta2") return SweepAxis::Delta2;
    if (name == "p_pu") return SweepAxis::PumpPower;
    if (name == "p_co") return SweepAxis::ControlPower;
    throw ConfigError("unknown sweep axis '" + name + "' (delta1, delta2, p_pu, p_co)");
}

inline AmplitudeReconstruction mode_from_name(const std::string& name) {
    if (name == "eq5") return AmplitudeReconstruction::BalanceModuli;
    if (name == "exact") return AmplitudeReconstruction::ExactComplex;
    throw ConfigError("unknown mode '" + name + "' (eq5, exact)");
}

inline const char* mode_name(AmplitudeReconstruction m) {
    return m == AmplitudeReconstruction::BalanceModuli ? "eq5" : "exact";
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    using detail::angular_rate_field;
    using detail::power_field;
    ScenarioConfig sc{baseline_system(), baseline_drive(), {}, {}, {}};
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& block = it.key();
        if (block == "system") {
            if (!it.value().is_object()) throw ConfigError("system: expected an object");
            for (auto f = it.value().begin(); f != it.value().end(); ++f) {
                const std::string path = "system." + f.key();
                const std::string& k = f.key();
                double* target = nullptr;
                if (k == "omega_pu") target = &sc.sys.omega_pu;
                else if (k == "omega_co") target = &sc.sys.omega_co;
                else if (k == "omega_m1") target = &sc.sys.omega_m1;
                else if (k == "omega_m2") target = &sc.sys.omega_m2;
                else if (k == "gamma_m1") target = &sc.sys.gamma_m1;
                else if (k == "gamma_m2") target = &sc.sys.gamma_m2;
                else if (k == "kappa1") target = &sc.sys.kappa1;
                else if (k == "kappa2") target = &sc.sys.kappa2;
                else if (k == "kappa_e1") target = &sc.sys.kappa_e1;
                else if (k == "kappa_e2") target = &sc.sys.kappa_e2;
                else if (k == "g11") target = &sc.sys.g11;
                else if (k == "g12") target = &sc.sys.g12;
                else if (k == "g21") target = &sc.sys.g21;
                else if (k == "g22") target = &sc.sys.g22;
                else if (k == "J") target = &sc.sys.J;
                else throw ConfigError(path + ": unknown system parameter");
                *target = angular_rate_field(f.value(), path);
            }
        } else if (block == "drive") {
            if (!it.value().is_object()) throw ConfigError("drive: expected an object");
            for (auto f = it.value().begin(); f != it.value().end(); ++f) {
                const std::string path = "drive." + f.key();
                const std::string& k = f.key();
                if (k == "p_pu") sc.drv.p_pu = power_field(f.value(), path);
                else if (k == "p_co") sc.drv.p_co = power_field(f.value(), path);
                else if (k == "delta1") sc.drv.delta1 = angular_rate_field(f.value(), path);
                else if (k == "delta2") sc.drv.delta2 = angular_rate_field(f.value(), path);
                else throw ConfigError(path + ": unknown drive parameter");
            }
        } else if (block == "sweep") {
            if (!it.value().is_object()) throw ConfigError("sweep: expected an object");
            SweepSpec sw;
            bool have_from = false, have_to = false;
            for (auto f = it.value().begin(); f != it.value().end(); ++f) {
                const std::string path = "sweep." + f.key();
                const std::string& k = f.key();
                if (k == "axis") {
                    if (!f.value().is_string())
                        throw ConfigError(path + ": expected an axis name string");
                    sw.axis = axis_from_name(f.value().get<std::string>());
                } else if (k == "points") {
                    if (!f.value().is_number_integer() || f.value().get<int>() < 2)
                        throw ConfigError(path + ": expected an integer >= 2");
                    sw.points = f.value().get<int>();
                } else if (k == "scale") {
                    const std::string s =
                        f.value().is_string() ? f.value().get<std::string>() : "";
                    if (s == "log") sw.log_scale = true;
                    else if (s == "linear") sw.log_scale = false;
                    else throw ConfigError(path + ": expected \"linear\" or \"log\"");
                } else if (k == "from" || k == "to") {
                    // dimension resolved below, once the axis is known
                } else {
                    throw ConfigError(path + ": unknown sweep field");
                }
            }
            const bool is_power = (sw.axis == SweepAxis::PumpPower ||
                                   sw.axis == SweepAxis::ControlPower);
            if (it.value().contains("from")) {
                sw.from = is_power ? power_field(it.value()["from"], "sweep.from")
                                   : angular_rate_field(it.value()["from"], "sweep.from");
                have_from = true;
            }
            if (it.value().contains("to")) {
                sw.to = is_power ? power_field(it.value()["to"], "sweep.to")
                                 : angular_rate_field(it.value()["to"], "sweep.to");
                have_to = true;
            }
            if (!have_from || !have_to)
                throw ConfigError("sweep: both 'from' and 'to' are required");
            if (sw.log_scale && !(sw.from > 0 && sw.to > 0))
                throw ConfigError("sweep: log scale requires positive endpoints");
            sc.sweep = sw;
        } else if (block == "mode") {
            if (!it.value().is_string()) throw ConfigError("mode: expected \"eq5\" or \"exact\"");
            sc.mode = mode_from_name(it.value().get<std::string>());
        } else if (block == "output") {
            if (!it.value().is_object()) throw ConfigError("output: expected an object");
            OutputSpec os;
            for (auto f = it.value().begin(); f != it.value().end(); ++f) {
                const std::string& k = f.key();
                if (k == "path") {
                    if (!f.value().is_string()) throw ConfigError("output.path: expected a string");
                    os.path = f.value().get<std::string>();
                } else if (k == "format") {
                    const std::string s =
                        f.value().is_string() ? f.value().get<std::string>() : "";
                    if (s != "csv" && s != "json")
                        throw ConfigError("output.format: expected \"csv\" or \"json\"");
                    os.format = s;
                } else {
                    throw ConfigError("output." + k + ": unknown output field");
                }
            }
            sc.output = os;
        } else {
            throw ConfigError("unknown config block '" + block + "'");
        }
    }

    auto check_nonneg = [](double v, const char* name) {
        if (!(v >= 0.0)) throw ConfigError(std::string("system.") + name +
                                           ": must be non-negative");
    };
    check_nonneg(sc.sys.kappa1, "kappa1");
    check_nonneg(sc.sys.kappa2, "kappa2");
    check_nonneg(sc.sys.kappa_e1, "kappa_e1");
    check_nonneg(sc.sys.kappa_e2, "kappa_e2");
    check_nonneg(sc.sys.gamma_m1, "gamma_m1");
    check_nonneg(sc.sys.gamma_m2, "gamma_m2");
    if (!(sc.drv.p_pu >= 0)) throw ConfigError("drive.p_pu: must be non-negative");
    if (!(sc.drv.p_co >= 0)) throw ConfigError("drive.p_co: must be non-negative");
    auto check_pos = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string("system.") + name +
                                          ": must be positive");
    };
    check_pos(sc.sys.omega_pu, "omega_pu");
    check_pos(sc.sys.omega_co, "omega_co");
    check_pos(sc.sys.omega_m1, "omega_m1");
    check_pos(sc.sys.omega_m2, "omega_m2");
    if (sc.sys.kappa_e1 > sc.sys.kappa1)
        throw ConfigError("system.kappa_e1: exceeds total linewidth kappa1");
    if (sc.sys.kappa_e2 > sc.sys.kappa2)
        throw ConfigError("system.kappa_e2: exceeds total linewidth kappa2");
    return sc;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return scenario_from_json(j);
}

// Serialization emits angular rates as "<value> rad/s" and powers as
// "<value> W" at 17 significant digits, so a load of the output reproduces
// the internal parameter set bit-for-bit.
inline nlohmann::json scenario_to_json(const ScenarioConfig& sc) {
    char buf[48];
    auto rate = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g rad/s", v);
        return std::string(buf);
    };
    auto watts = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g W", v);
        return std::string(buf);
    };
    nlohmann::json j;
    j["system"] = {
        {"omega_pu", rate(sc.sys.omega_pu)}, {"omega_co", rate(sc.sys.omega_co)},
        {"omega_m1", rate(sc.sys.omega_m1)}, {"omega_m2", rate(sc.sys.omega_m2)},
        {"gamma_m1", rate(sc.sys.gamma_m1)}, {"gamma_m2", rate(sc.sys.gamma_m2)},
        {"kappa1", rate(sc.sys.kappa1)},     {"kappa2", rate(sc.sys.kappa2)},
        {"kappa_e1", rate(sc.sys.kappa_e1)}, {"kappa_e2", rate(sc.sys.kappa_e2)},
        {"g11", rate(sc.sys.g11)},           {"g12", rate(sc.sys.g12)},
        {"g21", rate(sc.sys.g21)},           {"g22", rate(sc.sys.g22)},
        {"J", rate(sc.sys.J)},
    };
    j["drive"] = {
        {"p_pu", watts(sc.drv.p_pu)},
        {"p_co", watts(sc.drv.p_co)},
        {"delta1", rate(sc.drv.delta1)},
        {"delta2", rate(sc.drv.delta2)},
    };
    j["mode"] = mode_name(sc.mode);
    if (sc.sweep) {
        const bool is_power = (sc.sweep->axis == SweepAxis::PumpPower ||
                               sc.sweep->axis == SweepAxis::ControlPower);
        j["sweep"] = {
            {"axis", axis_name(sc.sweep->axis)},
            {"from", is_power ? watts(sc.sweep->from) : rate(sc.sweep->from)},
            {"to", is_power ? watts(sc.sweep->to) : rate(sc.sweep->to)},
            {"points", sc.sweep->points},
            {"scale", sc.sweep->log_scale ? "log" : "linear"},
        };
    }
    if (sc.output)
        j["output"] = {{"path", sc.output->path}, {"format", sc.output->format}};
    return j;
}

inline std::vector<double> sweep_values(const SweepSpec& sw) {
    return sw.log_scale ? geomspace(sw.from, sw.to, sw.points)
                        : linspace(sw.from, sw.to, sw.points);
}

} // namespace bistab
