// bistab: steady states, stability, parameter sweeps, hysteresis loops and
// time evolution for two tunnel-coupled optomechanical cavities.
//
// Subcommands
//   solve         all steady states of one operating point, with stability
//   sweep         root sets along a swept drive parameter
//   hysteresis    occupied-branch up/down traces with jump events
//   simulate      time evolution of the full system at fixed drive
//   figures <id>  run a built-in scenario preset (fig2a ... fig12b)
//   list-presets  show the available presets
//
// Exit codes: 0 success, 2 bad configuration, 3 solver failure, 4 I/O failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <bistab/bistab.hpp>

namespace {

using namespace bistab;

struct Flags {
    std::string config_path;
    std::string out;
    std::string format; // empty: config output block, then "csv"
    std::string mode;   // empty: config mode
    int points = 0;     // 0: leave the configured resolution untouched
    unsigned seed = 0;
    bool seed_set = false;
};

std::string effective_format(const Flags& f, const ScenarioConfig& cfg) {
    const std::string fmt =
        !f.format.empty() ? f.format : (cfg.output ? cfg.output->format : std::string("csv"));
    if (fmt != "csv" && fmt != "json")
        throw ConfigError("unknown format '" + fmt + "' (expected csv or json)");
    return fmt;
}

std::string effective_out(const Flags& f, const ScenarioConfig& cfg) {
    return !f.out.empty() ? f.out : (cfg.output ? cfg.output->path : std::string());
}

AmplitudeReconstruction effective_mode(const Flags& f, const ScenarioConfig& cfg) {
    return f.mode.empty() ? cfg.mode : mode_from_name(f.mode);
}

// single buffered write so a file is either complete or absent
void emit(const std::string& path, const std::string& payload) {
    if (path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open output file '" + path + "'");
    os << payload;
    os.flush();
    if (!os) throw IoError("failed while writing '" + path + "'");
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// "trace.csv" -> "trace_up.csv" / "trace_down.csv"
std::string with_suffix(const std::string& path, const std::string& suffix) {
    std::filesystem::path p(path);
    std::filesystem::path out = p.parent_path();
    out /= p.stem().string() + suffix + (p.has_extension() ? p.extension().string() : ".csv");
    return out.string();
}

ScenarioConfig load_flags_config(const Flags& f) {
    if (f.config_path.empty()) throw ConfigError("--config <file> is required");
    return load_scenario(f.config_path);
}

// ---------------------------------------------------------------------------
// solve

void cmd_solve(const Flags& f) {
    const ScenarioConfig cfg = load_flags_config(f);
    if (cfg.sweep)
        throw ConfigError(
            "solve expects a point configuration: remove the sweep block or run `sweep`");
    const auto mode = effective_mode(f, cfg);

    std::vector<Root<double>> roots;
    if (mode == AmplitudeReconstruction::ExactComplex)
        roots = solve_exact_complex(cfg.sys, cfg.drv);
    else
        roots = find_all_roots(cfg.sys, cfg.drv);

    std::ostringstream ss;
    if (effective_format(f, cfg) == "csv") {
        write_roots_csv(ss, cfg.sys, cfg.drv, roots, mode);
    } else {
        ss << json_text(nlohmann::json{{"mode", mode_name(mode)},
                                       {"roots", roots_to_json(cfg.sys, cfg.drv, roots, mode)}});
    }
    const std::string out = effective_out(f, cfg);
    emit(out, ss.str());
    if (!out.empty())
        std::cerr << roots.size() << " root" << (roots.size() == 1 ? "" : "s") << " -> " << out
                  << "\n";
}

// ---------------------------------------------------------------------------
// sweep

SweepSpec require_sweep(const ScenarioConfig& cfg, const Flags& f) {
    if (!cfg.sweep) throw ConfigError("this command needs a sweep block in the config");
    SweepSpec sw = *cfg.sweep;
    if (f.points > 0) {
        if (f.points < 2) throw ConfigError("--points must be at least 2");
        sw.points = f.points;
    }
    return sw;
}

void cmd_sweep(const Flags& f) {
    const ScenarioConfig cfg = load_flags_config(f);
    const SweepSpec sw = require_sweep(cfg, f);
    const auto values = sweep_values(sw);
    const auto mode = effective_mode(f, cfg);

    SweepResult<double> sr;
    if (mode == AmplitudeReconstruction::ExactComplex) {
        // exact fixed points per axis value; serial, the exact solver is the cost
        sr.axis = sw.axis;
        sr.points.resize(values.size());
        for (size_t i = 0; i < values.size(); ++i) {
            DriveParams<double> d = cfg.drv;
            apply_axis(sw.axis, values[i], d);
            SweepPoint<double>& pt = sr.points[i];
            pt.x = values[i];
            pt.roots = solve_exact_complex(cfg.sys, d);
            for (const auto& r : pt.roots) {
                pt.cls.push_back(
                    classify(cfg.sys, d, r.n1, r.n2, AmplitudeReconstruction::ExactComplex));
                pt.fold_flag.push_back(fold_proximal(cfg.sys, d, r.n1, r.n2));
            }
        }
    } else {
        sr = sweep(cfg.sys, cfg.drv, sw.axis, values);
    }

    std::ostringstream ss;
    if (effective_format(f, cfg) == "csv") write_sweep_csv(ss, cfg.sys, cfg.drv, sr, mode);
    else
        ss << json_text(nlohmann::json{{"mode", mode_name(mode)},
                                       {"sweep", sweep_to_json(cfg.sys, cfg.drv, sr, mode)}});
    const std::string out = effective_out(f, cfg);
    emit(out, ss.str());
    if (!out.empty()) std::cerr << values.size() << " points -> " << out << "\n";
}

// ---------------------------------------------------------------------------
// hysteresis

void cmd_hysteresis(const Flags& f) {
    const ScenarioConfig cfg = load_flags_config(f);
    if (effective_mode(f, cfg) == AmplitudeReconstruction::ExactComplex)
        throw ConfigError("hysteresis traces follow the photon-balance branches; exact mode "
                          "applies to solve and sweep");
    const SweepSpec sw = require_sweep(cfg, f);
    std::vector<double> up_values = sweep_values(sw);
    std::sort(up_values.begin(), up_values.end());
    std::vector<double> down_values(up_values.rbegin(), up_values.rend());

    const auto up = follow_hysteresis(cfg.sys, cfg.drv, sw.axis, up_values,
                                      HysteresisMode::Static);
    const auto down = follow_hysteresis(cfg.sys, cfg.drv, sw.axis, down_values,
                                        HysteresisMode::Static);

    const std::string out = effective_out(f, cfg);
    if (effective_format(f, cfg) == "csv") {
        if (out.empty())
            throw ConfigError(
                "csv hysteresis writes an _up/_down file pair and needs --out (or an output "
                "block); use --format json for stdout");
        std::ostringstream su, sd;
        write_hysteresis_csv(su, cfg.sys, cfg.drv, sw.axis, up);
        write_hysteresis_csv(sd, cfg.sys, cfg.drv, sw.axis, down);
        const std::string up_path = with_suffix(out, "_up");
        const std::string down_path = with_suffix(out, "_down");
        emit(up_path, su.str());
        emit(down_path, sd.str());
        std::cout << up_path << "\n" << down_path << "\n";
    } else {
        emit(out, json_text(nlohmann::json{{"axis", axis_name(sw.axis)},
                                           {"up", hysteresis_to_json(sw.axis, up)},
                                           {"down", hysteresis_to_json(sw.axis, down)}}));
        if (!out.empty()) std::cout << out << "\n";
    }
}

// ---------------------------------------------------------------------------
// simulate

void cmd_simulate(const Flags& f) {
    const ScenarioConfig cfg = load_flags_config(f);
    if (!f.mode.empty())
        throw ConfigError("simulate integrates the full equations of motion; --mode selects a "
                          "steady-state solver and does not apply");
    if (cfg.sweep)
        throw ConfigError("simulate runs at the fixed operating point: remove the sweep block");

    // horizon long enough for the mechanical ring-down to die out
    const double gm = std::min(cfg.sys.gamma_m1, cfg.sys.gamma_m2);
    const double horizon =
        gm > 0 ? 100.0 / gm : 1000.0 * 2.0 * M_PI / std::min(cfg.sys.omega_m1, cfg.sys.omega_m2);
    const int samples = f.points > 0 ? f.points : 2000;

    State8 y0 = State8::Zero();
    if (f.seed_set) {
        // deterministic kick for randomized test suites
        std::mt19937_64 rng(f.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const State8 w = default_error_scales(cfg.sys, cfg.drv);
        for (int i = 0; i < 8; ++i) y0[i] = 1e-6 * w[i] * u(rng);
    }

    const auto tr = ramp_drive(cfg.sys, cfg.drv, cfg.drv.p_pu, cfg.drv.p_pu, horizon, samples,
                               y0);

    std::ostringstream ss;
    if (effective_format(f, cfg) == "csv") {
        write_ramp_csv(ss, tr);
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (size_t i = 0; i < tr.t.size(); ++i)
            rows.push_back({{"t", tr.t[i]},
                            {"p_pu", tr.p_pu[i]},
                            {"n_p1", tr.n1[i]},
                            {"n_p2", tr.n2[i]},
                            {"x1", tr.X1[i]},
                            {"x2", tr.X2[i]}});
        ss << json_text(nlohmann::json{{"samples", std::move(rows)}});
    }
    const std::string out = effective_out(f, cfg);
    emit(out, ss.str());
    if (!out.empty()) std::cerr << tr.t.size() << " samples -> " << out << "\n";
}

// ---------------------------------------------------------------------------
// figures

std::vector<double> preset_axis(const FigurePreset& p, int points_override) {
    if (points_override <= 0) return p.axis_values;
    if (points_override < 2) throw ConfigError("--points must be at least 2");
    const double lo = p.axis_values.front();
    const double hi = p.axis_values.back();
    // power families use geometric spacing, detuning families linear
    if (p.kind == TraceKind::Hysteresis) return geomspace(lo, hi, points_override);
    return linspace(lo, hi, points_override);
}

void cmd_figures(const std::string& id, const Flags& f) {
    const auto presets = find_presets(id);
    const std::string fmt = f.format.empty() ? std::string("csv") : f.format;
    if (fmt != "csv" && fmt != "json")
        throw ConfigError("unknown format '" + fmt + "' (expected csv or json)");
    const std::filesystem::path outdir = f.out.empty() ? std::string(".") : f.out;
    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);
    if (ec) throw IoError("cannot create output directory '" + outdir.string() + "'");

    for (const FigurePreset* p : presets) {
        const auto values = preset_axis(*p, f.points);
        for (const PresetVariant& v : p->variants) {
            const std::string base = p->id + "_" + v.label;
            if (p->kind == TraceKind::Sweep) {
                const auto sr = sweep(v.sys, v.drv, p->axis, values);
                if (fmt == "csv") {
                    std::ostringstream ss;
                    write_sweep_csv(ss, v.sys, v.drv, sr);
                    const auto path = (outdir / (base + ".csv")).string();
                    emit(path, ss.str());
                    std::cout << path << "\n";
                } else {
                    const auto path = (outdir / (base + ".json")).string();
                    emit(path, json_text(nlohmann::json{
                                   {"preset", p->id},
                                   {"variant", v.label},
                                   {"sweep", sweep_to_json(v.sys, v.drv, sr)}}));
                    std::cout << path << "\n";
                }
            } else {
                std::vector<double> down_values(values.rbegin(), values.rend());
                const auto up = follow_hysteresis(v.sys, v.drv, p->axis, values,
                                                  HysteresisMode::Static);
                const auto down = follow_hysteresis(v.sys, v.drv, p->axis, down_values,
                                                    HysteresisMode::Static);
                if (fmt == "csv") {
                    std::ostringstream su, sd;
                    write_hysteresis_csv(su, v.sys, v.drv, p->axis, up);
                    write_hysteresis_csv(sd, v.sys, v.drv, p->axis, down);
                    const auto up_path = (outdir / (base + "_up.csv")).string();
                    const auto down_path = (outdir / (base + "_down.csv")).string();
                    emit(up_path, su.str());
                    emit(down_path, sd.str());
                    std::cout << up_path << "\n" << down_path << "\n";
                } else {
                    const auto path = (outdir / (base + ".json")).string();
                    emit(path, json_text(nlohmann::json{
                                   {"preset", p->id},
                                   {"variant", v.label},
                                   {"axis", axis_name(p->axis)},
                                   {"up", hysteresis_to_json(p->axis, up)},
                                   {"down", hysteresis_to_json(p->axis, down)}}));
                    std::cout << path << "\n";
                }
            }
        }
    }
}

void cmd_list_presets() {
    for (const auto& p : figure_presets()) {
        std::cout << p.id << "  " << (p.kind == TraceKind::Sweep ? "sweep" : "hysteresis")
                  << " over " << axis_name(p.axis) << ", " << p.axis_values.size()
                  << " points, observable " << p.observable << "\n    " << p.title
                  << "\n    variants:";
        for (const auto& v : p.variants) std::cout << ' ' << v.label;
        std::cout << "\n";
    }
}

const char* error_kind(int code) {
    switch (code) {
        case ConfigError::exit_code: return "config";
        case SolveError::exit_code: return "solver";
        case IoError::exit_code: return "io";
        default: return "internal";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady states, stability and dynamics of two tunnel-coupled "
                 "optomechanical cavities"};
    app.require_subcommand(1);

    Flags f;
    std::string preset_id;
    std::string command;

    auto add_common = [&](CLI::App* sub, bool config, bool mode, bool points, bool seed) {
        if (config)
            sub->add_option("--config", f.config_path, "scenario config file (JSON)");
        sub->add_option("--out", f.out,
                        "output destination (file; directory for `figures`; default stdout)");
        sub->add_option("--format", f.format, "csv or json (default csv)");
        if (mode)
            sub->add_option("--mode", f.mode,
                            "steady-state model: eq5 (photon balance) or exact (full "
                            "complex amplitudes)");
        if (points) sub->add_option("--points", f.points, "override the axis resolution");
        if (seed)
            sub->add_option("--seed", f.seed, "randomize the initial kick (test suites)")
                ->each([&](const std::string&) { f.seed_set = true; });
        sub->callback([&, name = sub->get_name()] { command = name; });
    };

    add_common(app.add_subcommand("solve", "steady states of one operating point"), true, true,
               false, false);
    add_common(app.add_subcommand("sweep", "root sets along a swept parameter"), true, true,
               true, false);
    add_common(app.add_subcommand("hysteresis", "occupied-branch up/down traces"), true, false,
               true, false);
    add_common(app.add_subcommand("simulate", "time evolution at fixed drive"), true, true,
               true, true);
    auto* figs = app.add_subcommand("figures", "run a built-in scenario preset");
    figs->add_option("preset", preset_id, "preset id (fig2a ... fig12b, or a prefix like fig4)")
        ->required();
    add_common(figs, false, false, true, false);
    app.add_subcommand("list-presets", "show the available presets")
        ->callback([&] { command = "list-presets"; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (command == "solve") cmd_solve(f);
        else if (command == "sweep") cmd_sweep(f);
        else if (command == "hysteresis") cmd_hysteresis(f);
        else if (command == "simulate") cmd_simulate(f);
        else if (command == "figures") cmd_figures(preset_id, f);
        else if (command == "list-presets") cmd_list_presets();
    } catch (const std::exception& e) {
        const int code = bistab::exit_code_for(e);
        std::cerr << nlohmann::json{{"error", {{"type", error_kind(code)},
                                               {"message", e.what()}}}}
                         .dump()
                  << "\n";
        return code;
    }
    return 0;
}
