// harness.hpp: experiment configuration, orchestration and artifact emission.
//
// Config documents are JSON objects:
//
//   {
//     "mode": "single" | "network" | "sweep-gamma" | "sweep-ramp" | "formulas" | "sweep",
//     "params":       { "g", "delta", "ramp", "gamma", "epsilon", "frame": "rwa"|"lab",
//                       "noise": "super"|"lab"|"none" },
//     "params_right": { ... same keys, network mode only; defaults to "params" },
//     "sweep":        { "variable": "gamma"|"ramp", "start", "stop", "count", "scale": "linear"|"log" },
//     "integrator":   { "base_step", "tolerance", "max_halvings", "record_stride" },
//     "window":       { "c", "n" },
//     "output_path":  "out",
//     "jobs":         0,
//     "seed":         null
//   }
//
// Every key is optional. Rates are in units of g. Unknown keys are rejected.

#pragma once

#include "stirap/dynamics.hpp"
#include "stirap/frames.hpp"
#include "stirap/io.hpp"
#include "stirap/model.hpp"
#include "stirap/network.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace stirap {

enum class Mode { Single, Network, SweepGamma, SweepRamp, Formulas };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::Single: return "single";
        case Mode::Network: return "network";
        case Mode::SweepGamma: return "sweep-gamma";
        case Mode::SweepRamp: return "sweep-ramp";
        case Mode::Formulas: return "formulas";
    }
    return "?";
}

inline const char* to_string(Frame f) { return f == Frame::Lab ? "lab" : "rwa"; }

inline const char* to_string(NoiseModel n) {
    switch (n) {
        case NoiseModel::SuperadiabaticProjector: return "super";
        case NoiseModel::LabExcitedProjector: return "lab";
        case NoiseModel::None: return "none";
    }
    return "?";
}

struct SweepSpec {
    std::string variable = "gamma";
    double start = 0.0;
    double stop = 1.0;
    int count = 11;
    bool log_scale = false;

    void validate() const {
        if (variable != "gamma" && variable != "ramp")
            throw ConfigError("sweep.variable", "must be 'gamma' or 'ramp'");
        if (!std::isfinite(start) || !std::isfinite(stop)) throw ConfigError("sweep.start", "must be finite");
        // start == stop is accepted and yields repeated points
        if (start > stop) throw ConfigError("sweep.start", "must not exceed sweep.stop");
        if (count < 2) throw ConfigError("sweep.count", "must be >= 2");
        if (log_scale && !(start > 0.0)) throw ConfigError("sweep.start", "must be > 0 on a log scale");
    }

    std::vector<double> values() const {
        std::vector<double> v(count);
        for (int i = 0; i < count; ++i) {
            const double f = static_cast<double>(i) / (count - 1);
            v[i] = log_scale ? start * std::pow(stop / start, f) : start + f * (stop - start);
        }
        v.back() = stop;
        return v;
    }
};

struct ExperimentConfig {
    Mode mode = Mode::Single;
    SystemParams params;
    std::optional<SystemParams> params_right;
    SweepSpec sweep;
    IntegratorConfig integrator;
    WindowConstants window;
    std::filesystem::path output_path = "out";
    int jobs = 0;                        // 0: one worker per hardware thread
    std::optional<std::int64_t> seed;    // unused, all computation is deterministic

    SystemParams right() const { return params_right.value_or(params); }

    void validate() const {
        params.validate();
        if (params_right) params_right->validate();
        integrator.validate();
        if (mode == Mode::SweepGamma || mode == Mode::SweepRamp) sweep.validate();
        if (mode == Mode::SweepGamma && sweep.variable != "gamma")
            throw ConfigError("sweep.variable", "sweep-gamma requires variable 'gamma'");
        if (mode == Mode::SweepRamp && sweep.variable != "ramp")
            throw ConfigError("sweep.variable", "sweep-ramp requires variable 'ramp'");
        if (mode == Mode::SweepGamma && sweep.start < 0.0) throw ConfigError("sweep.start", "gamma must be >= 0");
        if (mode == Mode::SweepRamp && !(sweep.start > 0.0)) throw ConfigError("sweep.start", "ramp must be > 0");
        if (!(window.c > 0.0)) throw ConfigError("window.c", "must be > 0");
        if (!(window.n > 0.0)) throw ConfigError("window.n", "must be > 0");
        if (jobs < 0) throw ConfigError("jobs", "must be >= 0");
        if (mode == Mode::Single || mode == Mode::Network || mode == Mode::SweepGamma) {
            if (!params.strong_drive()) throw ConfigError("delta", "protocol runs require delta/g >= 10");
            if (mode != Mode::Single && params_right && !params_right->strong_drive())
                throw ConfigError("params_right.delta", "protocol runs require delta/g >= 10");
        }
    }
};

// Defaults: delta = 50 g for single-node work, 70 g for the two-node runs.
inline ExperimentConfig default_config(Mode mode) {
    ExperimentConfig c;
    c.mode = mode;
    c.params.delta = (mode == Mode::Network || mode == Mode::SweepGamma) ? 70.0 : 50.0;
    if (mode == Mode::SweepRamp) {
        c.sweep = {"ramp", 0.002, 0.02, 5, true};
    }
    return c;
}

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
    const std::set<std::string> k(known.begin(), known.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!k.count(it.key())) throw ConfigError(where + it.key(), "unknown key");
}

inline const json& object_at(const json& j, const std::string& key) {
    if (!j.is_object()) throw ConfigError(key, "must be an object");
    return j;
}

inline void read_number(const json& obj, const char* key, const std::string& where, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + key, "must be a number");
    out = v.get<double>();
}

inline void read_int(const json& obj, const char* key, const std::string& where, int& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + key, "must be an integer");
    out = v.get<int>();
}

inline std::string read_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where + key, "must be a string");
    return v.get<std::string>();
}

inline Frame parse_frame(const std::string& s, const std::string& key) {
    if (s == "rwa") return Frame::RotatingRWA;
    if (s == "lab") return Frame::Lab;
    throw ConfigError(key, "must be 'rwa' or 'lab'");
}

inline NoiseModel parse_noise(const std::string& s, const std::string& key) {
    if (s == "super") return NoiseModel::SuperadiabaticProjector;
    if (s == "lab") return NoiseModel::LabExcitedProjector;
    if (s == "none") return NoiseModel::None;
    throw ConfigError(key, "must be 'super', 'lab' or 'none'");
}

inline SystemParams parse_params(const json& j, const std::string& where, SystemParams p) {
    object_at(j, where);
    reject_unknown(j, where + ".", {"g", "delta", "ramp", "gamma", "epsilon", "frame", "noise"});
    const std::string w = where + ".";
    read_number(j, "g", w, p.g);
    read_number(j, "delta", w, p.delta);
    read_number(j, "ramp", w, p.ramp);
    read_number(j, "gamma", w, p.gamma);
    read_number(j, "epsilon", w, p.epsilon);
    const bool has_frame = j.contains("frame");
    if (j.contains("noise")) p.noise = parse_noise(read_string(j, "noise", w), w + "noise");
    if (has_frame) {
        p.frame = parse_frame(read_string(j, "frame", w), w + "frame");
    } else {
        // the lab projector belongs to the lab-frame comparison unless a frame is given
        p.frame = p.noise == NoiseModel::LabExcitedProjector ? Frame::Lab : Frame::RotatingRWA;
    }
    return p;
}

inline Mode parse_mode(const std::string& s, const json& doc) {
    if (s == "single") return Mode::Single;
    if (s == "network") return Mode::Network;
    if (s == "sweep-gamma") return Mode::SweepGamma;
    if (s == "sweep-ramp") return Mode::SweepRamp;
    if (s == "formulas") return Mode::Formulas;
    if (s == "sweep") {
        std::string var = "gamma";
        if (doc.contains("sweep") && doc.at("sweep").is_object() && doc.at("sweep").contains("variable"))
            var = read_string(doc.at("sweep"), "variable", "sweep.");
        if (var == "gamma") return Mode::SweepGamma;
        if (var == "ramp") return Mode::SweepRamp;
        throw ConfigError("sweep.variable", "must be 'gamma' or 'ramp'");
    }
    throw ConfigError("mode", "must be one of single, network, sweep, sweep-gamma, sweep-ramp, formulas");
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
    using detail::json;
    if (doc.is_null()) return default_config(Mode::Single);
    if (!doc.is_object()) throw ConfigError("config", "document must be an object");
    detail::reject_unknown(doc, "", {"mode", "params", "params_right", "sweep", "integrator", "window",
                                     "output_path", "jobs", "seed"});

    const Mode mode = doc.contains("mode") ? detail::parse_mode(detail::read_string(doc, "mode", ""), doc)
                                           : Mode::Single;
    ExperimentConfig c = default_config(mode);

    if (doc.contains("params")) c.params = detail::parse_params(doc.at("params"), "params", c.params);
    if (doc.contains("params_right"))
        c.params_right = detail::parse_params(doc.at("params_right"), "params_right", c.params);

    if (doc.contains("sweep")) {
        const auto& s = detail::object_at(doc.at("sweep"), "sweep");
        detail::reject_unknown(s, "sweep.", {"variable", "start", "stop", "count", "scale"});
        if (s.contains("variable")) c.sweep.variable = detail::read_string(s, "variable", "sweep.");
        detail::read_number(s, "start", "sweep.", c.sweep.start);
        detail::read_number(s, "stop", "sweep.", c.sweep.stop);
        detail::read_int(s, "count", "sweep.", c.sweep.count);
        if (s.contains("scale")) {
            const auto scale = detail::read_string(s, "scale", "sweep.");
            if (scale != "linear" && scale != "log") throw ConfigError("sweep.scale", "must be 'linear' or 'log'");
            c.sweep.log_scale = scale == "log";
        }
    }

    if (doc.contains("integrator")) {
        const auto& s = detail::object_at(doc.at("integrator"), "integrator");
        detail::reject_unknown(s, "integrator.", {"base_step", "tolerance", "max_halvings", "record_stride"});
        if (s.contains("base_step")) {
            double h = 0.0;
            detail::read_number(s, "base_step", "integrator.", h);
            c.integrator.base_step = h;
        }
        detail::read_number(s, "tolerance", "integrator.", c.integrator.tolerance);
        detail::read_int(s, "max_halvings", "integrator.", c.integrator.max_halvings);
        detail::read_int(s, "record_stride", "integrator.", c.integrator.record_stride);
    }

    if (doc.contains("window")) {
        const auto& s = detail::object_at(doc.at("window"), "window");
        detail::reject_unknown(s, "window.", {"c", "n"});
        detail::read_number(s, "c", "window.", c.window.c);
        detail::read_number(s, "n", "window.", c.window.n);
    }

    if (doc.contains("output_path")) c.output_path = detail::read_string(doc, "output_path", "");
    detail::read_int(doc, "jobs", "", c.jobs);
    if (doc.contains("seed") && !doc.at("seed").is_null()) {
        if (!doc.at("seed").is_number_integer()) throw ConfigError("seed", "must be an integer");
        c.seed = doc.at("seed").get<std::int64_t>();
    }

    c.validate();
    return c;
}

inline nlohmann::json read_config_document(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot read " + path.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("malformed document: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_config_document(path));
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The exception of the
// lowest failing index, if any, is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(n, jobs > 0 ? static_cast<std::size_t>(jobs) : hw);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct SweepResult {
    std::string variable;
    std::vector<double> values;
    std::vector<std::string> series;
    std::vector<std::vector<double>> outputs;  // outputs[series][index]
    std::vector<std::vector<IntegratorDiagnostics>> diagnostics;

    io::Table table() const {
        io::Table t;
        t.header.push_back(variable);
        for (const auto& s : series) t.header.push_back(s);
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::vector<double> row{values[i]};
            for (const auto& o : outputs) row.push_back(o[i]);
            t.add(std::move(row));
        }
        return t;
    }
};

inline SystemParams with_noise_mode(SystemParams p, NoiseModel n) {
    p.noise = n;
    p.frame = n == NoiseModel::SuperadiabaticProjector ? Frame::RotatingRWA : Frame::Lab;
    return p;
}

// Bell fidelity versus gamma for the superadiabatic (RWA) and the lab-frame
// (no RWA, bare |e><e| dephasing) descriptions.
inline SweepResult sweep_gamma(const ExperimentConfig& cfg) {
    SweepResult r;
    r.variable = "gamma";
    r.values = cfg.sweep.values();
    r.series = {"F_super", "F_lab"};
    const std::size_t n = r.values.size();
    r.outputs.assign(2, std::vector<double>(n));
    r.diagnostics.assign(2, std::vector<IntegratorDiagnostics>(n));

    parallel_for(2 * n, cfg.jobs, [&](std::size_t task) {
        const std::size_t i = task / 2, s = task % 2;
        const NoiseModel mode = s == 0 ? NoiseModel::SuperadiabaticProjector : NoiseModel::LabExcitedProjector;
        SystemParams l = with_noise_mode(cfg.params, mode);
        SystemParams rr = with_noise_mode(cfg.right(), mode);
        l.gamma = rr.gamma = r.values[i];
        const auto run = run_entanglement_generation(l, rr, cfg.integrator);
        r.outputs[s][i] = run.bell_fidelity;
        r.diagnostics[s][i] = run.trajectory.diagnostics;
    });
    return r;
}

// 1 - F estimate (gamma * int |x|^2) and the analytic bound versus the ramp rate.
inline SweepResult sweep_ramp(const ExperimentConfig& cfg) {
    SweepResult r;
    r.variable = "a";
    r.values = cfg.sweep.values();
    r.series = {"one_minus_F", "bound"};
    const std::size_t n = r.values.size();
    r.outputs.assign(2, std::vector<double>(n));
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
        SystemParams p = cfg.params;
        p.ramp = r.values[i];
        r.outputs[0][i] = 1.0 - perturbative_fidelity(p).fidelity_estimate;
        r.outputs[1][i] = fidelity_bound(p, cfg.window.n).bound;
    });
    return r;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ExperimentResult {
    std::vector<std::filesystem::path> artifacts;
    std::vector<std::string> summary;  // one "key=value ..." line each
    double headline = 0.0;             // P0(T), Bell F, or the first sweep output
};

namespace detail {

inline std::vector<std::pair<std::string, std::string>> describe(const SystemParams& p) {
    return {{"g", io::num(p.g)},         {"delta", io::num(p.delta)},     {"ramp", io::num(p.ramp)},
            {"gamma", io::num(p.gamma)}, {"epsilon", io::num(p.epsilon)}, {"frame", to_string(p.frame)},
            {"noise", to_string(p.noise)}};
}

inline std::vector<std::string> formulas_report(const ExperimentConfig& cfg) {
    const SystemParams& p = cfg.params;
    const double T = p.duration();
    const auto e0 = adiabatic_eigenvalues(p, 0.0);
    const auto eT = adiabatic_eigenvalues(p, T);
    const auto peak = max_excited_population(p);
    const auto pf = perturbative_fidelity(p);
    const auto bound = fidelity_bound(p, cfg.window.n);
    return {
        "T=" + io::num(T),
        "eigenvalues_t0 E0=" + io::num(e0.zero) + " Ee=" + io::num(e0.excited) + " E1=" + io::num(e0.one),
        "eigenvalues_tT E0=" + io::num(eT.zero) + " Ee=" + io::num(eT.excited) + " E1=" + io::num(eT.one),
        "max_Pe_formula=" + io::num(peak.p_max_formula) + " t_star_formula=" + io::num(peak.t_star_formula),
        "max_Pe_numeric=" + io::num(peak.p_max_numeric) + " t_star_numeric=" + io::num(peak.t_star_numeric),
        std::string("approximation_unreliable=") + (peak.approximation_unreliable ? "true" : "false"),
        "integral_x2=" + io::num(pf.integral) + " perturbative_F=" + io::num(pf.fidelity_estimate),
        "bound=" + io::num(bound.bound) + " n=" + io::num(cfg.window.n) + " c=" + io::num(cfg.window.c),
    };
}

}  // namespace detail

// Executes one experiment, writing artifacts under cfg.output_path and the
// summary lines to `log`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    ExperimentResult out;
    const auto& dir = cfg.output_path;

    switch (cfg.mode) {
        case Mode::Single: {
            const auto traj = run_single_transfer(cfg.params, cfg.integrator);
            const auto& fin = traj.final_populations();
            double max_pe = 0.0;
            for (const auto& pop : traj.populations) max_pe = std::max(max_pe, pop(idx(BasisLabel::E)));
            out.headline = fin(0);
            out.summary.push_back("P0(T)=" + io::num(fin(0)) + " P1(T)=" + io::num(fin(1)) +
                                  " Pe(T)=" + io::num(fin(2)) + " max_Pe=" + io::num(max_pe));
            const auto table = io::trajectory_table(traj);
            io::save_csv(dir / "trajectory.csv", table);
            io::emit_plot_data({"population transfer", "t [1/g]", {"P0", "P1", "Pe"},
                                detail::describe(cfg.params), table},
                               dir / "populations.dat");
            out.artifacts = {dir / "trajectory.csv", dir / "populations.dat"};
            break;
        }
        case Mode::Network: {
            const auto run = run_entanglement_generation(cfg.params, cfg.right(), cfg.integrator);
            out.headline = run.bell_fidelity;
            out.summary.push_back("bell_fidelity=" + io::num(run.bell_fidelity));
            const auto table = io::trajectory_table(run.trajectory);
            io::save_csv(dir / "network_trajectory.csv", table);
            io::emit_plot_data({"two-node transfer (populations summed over nodes)", "t [1/g]",
                                {"P0", "P1", "Pe"}, detail::describe(cfg.params), table},
                               dir / "network_populations.dat");
            out.artifacts = {dir / "network_trajectory.csv", dir / "network_populations.dat"};
            break;
        }
        case Mode::SweepGamma: {
            const auto r = sweep_gamma(cfg);
            const auto table = r.table();
            io::save_csv(dir / "fidelity_curve.csv", table);
            auto params = detail::describe(cfg.params);
            params.erase(std::remove_if(params.begin(), params.end(),
                                        [](const auto& kv) {
                                            return kv.first == "gamma" || kv.first == "frame" ||
                                                   kv.first == "noise";
                                        }),
                         params.end());
            io::emit_plot_data({"Bell fidelity versus dephasing rate", "gamma [g]", r.series, params, table},
                               dir / "fidelity_curve.dat");
            out.artifacts = {dir / "fidelity_curve.csv", dir / "fidelity_curve.dat"};
            out.headline = r.outputs[0].front();
            for (std::size_t i = 0; i < r.values.size(); ++i)
                out.summary.push_back("gamma=" + io::num(r.values[i]) + " F_super=" + io::num(r.outputs[0][i]) +
                                      " F_lab=" + io::num(r.outputs[1][i]));
            break;
        }
        case Mode::SweepRamp: {
            const auto r = sweep_ramp(cfg);
            const auto table = r.table();
            io::save_csv(dir / "ramp_scaling.csv", table);
            auto params = detail::describe(cfg.params);
            params.erase(std::remove_if(params.begin(), params.end(),
                                        [](const auto& kv) { return kv.first == "ramp"; }),
                         params.end());
            params.emplace_back("n", io::num(cfg.window.n));
            io::emit_plot_data({"infidelity scaling with ramp rate", "a [g]", r.series, params, table},
                               dir / "ramp_scaling.dat");
            out.artifacts = {dir / "ramp_scaling.csv", dir / "ramp_scaling.dat"};
            out.headline = r.outputs[0].front();
            for (std::size_t i = 0; i < r.values.size(); ++i)
                out.summary.push_back("a=" + io::num(r.values[i]) + " one_minus_F=" + io::num(r.outputs[0][i]) +
                                      " bound=" + io::num(r.outputs[1][i]));
            if (r.values.front() < r.values.back())
                out.summary.push_back("loglog_slope=" + io::num(loglog_slope(r.values, r.outputs[0])));
            break;
        }
        case Mode::Formulas: {
            out.summary = detail::formulas_report(cfg);
            out.headline = max_excited_population(cfg.params).p_max_formula;
            auto f = io::open_output(dir / "formulas.txt");
            for (const auto& line : out.summary) f << line << '\n';
            out.artifacts = {dir / "formulas.txt"};
            break;
        }
    }
    for (const auto& line : out.summary) log << line << '\n';
    return out;
}

}  // namespace stirap
