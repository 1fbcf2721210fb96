// stirap: command-line front end.
//
//   stirap single|network|sweep|formulas [--config PATH] [--g X] [--delta X] [--ramp X]
//          [--gamma X] [--epsilon X] [--frame rwa|lab] [--noise super|lab|none]
//          [--sweep-var gamma|ramp] [--sweep-range START:STOP:COUNT] [--sweep-scale linear|log]
//          [--jobs N] [--out PATH]
//
// Exit status: 0 success, 1 configuration error, 2 integration failure.
// Errors are reported as one line on stderr: "error: <kind>: <reason>".

#include "stirap/harness.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kIntegrationError = 2;

int fail(const char* kind, const std::string& reason, int code) {
    std::string line = reason;
    for (auto& ch : line)
        if (ch == '\n' || ch == '\r') ch = ' ';
    std::cerr << "error: " << kind << ": " << line << '\n';
    return code;
}

struct Flags {
    std::string config;
    std::optional<double> g, delta, ramp, gamma, epsilon;
    std::optional<std::string> frame, noise, sweep_var, sweep_range, sweep_scale, out;
    std::optional<int> jobs;
};

void parse_range(const std::string& text, nlohmann::json& sweep) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (b == std::string::npos) throw stirap::ConfigError("sweep-range", "expected START:STOP:COUNT");
    try {
        std::size_t used = 0;
        const std::string s0 = text.substr(0, a), s1 = text.substr(a + 1, b - a - 1), s2 = text.substr(b + 1);
        const double start = std::stod(s0, &used);
        if (used != s0.size()) throw std::invalid_argument(s0);
        const double stop = std::stod(s1, &used);
        if (used != s1.size()) throw std::invalid_argument(s1);
        const int count = std::stoi(s2, &used);
        if (used != s2.size()) throw std::invalid_argument(s2);
        sweep["start"] = start;
        sweep["stop"] = stop;
        sweep["count"] = count;
    } catch (const std::logic_error&) {
        throw stirap::ConfigError("sweep-range", "expected START:STOP:COUNT with numeric fields");
    }
}

nlohmann::json build_document(const std::string& mode, const Flags& f) {
    nlohmann::json doc = f.config.empty() ? nlohmann::json::object() : stirap::read_config_document(f.config);
    if (!doc.is_object()) throw stirap::ConfigError("config", "document must be an object");
    doc["mode"] = mode;

    auto& params = doc["params"];
    if (params.is_null()) params = nlohmann::json::object();
    auto set = [&](const char* key, const std::optional<double>& v) {
        if (v) params[key] = *v;
    };
    set("g", f.g);
    set("delta", f.delta);
    set("ramp", f.ramp);
    set("gamma", f.gamma);
    set("epsilon", f.epsilon);
    if (f.noise) params["noise"] = *f.noise;
    if (f.frame) params["frame"] = *f.frame;

    if (f.sweep_var || f.sweep_range || f.sweep_scale) {
        auto& sweep = doc["sweep"];
        if (sweep.is_null()) sweep = nlohmann::json::object();
        if (f.sweep_var) sweep["variable"] = *f.sweep_var;
        if (f.sweep_range) parse_range(*f.sweep_range, sweep);
        if (f.sweep_scale) sweep["scale"] = *f.sweep_scale;
    }
    if (f.jobs) doc["jobs"] = *f.jobs;
    if (f.out) doc["output_path"] = *f.out;
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adiabatic entanglement generation in lambda-system cavity QED"};
    app.require_subcommand(1, 1);

    Flags f;
    app.add_option("--config", f.config, "JSON experiment configuration");
    app.add_option("--g", f.g, "cavity coupling (sets the unit of all rates)");
    app.add_option("--delta", f.delta, "peak drive amplitude [g]");
    app.add_option("--ramp", f.ramp, "envelope rate a [g]");
    app.add_option("--gamma", f.gamma, "excited-state dephasing rate [g]");
    app.add_option("--epsilon", f.epsilon, "transition energy for lab-frame runs [g]");
    app.add_option("--frame", f.frame, "rwa|lab");
    app.add_option("--noise", f.noise, "super|lab|none");
    app.add_option("--sweep-var", f.sweep_var, "gamma|ramp");
    app.add_option("--sweep-range", f.sweep_range, "START:STOP:COUNT");
    app.add_option("--sweep-scale", f.sweep_scale, "linear|log");
    app.add_option("--jobs", f.jobs, "worker threads for sweeps (default: all cores)");
    app.add_option("--out", f.out, "output directory");

    for (const char* name : {"single", "network", "sweep", "formulas"}) app.add_subcommand(name)->fallthrough();
    app.get_subcommand("single")->description("single-node population transfer");
    app.get_subcommand("network")->description("two-node Bell-state generation");
    app.get_subcommand("sweep")->description("gamma sweep (Bell fidelity) or ramp sweep (infidelity scaling)");
    app.get_subcommand("formulas")->description("closed-form eigenvalues, excited population, fidelity bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("config", e.what(), kConfigError);
    }

    const std::string mode = app.get_subcommands().front()->get_name();
    try {
        const auto cfg = stirap::parse_config(build_document(mode, f));
        stirap::run_experiment(cfg, std::cout);
    } catch (const stirap::ConfigError& e) {
        return fail("config", e.what(), kConfigError);
    } catch (const stirap::IntegrationError& e) {
        return fail("integration", e.what(), kIntegrationError);
    } catch (const stirap::DomainError& e) {
        return fail("config", e.what(), kConfigError);
    } catch (const std::exception& e) {
        return fail("io", e.what(), kConfigError);
    }
    return kOk;
}
