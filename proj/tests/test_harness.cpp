#include "stirap/harness.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace stirap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "stirap_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string config_error_key(const nlohmann::json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.key;
    }
    return "<none>";
}

struct CliResult {
    int status;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args, const std::string& name) {
    const fs::path dir = scratch("run_" + name);
    const std::string cmd = std::string(STIRAP_CLI_PATH) + " " + args + " > " + (dir / "stdout").string() + " 2> " +
                            (dir / "stderr").string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(dir / "stdout"), slurp(dir / "stderr")};
}

ExperimentConfig quick_single(const fs::path& out) {
    auto cfg = default_config(Mode::Single);
    cfg.params.ramp = 0.05;
    cfg.output_path = out;
    return cfg;
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    const auto cfg = parse_config(nlohmann::json::object());
    EXPECT_EQ(cfg.mode, Mode::Single);
    EXPECT_EQ(cfg.params.delta, 50.0);
    EXPECT_EQ(cfg.params.ramp, 0.01);
    EXPECT_EQ(cfg.params.gamma, 0.1);
    EXPECT_EQ(cfg.params.g, 1.0);
    EXPECT_EQ(cfg.params.noise, NoiseModel::SuperadiabaticProjector);
    EXPECT_EQ(cfg.params.frame, Frame::RotatingRWA);
    EXPECT_EQ(cfg.integrator.tolerance, 1e-9);
    EXPECT_FALSE(cfg.integrator.base_step.has_value());
    EXPECT_EQ(cfg.window.n, WindowConstants{}.n);
}

TEST(Config, NetworkModeDefaults) {
    EXPECT_EQ(parse_config({{"mode", "network"}}).params.delta, 70.0);
    EXPECT_EQ(parse_config({{"mode", "sweep-gamma"}}).params.delta, 70.0);
    const auto sweep = parse_config({{"mode", "sweep"}, {"sweep", {{"variable", "ramp"}}}});
    EXPECT_EQ(sweep.mode, Mode::SweepRamp);
    EXPECT_EQ(parse_config({{"mode", "sweep"}}).mode, Mode::SweepGamma);
}

TEST(Config, ErrorsNameTheKey) {
    EXPECT_EQ(config_error_key({{"params", {{"gamma", -1.0}}}}), "gamma");
    EXPECT_EQ(config_error_key({{"params", {{"delta", "big"}}}}), "params.delta");
    EXPECT_EQ(config_error_key({{"params", {{"colour", 1}}}}), "params.colour");
    EXPECT_EQ(config_error_key({{"mode", "dance"}}), "mode");
    EXPECT_EQ(config_error_key({{"params", {{"noise", "pink"}}}}), "params.noise");
    EXPECT_EQ(config_error_key({{"integrator", {{"base_step", 0.0}}}}), "integrator.base_step");
    EXPECT_EQ(config_error_key({{"integrator", {{"max_halvings", 1.5}}}}), "integrator.max_halvings");
    EXPECT_EQ(config_error_key({{"mode", "sweep-gamma"}, {"sweep", {{"count", 1}}}}), "sweep.count");
    EXPECT_EQ(config_error_key({{"mode", "sweep-gamma"}, {"sweep", {{"start", 2.0}, {"stop", 1.0}}}}), "sweep.start");
    EXPECT_EQ(config_error_key({{"params", {{"delta", 5.0}}}}), "delta");
    EXPECT_EQ(config_error_key({{"jobs", -2}}), "jobs");
    EXPECT_EQ(config_error_key(nlohmann::json::array()), "config");
}

TEST(Config, NoiseSelectsDefaultFrame) {
    const auto lab = parse_config({{"params", {{"noise", "lab"}}}});
    EXPECT_EQ(lab.params.frame, Frame::Lab);
    const auto lab_rwa = parse_config({{"params", {{"noise", "lab"}, {"frame", "rwa"}}}});
    EXPECT_EQ(lab_rwa.params.frame, Frame::RotatingRWA);
    EXPECT_EQ(config_error_key({{"params", {{"noise", "super"}, {"frame", "lab"}}}}), "frame");
}

TEST(Config, LoadsFromFile) {
    const auto dir = scratch("load");
    {
        std::ofstream f(dir / "cfg.json");
        f << R"({"mode": "network", "params": {"gamma": 0.3}, "params_right": {"gamma": 0.2}, "seed": 7})";
    }
    const auto cfg = load_config(dir / "cfg.json");
    EXPECT_EQ(cfg.mode, Mode::Network);
    EXPECT_EQ(cfg.params.gamma, 0.3);
    EXPECT_EQ(cfg.right().gamma, 0.2);
    EXPECT_EQ(cfg.right().delta, 70.0);
    EXPECT_EQ(cfg.seed, 7);
    {
        std::ofstream f(dir / "bad.json");
        f << "{ not json";
    }
    EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
    EXPECT_THROW(load_config(dir / "missing.json"), ConfigError);
}

TEST(Sweep, GridValues) {
    SweepSpec s;
    s.start = 0.0;
    s.stop = 1.0;
    s.count = 11;
    const auto v = s.values();
    ASSERT_EQ(v.size(), 11u);
    EXPECT_NEAR(v[3], 0.3, 1e-15);
    EXPECT_EQ(v.back(), 1.0);
    s.variable = "ramp";
    s.start = 0.002;
    s.stop = 0.02;
    s.count = 3;
    s.log_scale = true;
    const auto w = s.values();
    EXPECT_NEAR(w[1], std::sqrt(0.002 * 0.02), 1e-15);
    EXPECT_EQ(w.back(), 0.02);
}

TEST(Sweep, ParallelForPreservesOrderAndReportsLowestFailure) {
    std::vector<int> out(50, -1);
    parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
    try {
        parallel_for(20, 3, [](std::size_t i) {
            if (i == 7 || i == 13) throw std::runtime_error("task " + std::to_string(i));
        });
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "task 7");
    }
}

TEST(Sweep, GammaDegenerateRangeGivesIdenticalRows) {
    auto cfg = default_config(Mode::SweepGamma);
    cfg.params.ramp = 0.1;
    cfg.sweep.start = cfg.sweep.stop = 0.0;
    cfg.sweep.count = 2;
    cfg.jobs = 2;
    cfg.validate();
    const auto r = sweep_gamma(cfg);
    ASSERT_EQ(r.values.size(), 2u);
    EXPECT_EQ(r.outputs[0][0], r.outputs[0][1]);
    EXPECT_EQ(r.outputs[1][0], r.outputs[1][1]);
    const auto t = r.table();
    EXPECT_EQ(t.header, (std::vector<std::string>{"gamma", "F_super", "F_lab"}));
    EXPECT_EQ(t.rows[0], t.rows[1]);
}

TEST(Sweep, RampScalingSlope) {
    auto cfg = default_config(Mode::SweepRamp);
    cfg.sweep.start = 0.002;
    cfg.sweep.stop = 0.02;
    cfg.sweep.count = 4;
    const auto r = sweep_ramp(cfg);
    EXPECT_NEAR(loglog_slope(r.values, r.outputs[0]), 1.0, 1e-6);
    for (std::size_t i = 0; i < r.values.size(); ++i) EXPECT_GE(r.outputs[1][i], r.outputs[0][i]);
}

TEST(Experiment, FormulasReport) {
    auto cfg = default_config(Mode::Formulas);
    cfg.output_path = scratch("formulas");
    std::ostringstream log;
    const auto res = run_experiment(cfg, log);
    EXPECT_NEAR(res.headline, 2.588e-3, 1e-6);
    const std::string text = log.str();
    EXPECT_NE(text.find("max_Pe_formula=0.00258804"), std::string::npos) << text;
    EXPECT_NE(text.find("integral_x2=0.0171445924"), std::string::npos) << text;
    EXPECT_NE(text.find("approximation_unreliable=false"), std::string::npos);
    EXPECT_EQ(slurp(cfg.output_path / "formulas.txt"), text);
}

TEST(Experiment, SingleRunIsByteStable) {
    const auto a = scratch("single_a");
    const auto b = scratch("single_b");
    std::ostringstream log_a, log_b;
    const auto ra = run_experiment(quick_single(a), log_a);
    run_experiment(quick_single(b), log_b);
    EXPECT_EQ(log_a.str(), log_b.str());
    ASSERT_EQ(ra.artifacts.size(), 2u);
    for (const auto& art : ra.artifacts) {
        const auto name = art.filename();
        EXPECT_FALSE(slurp(a / name).empty());
        EXPECT_EQ(slurp(a / name), slurp(b / name));
    }
    EXPECT_EQ(log_a.str().rfind("P0(T)=", 0), 0u);
}

TEST(Experiment, PlotDataLayout) {
    const auto dir = scratch("plot");
    std::ostringstream log;
    run_experiment(quick_single(dir), log);
    std::istringstream is(slurp(dir / "populations.dat"));
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "# title: population transfer");
    std::getline(is, line);
    EXPECT_EQ(line, "# x: t [1/g]");
    std::getline(is, line);
    EXPECT_EQ(line, "# series: P0 P1 Pe");
    bool saw_columns = false;
    while (std::getline(is, line) && !line.empty()) {
        EXPECT_EQ(line[0], '#');
        if (line == "# columns: t P0 P1 Pe") saw_columns = true;
    }
    EXPECT_TRUE(saw_columns);
    std::getline(is, line);
    EXPECT_EQ(line.rfind("0 ", 0), 0u);
}

TEST(Experiment, UnwritableOutput) {
    const auto dir = scratch("unwritable");
    { std::ofstream(dir / "file") << "x"; }
    auto cfg = default_config(Mode::Formulas);
    cfg.output_path = dir / "file";
    std::ostringstream log;
    EXPECT_THROW(run_experiment(cfg, log), std::runtime_error);
}

TEST(Cli, FormulasSucceeds) {
    const auto out = scratch("cli_formulas_out");
    const auto r = run_cli("formulas --out " + out.string(), "formulas");
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("max_Pe_formula="), std::string::npos);
    EXPECT_TRUE(fs::exists(out / "formulas.txt"));
}

TEST(Cli, FlagsOverrideConfigFile) {
    const auto dir = scratch("cli_override");
    { std::ofstream(dir / "c.json") << R"({"params": {"delta": 80, "ramp": 0.02}})"; }
    const auto r = run_cli("formulas --config " + (dir / "c.json").string() + " --delta 100 --out " + dir.string(),
                           "override");
    ASSERT_EQ(r.status, 0) << r.err;
    std::ostringstream expected;
    auto cfg = default_config(Mode::Formulas);
    cfg.params.delta = 100.0;
    cfg.params.ramp = 0.02;
    cfg.output_path = scratch("cli_override_ref");
    run_experiment(cfg, expected);
    EXPECT_EQ(r.out, expected.str());
}

TEST(Cli, ConfigErrorsExitOne) {
    for (const std::string args : {"single --gamma -1", "single --frame sideways", "sweep --sweep-range 0:1",
                                   "single --bogus 3", "sweep --sweep-var ramp --sweep-range 1:0.5:3",
                                   "single --config /nonexistent/file.json", ""}) {
        const auto r = run_cli(args, "config_error");
        EXPECT_EQ(r.status, 1) << args;
        EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << args << ": " << r.err;
        EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << args << ": " << r.err;
    }
    const auto r = run_cli("single --gamma -1", "config_gamma");
    EXPECT_NE(r.err.find("gamma"), std::string::npos);
}

TEST(Cli, IntegrationFailureExitsTwo) {
    const auto dir = scratch("cli_integration");
    { std::ofstream(dir / "c.json") << R"({"integrator": {"base_step": 5.0, "max_halvings": 0}})"; }
    const auto r = run_cli("single --config " + (dir / "c.json").string() + " --out " + dir.string(), "integration");
    EXPECT_EQ(r.status, 2) << r.err;
    EXPECT_EQ(r.err.rfind("error: integration: ", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}
