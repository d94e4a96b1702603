#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stefan/harness.hpp"

using namespace stefan;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    fs::path d = fs::temp_directory_path() / "stefan_front_tests" / (std::string(info->test_suite_name()) + "_" + info->name()) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

json quick_config(double T, const std::string& data = "traveling_wave") {
    json j = baseline_config_json();
    j["T_final"] = T;
    j["initial_data"] = {{"type", data}};
    return j;
}

std::string config_error(const json& j) {
    try {
        config_from_json(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, BaselineDefaults) {
    const auto c = config_from_json(baseline_config_json());
    EXPECT_EQ(c.gamma, 0.1);
    EXPECT_EQ(c.kinetics.V0, 2.0);
    EXPECT_EQ(c.method, "ie");
    ASSERT_EQ(c.snapshot_times.size(), 4u);
    EXPECT_DOUBLE_EQ(c.snapshot_times.back(), c.T_final);
    EXPECT_EQ(c.oscillation_window, 0.25);
}

TEST(Config, MissingKineticsKeyIsNamed) {
    json j = baseline_config_json();
    j["params"]["kinetics"].erase("A");
    const auto msg = config_error(j);
    EXPECT_NE(msg.find("params.kinetics.A"), std::string::npos) << msg;
    j = baseline_config_json();
    j["params"].erase("kinetics");
    EXPECT_NE(config_error(j).find("params.kinetics"), std::string::npos);
}

TEST(Config, UnknownKeyIsNamed) {
    json j = baseline_config_json();
    j["params"]["grid"] = {{"L", 40.0}, {"dz", 0.1}};
    EXPECT_NE(config_error(j).find("params.grid.dz"), std::string::npos);
}

TEST(Config, SyntaxErrorCarriesLineAndColumn) {
    const auto d = scratch_dir("cfg");
    {
        std::ofstream f(d / "bad.json");
        f << "{\n  \"T_final\": 1.0,\n  \"params\": { \"gamma\" 0.1 }\n}\n";
    }
    try {
        load_config(d / "bad.json");
        FAIL() << "expected a config error";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
    }
}

TEST(Config, RejectsBadValues) {
    json j = baseline_config_json();
    j["snapshot_times"] = {20.0};
    EXPECT_FALSE(config_error(j).empty());
    j = baseline_config_json();
    j["params"]["kinetics"]["u_inf"] = 0.5;
    EXPECT_NE(config_error(j).find("params"), std::string::npos);
    j = baseline_config_json();
    j["initial_data"] = {{"type", "file"}, {"path", "/nonexistent/u0.csv"}};
    EXPECT_NE(config_error(j).find("initial_data.path"), std::string::npos);
    j = baseline_config_json();
    j["params"]["solver"] = {{"method", "spectral"}};
    EXPECT_NE(config_error(j).find("params.solver.method"), std::string::npos);
}

TEST(Config, RoundTripRecordsDefaults) {
    const auto c = config_from_json(quick_config(2.0, "zero"));
    const json j = to_json(c);
    EXPECT_TRUE(j["params"]["grid"].contains("dx"));
    EXPECT_TRUE(j["params"]["solver"].contains("dt"));
    const auto c2 = config_from_json(j);
    EXPECT_EQ(to_json(c2), j);
}

TEST(Config, Overrides) {
    json j = baseline_config_json();
    apply_overrides(j, {0.01, 0.05, 20.0});
    const auto c = config_from_json(j);
    EXPECT_EQ(c.solver.dt, 0.01);
    EXPECT_EQ(c.grid.dx, 0.05);
    EXPECT_EQ(c.grid.L, 20.0);
}

TEST(Simulate, ZeroDataFirstRowIsSlowSpeed) {
    json j = quick_config(10.0, "zero");
    apply_overrides(j, {1e-2, 0.05, std::nullopt});
    const auto c = config_from_json(j);
    const auto d = scratch_dir("run");
    cmd_simulate(c, d);
    std::vector<std::string> header;
    const auto rows = io::read_csv(d / "v.csv", &header);
    ASSERT_GE(header.size(), 2u);
    EXPECT_EQ(header[1], "v");
    EXPECT_DOUBLE_EQ(io::parse_num(rows.at(0).at(1), "v"), -c.kinetics.build().v0());
    EXPECT_EQ(rows.size(), 1001u);
}

class TravelingWaveRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new fs::path(fs::temp_directory_path() / "stefan_front_tests" / "tw_run");
        fs::remove_all(*dir_);
        config_ = new RunConfig(config_from_json(quick_config(2.0)));
        result_ = new SimulationResult(cmd_simulate(*config_, *dir_ / "a"));
        cmd_simulate(*config_, *dir_ / "b");
    }
    static void TearDownTestSuite() {
        delete result_;
        delete config_;
        delete dir_;
    }
    static fs::path* dir_;
    static RunConfig* config_;
    static SimulationResult* result_;
};

fs::path* TravelingWaveRun::dir_ = nullptr;
RunConfig* TravelingWaveRun::config_ = nullptr;
SimulationResult* TravelingWaveRun::result_ = nullptr;

TEST_F(TravelingWaveRun, BoundsAllPassAndSpeedHeld) {
    EXPECT_TRUE(result_->bounds.all_pass());
    ASSERT_TRUE(result_->tw_max_deviation.has_value());
    EXPECT_LE(*result_->tw_max_deviation, 1e-3);
    const json rep = io::read_json(*dir_ / "a" / "bounds_report.json");
    EXPECT_TRUE(rep.at("all_pass").get<bool>());
    for (const auto& c : rep.at("checks")) {
        for (const char* key : {"estimate_id", "paper_eq", "bound", "measured_max", "margin", "pass"}) EXPECT_TRUE(c.contains(key)) << key;
    }
}

TEST_F(TravelingWaveRun, ManifestFilesExistAndParse) {
    const fs::path d = *dir_ / "a";
    const json m = io::read_json(d / "manifest.json");
    const auto c = load_config(d / m.at("config").get<std::string>());
    EXPECT_EQ(to_json(c), to_json(*config_));
    const auto h = io::read_history(d / m.at("history").get<std::string>());
    EXPECT_EQ(h.v, result_->history.v);
    EXPECT_EQ(h.s, result_->history.s);
    const auto u0 = io::read_field(d / m.at("initial_data").get<std::string>());
    EXPECT_EQ(u0.values(), result_->u0.values());
    ASSERT_EQ(m.at("snapshots").size(), result_->snapshots.size());
    for (std::size_t i = 0; i < result_->snapshots.size(); ++i) {
        const auto& s = m.at("snapshots")[i];
        for (const char* key : {"file", "t1_file", "t2_file"}) {
            ASSERT_TRUE(fs::exists(d / s.at(key).get<std::string>())) << s.at(key);
            EXPECT_EQ(io::read_field(d / s.at(key).get<std::string>()).size(), result_->u0.size());
        }
        EXPECT_EQ(io::read_field(d / s.at("file").get<std::string>()).values(), result_->snapshots[i].total.values());
    }
    io::read_json(d / m.at("bounds_report").get<std::string>());
    const json summary = io::read_json(d / m.at("summary").get<std::string>());
    EXPECT_EQ(summary.at("mean_v").get<double>(), result_->summary.mean_v);
}

TEST_F(TravelingWaveRun, BitForBitReproducible) {
    std::size_t compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(*dir_ / "a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), *dir_ / "a");
        ASSERT_TRUE(fs::exists(*dir_ / "b" / rel)) << rel;
        EXPECT_EQ(slurp(e.path()), slurp(*dir_ / "b" / rel)) << rel;
        ++compared;
    }
    EXPECT_GE(compared, 7u);
}

TEST_F(TravelingWaveRun, VerifyBoundsReproducesAudit) {
    const auto rep = cmd_verify_bounds(*dir_ / "a");
    ASSERT_EQ(rep.checks.size(), result_->bounds.checks.size());
    for (std::size_t i = 0; i < rep.checks.size(); ++i) {
        EXPECT_EQ(rep.checks[i].estimate_id, result_->bounds.checks[i].estimate_id);
        EXPECT_NEAR(rep.checks[i].measured_max, result_->bounds.checks[i].measured_max, 1e-12 * std::max(1.0, std::abs(rep.checks[i].measured_max)));
        EXPECT_EQ(rep.checks[i].pass, result_->bounds.checks[i].pass);
    }
    const auto other = cmd_verify_bounds(*dir_ / "a", 0.0);
    EXPECT_EQ(other.alpha, 0.0);
    EXPECT_THROW(cmd_verify_bounds(*dir_ / "a", 1.0), ParameterError);
}

TEST_F(TravelingWaveRun, SingleValueSweepMatchesSimulate) {
    const auto rows = sweep(to_json(*config_), "kinetics.A", {config_->kinetics.A});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].status, "ok");
    EXPECT_EQ(rows[0].summary.mean_v, result_->summary.mean_v);
    EXPECT_EQ(rows[0].summary.amplitude, result_->summary.amplitude);
}

TEST(Simulate, FiniteDifferenceMethod) {
    json j = quick_config(2.0);
    j["params"]["solver"] = {{"method", "fd"}};
    const auto r = simulate(config_from_json(j));
    EXPECT_LE(*r.tw_max_deviation, 1e-3);
    ASSERT_EQ(r.snapshots.size(), 4u);
    for (const auto& s : r.snapshots)
        for (std::size_t i = 0; i < s.total.size(); ++i) EXPECT_NEAR(s.t1[i] + s.t2[i], s.total[i], 1e-12);
    EXPECT_TRUE(r.bounds.all_pass());
}

TEST(Simulate, FailingStageIsNamed) {
    json j = quick_config(1.0);
    j["params"]["solver"] = {{"dt", 1e-2}};
    j["params"]["kinetics"] = {{"V0", 300.0}, {"A", 4.5}, {"u_inf", -0.05}};
    try {
        simulate(config_from_json(j));
        FAIL() << "expected a stage error";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "solve");
        EXPECT_NE(std::string(e.what()).find("solve: "), std::string::npos);
    }
}

TEST(Simulate, FileInitialData) {
    const auto d = scratch_dir("file");
    const auto g = SpatialGrid::uniform(40.0, 0.02);
    io::write_field(d / "u0.csv", GridField::sample(g, [](double x) { return std::exp(-x * x); }));
    json j = quick_config(0.1);
    j["initial_data"] = {{"type", "file"}, {"path", "u0.csv"}};
    const auto c = config_from_json(j, d);
    const auto k = c.kinetics.build();
    const auto u0 = make_initial_data(c, k, c.params().grid.make());
    EXPECT_NEAR(u0.at_zero(), 1.0, 1e-15);
    EXPECT_NEAR(u0.interpolate(1.0), std::exp(-1.0), 1e-12);
}

TEST(Sweep, AxisResolution) {
    const json t = baseline_config_json();
    EXPECT_EQ(axis_pointer(t, "kinetics.A").to_string(), "/params/kinetics/A");
    EXPECT_EQ(axis_pointer(t, "params.gamma").to_string(), "/params/gamma");
    EXPECT_EQ(axis_pointer(t, "T_final").to_string(), "/T_final");
    EXPECT_THROW(axis_pointer(t, "kinetics..A"), ConfigError);
    EXPECT_THROW(sweep(t, "kinetics.B", {1.0}), ConfigError);
}

TEST(Sweep, FailuresAreRecordedAndOrderKept) {
    json t = quick_config(1.0, "zero");
    apply_overrides(t, {1e-2, 0.05, 20.0});
    const auto d = scratch_dir("sweep");
    const auto rows = cmd_sweep(t, "kinetics.A", {1.0, -1.0, 2.0}, d);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].status, "ok");
    EXPECT_EQ(rows[1].status, "failed");
    EXPECT_FALSE(rows[1].message.empty());
    EXPECT_EQ(rows[2].status, "ok");
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rows[i].index, i);
    const auto csv = io::read_csv(d / "sweep.csv");
    ASSERT_EQ(csv.size(), 3u);
    EXPECT_EQ(csv[1][5], "failed");
    EXPECT_TRUE(fs::exists(d / "run_000" / "v.csv"));
    EXPECT_TRUE(fs::exists(d / "run_002" / "config.json"));
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
    json t = quick_config(1.0, "gaussian");
    apply_overrides(t, {1e-2, 0.05, 20.0});
    const std::vector<double> values{0.1, 0.2, 0.3};
    const auto serial = sweep(t, "params.gamma", values, {}, 1);
    const auto pooled = sweep(t, "params.gamma", values, {}, 3);
    for (std::size_t i = 0; i < values.size(); ++i) {
        EXPECT_EQ(serial[i].summary.mean_v, pooled[i].summary.mean_v);
        EXPECT_EQ(serial[i].summary.amplitude, pooled[i].summary.amplitude);
    }
}

TEST(Sweep, WorkerCapFromEnvironment) {
    ::setenv("STEFAN_FRONT_THREADS", "1", 1);
    EXPECT_EQ(worker_count(8), 1u);
    ::unsetenv("STEFAN_FRONT_THREADS");
    EXPECT_GE(worker_count(8), 1u);
    EXPECT_EQ(worker_count(1), 1u);
}

TEST(Oscillation, SyntheticSinusoid) {
    FrontHistory h;
    h.dt = 1e-3;
    for (int n = 0; n <= 40000; ++n) {
        const double t = n * h.dt;
        h.v.push_back(-3.0 + 0.5 * std::sin(2.0 * std::numbers::pi * t / 1.25));
        h.s.push_back(0.0);
        h.boundary_temp.push_back(0.0);
    }
    const auto s = summarize_velocity(h, 0.25);
    EXPECT_NEAR(s.mean_v, -3.0, 1e-3);
    EXPECT_NEAR(s.amplitude, 1.0, 1e-5);
    EXPECT_NEAR(s.period, 1.25, 1e-4);
}

TEST(Oscillation, SteadyHasNoPeriod) {
    FrontHistory h;
    h.dt = 0.1;
    h.v.assign(100, -1.0);
    h.s.assign(100, 0.0);
    h.boundary_temp.assign(100, 0.0);
    const auto s = summarize_velocity(h);
    EXPECT_EQ(s.amplitude, 0.0);
    EXPECT_TRUE(std::isnan(s.period));
}

TEST(Compare, ZeroDataSolversAgree) {
    json j = quick_config(2.0, "zero");
    const auto d = scratch_dir("cmp");
    const auto r = cmd_fd_compare(config_from_json(j), d);
    EXPECT_LE(r.max_abs_diff, 1e-2);
    EXPECT_EQ(r.rows.size(), 2001u);
    std::vector<std::string> header;
    const auto rows = io::read_csv(d / "fd_compare.csv", &header);
    EXPECT_EQ(header, (std::vector<std::string>{"t", "v_ie", "v_fd", "abs_diff"}));
    EXPECT_EQ(rows.size(), r.rows.size());
}

TEST(Dimension, TravelingWaveReport) {
    json j = quick_config(1.0);
    j["dimension"] = {{"horizon", 12.0}, {"transient", 2.0}};
    const auto c = config_from_json(j);
    const auto d = scratch_dir("dim");
    const auto reps = cmd_dimension(c, {1, 2}, d);
    ASSERT_EQ(reps.size(), 2u);
    EXPECT_LE(reps[0].exponents.at(0), 1e-2);
    for (const auto& r : reps) EXPECT_LE(r.dimension_estimate, r.M_dim_closed_form);
    EXPECT_TRUE(fs::exists(d / "spectrum_m1.json"));
    const json s2 = io::read_json(d / "spectrum_m2.json");
    for (const char* key : {"m", "exponents", "mean_trace", "M_dim_closed_form", "M_dim_optimized", "dimension_estimate"}) EXPECT_TRUE(s2.contains(key)) << key;
    EXPECT_EQ(io::read_csv(d / "dimension_summary.csv").size(), 2u);
    // same seed, same spectrum
    const auto again = dimension_reports(c, {2}, 1);
    EXPECT_EQ(again[0].exponents, reps[1].exponents);
}
