#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "stefan/bounds.hpp"
#include "stefan/error.hpp"
#include "stefan/field_reconstruction.hpp"
#include "stefan/grid.hpp"
#include "stefan/interface_solver.hpp"
#include "stefan/io.hpp"
#include "stefan/kinetics.hpp"
#include "stefan/params.hpp"
#include "stefan/reference_pde.hpp"
#include "stefan/tangent.hpp"

namespace stefan {

namespace fs = std::filesystem;
using nlohmann::json;

/// Failure of one orchestration stage; what() starts with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& msg) : Error(stage + ": " + msg), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct KineticsSpec {
    /// arrhenius or table
    std::string family = "arrhenius";
    double V0 = 0.0;
    double A = 0.0;
    double u_inf = 0.0;
    std::string table_path;
    double tail_scale = 1.0;

    KineticsModel build() const {
        if (family == "arrhenius") return KineticsModel::arrhenius(V0, A, u_inf);
        const auto rows = io::read_csv(table_path);
        std::vector<double> u, g;
        for (const auto& r : rows) {
            if (r.size() < 2) throw ConfigError(table_path + ": kinetics table needs two columns u,g");
            u.push_back(io::parse_num(r[0], table_path));
            g.push_back(io::parse_num(r[1], table_path));
        }
        return KineticsModel::table(std::move(u), std::move(g), tail_scale);
    }
};

struct InitialDataSpec {
    /// traveling_wave, gaussian, zero or file
    std::string type = "traveling_wave";
    double amplitude = 1.0;
    double width = 1.0;
    double center = 0.0;
    std::string path;
};

struct AuditSettings {
    /// negative: alpha_min / 2 when the grid resolves it, else 0
    double alpha = -1.0;
    double slack = 0.05;
};

struct DimensionSettings {
    std::vector<std::size_t> m_list{1};
    double horizon = 20.0;
    double transient = 5.0;
    int renorm_period = 10;
};

struct RunConfig {
    double gamma = 0.1;
    KineticsSpec kinetics;
    GridSpec grid;
    SolverSettings solver;
    /// ie or fd
    std::string method = "ie";
    InitialDataSpec initial_data;
    double T_final = 10.0;
    std::vector<double> snapshot_times;
    std::string outputs = "run";
    std::uint64_t seed = 1;
    AuditSettings bounds;
    DimensionSettings dimension;
    /// trailing fraction of the run used for oscillation metrics
    double oscillation_window = 0.25;

    ProblemParams params() const { return ProblemParams(gamma, kinetics.build(), grid, solver); }
};

namespace detail {

// Typed access to one JSON object with the dotted path kept for messages; unknown keys are rejected.
class Section {
public:
    Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + "must be an object");
        for (const auto& [k, v] : j_.items())
            if (!allowed.count(k)) throw ConfigError("unknown key " + key(k));
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    double num(const std::string& k, double def) const { return has(k) ? req_num(k) : def; }
    double req_num(const std::string& k) const {
        if (!has(k)) throw ConfigError("missing required key " + key(k));
        if (!j_.at(k).is_number()) throw ConfigError(key(k) + " must be a number");
        return j_.at(k).get<double>();
    }
    std::string str(const std::string& k, const std::string& def) const {
        if (!has(k)) return def;
        if (!j_.at(k).is_string()) throw ConfigError(key(k) + " must be a string");
        return j_.at(k).get<std::string>();
    }
    const json& sub(const std::string& k) const {
        if (!has(k)) throw ConfigError("missing required key " + key(k));
        return j_.at(k);
    }

private:
    std::string where() const { return path_.empty() ? "config " : path_ + " "; }
    const json& j_;
    std::string path_;
};

}  // namespace detail

/// Parses a run configuration; every error names the offending key.
inline RunConfig config_from_json(const json& j, const fs::path& base_dir = {}) {
    using detail::Section;
    RunConfig c;
    Section top(j, "", {"params", "initial_data", "T_final", "snapshot_times", "outputs", "seed", "bounds", "dimension", "oscillation_window"});
    Section params(top.sub("params"), "params", {"gamma", "kinetics", "grid", "solver"});
    c.gamma = params.num("gamma", c.gamma);

    const json& kj = params.sub("kinetics");
    Section kin(kj, "params.kinetics", {"family", "V0", "A", "u_inf", "path", "tail_scale"});
    c.kinetics.family = kin.str("family", "arrhenius");
    if (c.kinetics.family == "arrhenius") {
        c.kinetics.V0 = kin.req_num("V0");
        c.kinetics.A = kin.req_num("A");
        c.kinetics.u_inf = kin.req_num("u_inf");
    } else if (c.kinetics.family == "table") {
        if (!kin.has("path")) throw ConfigError("missing required key params.kinetics.path");
        fs::path p = kin.str("path", "");
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        if (!fs::exists(p)) throw ConfigError("params.kinetics.path: file " + p.string() + " does not exist");
        c.kinetics.table_path = p.string();
        c.kinetics.tail_scale = kin.num("tail_scale", 1.0);
    } else {
        throw ConfigError("params.kinetics.family must be arrhenius or table, got '" + c.kinetics.family + "'");
    }

    if (params.has("grid")) {
        Section g(params.sub("grid"), "params.grid", {"L", "dx"});
        c.grid.L = g.num("L", c.grid.L);
        c.grid.dx = g.num("dx", c.grid.dx);
    }
    if (params.has("solver")) {
        Section s(params.sub("solver"), "params.solver", {"dt", "picard_tol", "max_picard_iters", "tail_tolerance", "method"});
        c.solver.dt = s.num("dt", c.solver.dt);
        c.solver.picard_tol = s.num("picard_tol", c.solver.picard_tol);
        c.solver.max_picard_iters = static_cast<int>(s.num("max_picard_iters", c.solver.max_picard_iters));
        c.solver.tail_tolerance = s.num("tail_tolerance", c.solver.tail_tolerance);
        c.method = s.str("method", c.method);
        if (c.method != "ie" && c.method != "fd") throw ConfigError("params.solver.method must be ie or fd");
    }

    if (top.has("initial_data")) {
        Section id(top.sub("initial_data"), "initial_data", {"type", "amplitude", "width", "center", "path"});
        auto& d = c.initial_data;
        d.type = id.str("type", d.type);
        if (d.type == "gaussian") {
            d.amplitude = id.num("amplitude", d.amplitude);
            d.width = id.num("width", d.width);
            d.center = id.num("center", d.center);
            if (!(d.amplitude >= 0.0)) throw ConfigError("initial_data.amplitude must be >= 0");
            if (!(d.width > 0.0)) throw ConfigError("initial_data.width must be > 0");
        } else if (d.type == "file") {
            if (!id.has("path")) throw ConfigError("missing required key initial_data.path");
            fs::path p = id.str("path", "");
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            if (!fs::exists(p)) throw ConfigError("initial_data.path: file " + p.string() + " does not exist");
            d.path = p.string();
        } else if (d.type != "traveling_wave" && d.type != "zero") {
            throw ConfigError("initial_data.type must be traveling_wave, gaussian, zero or file");
        }
    }

    c.T_final = top.num("T_final", c.T_final);
    if (!(c.T_final > 0.0)) throw ConfigError("T_final must be positive");
    if (top.has("snapshot_times")) {
        const json& st = top.sub("snapshot_times");
        if (!st.is_array()) throw ConfigError("snapshot_times must be an array");
        for (const auto& x : st) {
            if (!x.is_number()) throw ConfigError("snapshot_times entries must be numbers");
            c.snapshot_times.push_back(x.get<double>());
        }
    } else {
        for (int q = 1; q <= 4; ++q) c.snapshot_times.push_back(c.T_final * q / 4.0);
    }
    for (double t : c.snapshot_times) {
        if (t < 0.0 || t > c.T_final * (1.0 + 1e-12)) throw ConfigError("snapshot_times: " + std::to_string(t) + " outside [0, T_final]");
        const double r = t / c.solver.dt;
        if (std::abs(r - std::round(r)) > 1e-6) throw ConfigError("snapshot_times: " + std::to_string(t) + " is not a multiple of dt");
    }
    c.outputs = top.str("outputs", c.outputs);
    if (top.has("seed")) {
        const json& s = top.sub("seed");
        if (!s.is_number_integer() && !s.is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (top.has("bounds")) {
        Section b(top.sub("bounds"), "bounds", {"alpha", "slack"});
        c.bounds.alpha = b.num("alpha", c.bounds.alpha);
        c.bounds.slack = b.num("slack", c.bounds.slack);
    }
    if (top.has("dimension")) {
        Section d(top.sub("dimension"), "dimension", {"m_list", "horizon", "transient", "renorm_period"});
        if (d.has("m_list")) {
            c.dimension.m_list.clear();
            for (const auto& m : d.sub("m_list")) {
                if (!m.is_number_integer() || m.get<long>() < 1) throw ConfigError("dimension.m_list entries must be positive integers");
                c.dimension.m_list.push_back(m.get<std::size_t>());
            }
        }
        c.dimension.horizon = d.num("horizon", c.dimension.horizon);
        c.dimension.transient = d.num("transient", c.dimension.transient);
        c.dimension.renorm_period = static_cast<int>(d.num("renorm_period", c.dimension.renorm_period));
    }
    c.oscillation_window = top.num("oscillation_window", c.oscillation_window);
    if (!(c.oscillation_window > 0.0 && c.oscillation_window <= 1.0)) throw ConfigError("oscillation_window must lie in (0, 1]");

    try {
        c.params();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    return c;
}

/// Full configuration with every default spelled out.
inline json to_json(const RunConfig& c) {
    json kin{{"family", c.kinetics.family}};
    if (c.kinetics.family == "arrhenius") {
        kin["V0"] = c.kinetics.V0;
        kin["A"] = c.kinetics.A;
        kin["u_inf"] = c.kinetics.u_inf;
    } else {
        kin["path"] = c.kinetics.table_path;
        kin["tail_scale"] = c.kinetics.tail_scale;
    }
    json id{{"type", c.initial_data.type}};
    if (c.initial_data.type == "gaussian") {
        id["amplitude"] = c.initial_data.amplitude;
        id["width"] = c.initial_data.width;
        id["center"] = c.initial_data.center;
    } else if (c.initial_data.type == "file") {
        id["path"] = c.initial_data.path;
    }
    return {{"params",
             {{"gamma", c.gamma},
              {"kinetics", kin},
              {"grid", {{"L", c.grid.L}, {"dx", c.grid.dx}}},
              {"solver",
               {{"dt", c.solver.dt},
                {"picard_tol", c.solver.picard_tol},
                {"max_picard_iters", c.solver.max_picard_iters},
                {"tail_tolerance", c.solver.tail_tolerance},
                {"method", c.method}}}}},
            {"initial_data", id},
            {"T_final", c.T_final},
            {"snapshot_times", c.snapshot_times},
            {"outputs", c.outputs},
            {"seed", c.seed},
            {"bounds", {{"alpha", c.bounds.alpha}, {"slack", c.bounds.slack}}},
            {"dimension",
             {{"m_list", c.dimension.m_list},
              {"horizon", c.dimension.horizon},
              {"transient", c.dimension.transient},
              {"renorm_period", c.dimension.renorm_period}}},
            {"oscillation_window", c.oscillation_window}};
}

inline RunConfig load_config(const fs::path& p) { return config_from_json(io::read_json(p), p.parent_path()); }

/// Command-line overrides of the discretization, applied before parsing.
struct Overrides {
    std::optional<double> dt, dx, L;
};

inline void apply_overrides(json& j, const Overrides& o) {
    if (o.dt) j["params"]["solver"]["dt"] = *o.dt;
    if (o.dx) j["params"]["grid"]["dx"] = *o.dx;
    if (o.L) j["params"]["grid"]["L"] = *o.L;
}

/// Baseline configuration: gamma = 0.1, Arrhenius V0 = 2, A = 1, u_inf = -1, traveling-wave data.
inline json baseline_config_json() {
    return {{"params", {{"gamma", 0.1}, {"kinetics", {{"family", "arrhenius"}, {"V0", 2.0}, {"A", 1.0}, {"u_inf", -1.0}}}}},
            {"initial_data", {{"type", "traveling_wave"}}},
            {"T_final", 10.0}};
}

inline GridField make_initial_data(const RunConfig& c, const KineticsModel& k, const GridPtr& grid) {
    const auto& d = c.initial_data;
    if (d.type == "zero") return GridField::zeros(grid);
    if (d.type == "traveling_wave") return traveling_wave(k, c.gamma, grid).profile;
    if (d.type == "gaussian") {
        return GridField::sample(grid, [&](double x) {
            const double z = (x - d.center) / d.width;
            return d.amplitude * std::exp(-z * z);
        });
    }
    const GridField f = io::read_field(d.path);
    const auto& fg = f.grid();
    if (fg.x().front() > grid->x().front() + 1e-12 || fg.x().back() < grid->x().back() - 1e-12)
        throw ConfigError("initial_data.path: file covers [" + std::to_string(fg.x().front()) + ", " + std::to_string(fg.x().back()) +
                          "], grid needs [" + std::to_string(grid->x().front()) + ", " + std::to_string(grid->x().back()) + "]");
    std::vector<double> u(grid->size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = grid->x(i);
        u[i] = x == 0.0 ? f.at_zero() : f.interpolate(x);
    }
    return GridField(grid, std::move(u));
}

/// Oscillation metrics of v over the trailing window of a run.
struct OscillationSummary {
    double mean_v = 0.0;
    /// max - min of v
    double amplitude = 0.0;
    /// mean spacing of upward crossings of the mean; NaN with fewer than two
    double period = std::nan("");
};

inline OscillationSummary summarize_velocity(const FrontHistory& h, double window = 0.25) {
    OscillationSummary s;
    const std::size_t n = h.size();
    if (n == 0) return s;
    const std::size_t start = std::min(n - 1, static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) * (1.0 - window))));
    double lo = h.v[start], hi = h.v[start], sum = 0.0;
    for (std::size_t k = start; k < n; ++k) {
        lo = std::min(lo, h.v[k]);
        hi = std::max(hi, h.v[k]);
        sum += h.v[k];
    }
    s.mean_v = sum / static_cast<double>(n - start);
    s.amplitude = hi - lo;
    // tiny amplitudes are rounding noise; crossings of it carry no period
    if (s.amplitude <= 1e-9 * std::max(1.0, std::abs(s.mean_v))) return s;
    std::vector<double> up;
    for (std::size_t k = start + 1; k < n; ++k) {
        const double a = h.v[k - 1] - s.mean_v, b = h.v[k] - s.mean_v;
        if (a < 0.0 && b >= 0.0) up.push_back(h.t(k - 1) + h.dt * (-a / (b - a)));
    }
    if (up.size() >= 2) s.period = (up.back() - up.front()) / static_cast<double>(up.size() - 1);
    return s;
}

inline json to_json(const OscillationSummary& s) {
    return {{"mean_v", s.mean_v}, {"amplitude", s.amplitude}, {"period", std::isnan(s.period) ? json(nullptr) : json(s.period)}};
}

/// Worker count: STEFAN_FRONT_THREADS if set, else the hardware concurrency.
inline unsigned worker_count(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("STEFAN_FRONT_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, jobs)));
}

/// Runs body(i) for i in [0, n) on a small pool; each index runs exactly once.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
        });
    for (auto& t : pool) t.join();
}

// ---- simulate ----

struct SnapshotRecord {
    double t = 0.0;
    std::string file;
    std::string t1_file;
    std::string t2_file;
};

struct SimulationResult {
    FrontHistory history;
    GridField u0;
    std::vector<SnapshotParts> snapshots;
    ConstantsTable constants;
    BoundsReport bounds;
    OscillationSummary summary;
    /// max |v - V*| over the run when starting from the traveling wave
    std::optional<double> tw_max_deviation;
};

namespace detail {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

inline std::string snapshot_name(const char* prefix, std::size_t i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snapshots/%s_%03zu.csv", prefix, i);
    return buf;
}

}  // namespace detail

/// Weight exponent used by the audit: configured, else alpha_min / 2 when the grid resolves it, else 0.
inline double audit_alpha(const RunConfig& c, const ConstantsTable& table, const SpatialGrid& grid) {
    if (c.bounds.alpha >= 0.0) return c.bounds.alpha;
    const double a = table.alpha_min / 2.0;
    return grid.L() * a >= 10.0 ? a : 0.0;
}

inline BoundsReport audit_snapshots(const RunConfig& c, const KineticsModel& k, const ConstantsTable& table, const GridField& u0,
                                    const std::vector<SnapshotParts>& snaps) {
    const double alpha = audit_alpha(c, table, u0.grid());
    const double n0 = c_alpha_norm(u0, {alpha});
    return verify_apriori(snaps, n0, k, c.gamma, table, alpha, c.bounds.slack);
}

/// Solves the configured run, reconstructs snapshots and audits the estimates; writes nothing.
inline SimulationResult simulate(const RunConfig& c) {
    SimulationResult r;
    const ProblemParams p = detail::stage("config", [&] { return c.params(); });
    const GridPtr grid = detail::stage("grid", [&] { return p.grid.make(); });
    r.u0 = detail::stage("initial-data", [&] { return make_initial_data(c, p.kinetics, grid); });

    if (c.method == "ie") {
        r.history = detail::stage("solve", [&] { return run_front(p, r.u0, c.T_final); });
        detail::stage("reconstruct", [&] {
            for (double t : c.snapshot_times) r.snapshots.push_back(reconstruct_parts(r.u0, r.history, t, c.gamma, grid));
            return 0;
        });
    } else {
        FDRun run = detail::stage("solve", [&] { return fd_run(p, r.u0, c.T_final, c.snapshot_times); });
        r.history = std::move(run.history);
        detail::stage("reconstruct", [&] {
            // the finite-difference field is split by subtracting the exact initial-data part
            for (auto& [t, field] : run.snapshots) {
                SnapshotParts sp;
                sp.t = t;
                sp.total = field;
                if (t == 0.0) {
                    sp.t2 = field;
                    sp.t1 = GridField::zeros(grid);
                } else {
                    sp.t2 = t2_apply(r.u0, t, c.gamma, r.history.s[r.history.index_of(t)], grid);
                    sp.t1 = field.plus(sp.t2, -1.0);
                }
                r.snapshots.push_back(std::move(sp));
            }
            return 0;
        });
    }
    r.summary = summarize_velocity(r.history, c.oscillation_window);
    if (c.initial_data.type == "traveling_wave") {
        const double V = traveling_wave(p.kinetics, c.gamma).V;
        double m = 0.0;
        for (double v : r.history.v) m = std::max(m, std::abs(v - V));
        r.tw_max_deviation = m;
    }
    detail::stage("bounds", [&] {
        r.constants = compute_constants(p);
        r.bounds = audit_snapshots(c, p.kinetics, r.constants, r.u0, r.snapshots);
        return 0;
    });
    return r;
}

/// Writes config.json, v.csv, u0.csv, snapshots, bounds_report.json, summary.json and manifest.json.
inline json write_run(const fs::path& dir, const RunConfig& c, const SimulationResult& r) {
    return detail::stage("write", [&] {
        fs::create_directories(dir / "snapshots");
        const std::string src = c.method;
        io::write_json(dir / "config.json", to_json(c));
        io::write_history(dir / "v.csv", r.history, src);
        io::write_field(dir / "u0.csv", r.u0);
        json snaps = json::array();
        for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
            const auto& s = r.snapshots[i];
            SnapshotRecord rec{s.t, detail::snapshot_name("u", i), detail::snapshot_name("t1", i), detail::snapshot_name("t2", i)};
            io::write_field(dir / rec.file, s.total, src);
            io::write_field(dir / rec.t1_file, s.t1, src);
            io::write_field(dir / rec.t2_file, s.t2, src);
            snaps.push_back({{"t", rec.t}, {"file", rec.file}, {"t1_file", rec.t1_file}, {"t2_file", rec.t2_file}});
        }
        json rep = io::to_json(r.bounds);
        rep["weight_resolved"] = r.bounds.alpha == 0.0 || r.u0.grid().L() * r.bounds.alpha >= 10.0;
        rep["constants"] = io::to_json(r.constants);
        io::write_json(dir / "bounds_report.json", rep);
        json summary = to_json(r.summary);
        summary["T_final"] = r.history.t_end();
        summary["steps"] = r.history.size() - 1;
        if (r.tw_max_deviation) summary["tw_max_deviation"] = *r.tw_max_deviation;
        io::write_json(dir / "summary.json", summary);
        json manifest{{"config", "config.json"},     {"history", "v.csv"},         {"initial_data", "u0.csv"},
                      {"snapshots", snaps},          {"bounds_report", "bounds_report.json"},
                      {"summary", "summary.json"},   {"source", src}};
        io::write_json(dir / "manifest.json", manifest);
        return manifest;
    });
}

inline SimulationResult cmd_simulate(const RunConfig& c, const fs::path& dir) {
    SimulationResult r = simulate(c);
    write_run(dir, c, r);
    return r;
}

/// Re-audits a run directory from its recorded config, initial data and snapshot parts.
inline BoundsReport cmd_verify_bounds(const fs::path& dir, std::optional<double> alpha = std::nullopt) {
    const json manifest = io::read_json(dir / "manifest.json");
    RunConfig c = load_config(dir / manifest.at("config").get<std::string>());
    if (alpha) c.bounds.alpha = *alpha;
    const KineticsModel k = c.kinetics.build();
    const GridField u0 = io::read_field(dir / manifest.at("initial_data").get<std::string>());
    std::vector<SnapshotParts> snaps;
    for (const auto& s : manifest.at("snapshots")) {
        SnapshotParts sp;
        sp.t = s.at("t").get<double>();
        sp.total = io::read_field(dir / s.at("file").get<std::string>());
        sp.t1 = io::read_field(dir / s.at("t1_file").get<std::string>());
        sp.t2 = io::read_field(dir / s.at("t2_file").get<std::string>());
        snaps.push_back(std::move(sp));
    }
    const ConstantsTable table = compute_constants(k, c.gamma);
    return audit_snapshots(c, k, table, u0, snaps);
}

// ---- velocity-only runs ----

inline FrontHistory solve_velocity(const RunConfig& c) {
    const ProblemParams p = c.params();
    const GridPtr grid = p.grid.make();
    const GridField u0 = make_initial_data(c, p.kinetics, grid);
    if (c.method == "ie") return run_front(p, u0, c.T_final);
    return fd_run(p, u0, c.T_final).history;
}

struct CompareRow {
    double t, v_ie, v_fd, abs_diff;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    double max_abs_diff = 0.0;
};

/// Both solvers on the same configuration; rows at every common time step.
inline CompareResult fd_compare(RunConfig c) {
    c.method = "ie";
    const FrontHistory ie = detail::stage("solve-ie", [&] { return solve_velocity(c); });
    c.method = "fd";
    const FrontHistory fd = detail::stage("solve-fd", [&] { return solve_velocity(c); });
    CompareResult r;
    const std::size_t n = std::min(ie.size(), fd.size());
    for (std::size_t k = 0; k < n; ++k) {
        const double d = std::abs(ie.v[k] - fd.v[k]);
        r.rows.push_back({ie.t(k), ie.v[k], fd.v[k], d});
        r.max_abs_diff = std::max(r.max_abs_diff, d);
    }
    return r;
}

inline CompareResult cmd_fd_compare(const RunConfig& c, const fs::path& dir) {
    CompareResult r = fd_compare(c);
    detail::stage("write", [&] {
        auto f = io::open_out(dir / "fd_compare.csv");
        f << "t,v_ie,v_fd,abs_diff\n";
        for (const auto& row : r.rows) f << io::num(row.t) << ',' << io::num(row.v_ie) << ',' << io::num(row.v_fd) << ',' << io::num(row.abs_diff) << '\n';
        io::write_json(dir / "config.json", to_json(c));
        return 0;
    });
    return r;
}

// ---- sweep ----

struct SweepRow {
    std::size_t index = 0;
    double value = 0.0;
    OscillationSummary summary;
    /// ok or failed
    std::string status = "ok";
    std::string message;
};

/// Resolves a dotted axis such as kinetics.A or params.gamma to a JSON pointer.
inline json::json_pointer axis_pointer(const json& tmpl, const std::string& axis) {
    std::string path = axis;
    const std::string head = path.substr(0, path.find('.'));
    if (!tmpl.contains(head) && tmpl.contains("params") && head != "params") path = "params." + path;
    std::string ptr;
    std::size_t a = 0;
    while (a <= path.size()) {
        const std::size_t b = std::min(path.find('.', a), path.size());
        const std::string part = path.substr(a, b - a);
        if (part.empty()) throw ConfigError("sweep axis '" + axis + "' is malformed");
        ptr += "/" + part;
        a = b + 1;
    }
    return json::json_pointer(ptr);
}

/// One velocity-only run per value, parallel over values, rows ordered by index.
/// Failed runs are recorded and the sweep continues.
inline std::vector<SweepRow> sweep(const json& tmpl, const std::string& axis, const std::vector<double>& values, const fs::path& dir = {},
                                   unsigned threads = 0) {
    const auto ptr = axis_pointer(tmpl, axis);
    {
        // rejects axes the config does not accept
        json probe = tmpl;
        probe[ptr] = values.empty() ? 0.0 : values.front();
        config_from_json(probe);
    }
    std::vector<SweepRow> rows(values.size());
    if (threads == 0) threads = worker_count(values.size());
    parallel_for(values.size(), threads, [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.index = i;
        row.value = values[i];
        try {
            json j = tmpl;
            j[ptr] = values[i];
            const RunConfig c = config_from_json(j);
            const FrontHistory h = solve_velocity(c);
            row.summary = summarize_velocity(h, c.oscillation_window);
            if (!dir.empty()) {
                char name[32];
                std::snprintf(name, sizeof name, "run_%03zu", i);
                io::write_history(dir / name / "v.csv", h, c.method);
                io::write_json(dir / name / "config.json", to_json(c));
            }
        } catch (const std::exception& e) {
            row.status = "failed";
            row.message = e.what();
        }
    });
    return rows;
}

inline void write_sweep_csv(const fs::path& p, const std::vector<SweepRow>& rows) {
    auto f = io::open_out(p);
    f << "index,value,mean_v,amplitude,period,status,message\n";
    for (const auto& r : rows) {
        std::string msg = r.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        f << r.index << ',' << io::num(r.value) << ',' << io::num(r.summary.mean_v) << ',' << io::num(r.summary.amplitude) << ','
          << io::num(r.summary.period) << ',' << r.status << ',' << msg << '\n';
    }
}

inline std::vector<SweepRow> cmd_sweep(const json& tmpl, const std::string& axis, const std::vector<double>& values, const fs::path& dir) {
    auto rows = sweep(tmpl, axis, values, dir);
    write_sweep_csv(dir / "sweep.csv", rows);
    return rows;
}

// ---- dimension ----

/// Tangent spectra along the configured trajectory (finite-difference flow), one report per m.
inline std::vector<SpectrumReport> dimension_reports(const RunConfig& c, const std::vector<std::size_t>& m_list, unsigned threads = 0) {
    const ProblemParams p = detail::stage("config", [&] { return c.params(); });
    const GridPtr grid = p.grid.make();
    const GridField u0 = detail::stage("initial-data", [&] { return make_initial_data(c, p.kinetics, grid); });
    const ConstantsTable table = compute_constants(p);
    const FDSolver solver(p.kinetics, p.gamma, grid, p.solver.dt);
    const FDState st0 = solver.initial_state(u0);
    std::vector<SpectrumReport> out(m_list.size());
    if (threads == 0) threads = worker_count(m_list.size());
    std::vector<std::string> errors(m_list.size());
    parallel_for(m_list.size(), threads, [&](std::size_t i) {
        try {
            VolumeGrowthOptions opt;
            opt.m = m_list[i];
            opt.horizon = c.dimension.horizon;
            opt.transient = c.dimension.transient;
            opt.renorm_period = c.dimension.renorm_period;
            opt.seed = c.seed;
            out[i] = volume_growth(solver, st0, opt, &table);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty()) throw StageError("tangent", "m = " + std::to_string(m_list[i]) + ": " + errors[i]);
    return out;
}

inline std::vector<SpectrumReport> cmd_dimension(const RunConfig& c, const std::vector<std::size_t>& m_list, const fs::path& dir) {
    auto reports = dimension_reports(c, m_list);
    detail::stage("write", [&] {
        io::write_json(dir / "config.json", to_json(c));
        auto f = io::open_out(dir / "dimension_summary.csv");
        f << "m,dimension_estimate,M_dim,M_dim_optimized,mean_trace,volume_rate,leading_exponent\n";
        for (const auto& r : reports) {
            io::write_json(dir / ("spectrum_m" + std::to_string(r.m) + ".json"), io::to_json(r));
            const double lead = *std::max_element(r.exponents.begin(), r.exponents.end());
            f << r.m << ',' << io::num(r.dimension_estimate) << ',' << io::num(r.M_dim_closed_form) << ',' << io::num(r.M_dim_optimized)
              << ',' << io::num(r.mean_trace) << ',' << io::num(r.volume_rate) << ',' << io::num(lead) << '\n';
        }
        return 0;
    });
    return reports;
}

}  // namespace stefan
