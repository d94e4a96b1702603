// Command-line driver: simulate, dimension, sweep, traveling-wave, verify-bounds, fd-compare.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stefan/stefan.hpp"

namespace {

using namespace stefan;

struct Common {
    std::string config;
    std::string out;
    std::optional<double> dt, dx, L;

    void attach(CLI::App* app, bool with_out = true) {
        app->add_option("--config", config, "run configuration (JSON); baseline when omitted")->check(CLI::ExistingFile);
        if (with_out) app->add_option("--out", out, "output directory (default: the config's outputs entry)");
        app->add_option("--dt", dt, "time step override")->check(CLI::PositiveNumber);
        app->add_option("--dx", dx, "grid spacing override")->check(CLI::PositiveNumber);
        app->add_option("--L", L, "grid half length override")->check(CLI::PositiveNumber);
    }

    json raw() const {
        json j = config.empty() ? baseline_config_json() : io::read_json(config);
        apply_overrides(j, {dt, dx, L});
        return j;
    }

    RunConfig load() const {
        const fs::path base = config.empty() ? fs::path{} : fs::path(config).parent_path();
        return config_from_json(raw(), base);
    }

    fs::path out_dir(const RunConfig& c) const { return out.empty() ? fs::path(c.outputs) : fs::path(out); }
};

void print_bounds(const BoundsReport& r) {
    std::printf("bounds audit (alpha = %.6g, slack = %.0f%%)\n", r.alpha, 100.0 * r.slack);
    for (const auto& c : r.checks)
        std::printf("  %-24s %s  measured %.6g  bound %.6g  margin %.3g\n", c.estimate_id.c_str(), c.pass ? "pass" : "FAIL", c.measured_max,
                    c.bound, c.margin);
}

std::vector<double> parse_values(const std::string& s) {
    std::vector<double> out;
    std::size_t a = 0;
    while (a < s.size()) {
        const std::size_t b = std::min(s.find(',', a), s.size());
        out.push_back(io::parse_num(s.substr(a, b - a), "--values"));
        a = b + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Front dynamics for the two-phase nonequilibrium Stefan problem"};
    app.require_subcommand(1);

    Common sim_opt, dim_opt, sweep_opt, tw_opt, cmp_opt;
    std::optional<std::string> method;

    auto* sim = app.add_subcommand("simulate", "run one trajectory, reconstruct snapshots and audit the estimates");
    sim_opt.attach(sim);
    sim->add_option("--method", method, "ie or fd")->check(CLI::IsMember({"ie", "fd"}));

    auto* dim = app.add_subcommand("dimension", "tangent spectra and dimension estimates");
    dim_opt.attach(dim);
    std::vector<std::size_t> m_list;
    dim->add_option("--m", m_list, "numbers of tangent vectors")->delimiter(',');

    auto* sw = app.add_subcommand("sweep", "parameter sweep with oscillation metrics");
    sweep_opt.attach(sw);
    std::string axis, values_s;
    std::optional<double> from, to;
    std::size_t count = 0;
    sw->add_option("--axis", axis, "dotted parameter path, e.g. kinetics.A or params.gamma")->required();
    sw->add_option("--values", values_s, "comma-separated values");
    sw->add_option("--from", from, "first value of an evenly spaced range");
    sw->add_option("--to", to, "last value of the range");
    sw->add_option("--count", count, "number of values in the range");

    auto* tw = app.add_subcommand("traveling-wave", "print V*, u* and the tail exponents");
    tw_opt.attach(tw, false);

    auto* vb = app.add_subcommand("verify-bounds", "re-audit a run directory");
    std::string run_dir;
    std::optional<double> alpha;
    vb->add_option("--run", run_dir, "run directory written by simulate")->required()->check(CLI::ExistingDirectory);
    vb->add_option("--alpha", alpha, "weight exponent");

    auto* cmp = app.add_subcommand("fd-compare", "run both solvers and write the velocity discrepancy");
    cmp_opt.attach(cmp);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            RunConfig c = sim_opt.load();
            if (method) c.method = *method;
            const fs::path dir = sim_opt.out_dir(c);
            const auto r = cmd_simulate(c, dir);
            std::printf("wrote %s (%zu steps, source %s)\n", dir.string().c_str(), r.history.size() - 1, c.method.c_str());
            std::printf("mean v %.10g  amplitude %.3g\n", r.summary.mean_v, r.summary.amplitude);
            if (r.tw_max_deviation) std::printf("max |v - V*| %.3e\n", *r.tw_max_deviation);
            print_bounds(r.bounds);
        } else if (*dim) {
            RunConfig c = dim_opt.load();
            const auto ms = m_list.empty() ? c.dimension.m_list : m_list;
            const auto reports = cmd_dimension(c, ms, dim_opt.out_dir(c));
            std::printf("%4s %12s %12s %12s %12s %12s\n", "m", "dim_est", "mean_trace", "vol_rate", "M_dim", "mu/gamma");
            for (const auto& r : reports)
                std::printf("%4zu %12.5g %12.5g %12.5g %12.5g %12.5g\n", r.m, r.dimension_estimate, r.mean_trace, r.volume_rate,
                            r.M_dim_closed_form, r.M_dim_optimized);
        } else if (*sw) {
            std::vector<double> values;
            if (!values_s.empty()) values = parse_values(values_s);
            else if (from && to && count >= 1) {
                for (std::size_t i = 0; i < count; ++i)
                    values.push_back(count == 1 ? *from : *from + (*to - *from) * static_cast<double>(i) / static_cast<double>(count - 1));
            } else {
                throw ConfigError("sweep needs --values or --from/--to/--count");
            }
            const json tmpl = sweep_opt.raw();
            const RunConfig c = config_from_json(tmpl);
            const fs::path dir = sweep_opt.out_dir(c);
            const auto rows = cmd_sweep(tmpl, axis, values, dir);
            std::printf("%5s %12s %14s %12s %10s %s\n", "index", "value", "mean_v", "amplitude", "period", "status");
            for (const auto& r : rows)
                std::printf("%5zu %12.6g %14.8g %12.4g %10.4g %s %s\n", r.index, r.value, r.summary.mean_v, r.summary.amplitude,
                            r.summary.period, r.status.c_str(), r.message.c_str());
        } else if (*tw) {
            const RunConfig c = tw_opt.load();
            const auto w = traveling_wave(c.kinetics.build(), c.gamma);
            std::printf("V*       %.15g\nu*       %.15g\nlambda+  %.15g\nlambda-  %.15g\n", w.V, w.u_front, w.lambda_plus, w.lambda_minus);
        } else if (*vb) {
            const auto r = cmd_verify_bounds(run_dir, alpha);
            io::write_json(fs::path(run_dir) / "bounds_reaudit.json", io::to_json(r));
            print_bounds(r);
            return r.all_pass() ? 0 : 4;
        } else if (*cmp) {
            const RunConfig c = cmp_opt.load();
            const fs::path dir = cmp_opt.out_dir(c);
            const auto r = cmd_fd_compare(c, dir);
            std::printf("wrote %s/fd_compare.csv  max |v_ie - v_fd| = %.3e\n", dir.string().c_str(), r.max_abs_diff);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const StageError& e) {
        std::fprintf(stderr, "failed at stage %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
