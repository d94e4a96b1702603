#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stefan/bounds.hpp"
#include "stefan/error.hpp"
#include "stefan/grid.hpp"
#include "stefan/interface_solver.hpp"
#include "stefan/tangent.hpp"

namespace stefan::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// Shortest round-trip decimal form.
inline std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot open " + p.string() + " for writing");
    return f;
}

inline std::string read_text(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw ConfigError("cannot open " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Comma-split rows, header skipped when the first cell is not numeric.
inline std::vector<std::vector<std::string>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
    std::ifstream f(p);
    if (!f) throw ConfigError("cannot open " + p.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (first) {
            first = false;
            char* end = nullptr;
            std::strtod(cells.empty() ? "" : cells[0].c_str(), &end);
            if (cells.empty() || end == cells[0].c_str()) {
                if (header) *header = cells;
                continue;
            }
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline double parse_num(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ConfigError(where + ": not a number: '" + s + "'");
    return x;
}

// ---- front history ----

inline void write_history(const fs::path& p, const FrontHistory& h, const std::string& source) {
    auto f = open_out(p);
    f << "t,v,s,u_boundary,source\n";
    for (std::size_t k = 0; k < h.size(); ++k)
        f << num(h.t(k)) << ',' << num(h.v[k]) << ',' << num(h.s[k]) << ',' << num(h.boundary_temp[k]) << ',' << source << '\n';
}

inline FrontHistory read_history(const fs::path& p) {
    FrontHistory h;
    const auto rows = read_csv(p);
    std::vector<double> t;
    for (const auto& r : rows) {
        if (r.size() < 4) throw ConfigError(p.string() + ": history row needs t,v,s,u_boundary");
        t.push_back(parse_num(r[0], p.string()));
        h.v.push_back(parse_num(r[1], p.string()));
        h.s.push_back(parse_num(r[2], p.string()));
        h.boundary_temp.push_back(parse_num(r[3], p.string()));
    }
    h.dt = t.size() >= 2 ? t[1] - t[0] : 0.0;
    return h;
}

// ---- field snapshots ----

/// Columns x_tilde,u,side; side is L or R on the two copies of x = 0 and empty elsewhere.
inline void write_field(const fs::path& p, const GridField& f, const std::string& source = {}) {
    auto out = open_out(p);
    const auto& g = f.grid();
    out << "x_tilde,u,side" << (source.empty() ? "" : ",source") << '\n';
    for (std::size_t i = 0; i < g.size(); ++i) {
        const char* side = i == g.zero_left() ? "L" : (i == g.zero_right() ? "R" : "");
        out << num(g.x(i)) << ',' << num(f[i]) << ',' << side;
        if (!source.empty()) out << ',' << source;
        out << '\n';
    }
}

/// Reads a snapshot file onto its own (possibly nonuniform) grid.
inline GridField read_field(const fs::path& p) {
    const auto rows = read_csv(p);
    std::vector<double> lx, lu, rx, ru;
    for (const auto& r : rows) {
        if (r.size() < 2) throw ConfigError(p.string() + ": snapshot row needs x_tilde,u");
        const double x = parse_num(r[0], p.string()), u = parse_num(r[1], p.string());
        const std::string side = r.size() > 2 ? r[2] : "";
        const bool left = x < 0.0 || side == "L" || (x == 0.0 && side.empty());
        const bool right = x > 0.0 || side == "R" || (x == 0.0 && side.empty());
        if (left) {
            lx.push_back(x);
            lu.push_back(u);
        }
        if (right) {
            rx.push_back(x);
            ru.push_back(u);
        }
    }
    if (lx.size() < 3 || rx.size() < 3 || lx.back() != 0.0 || rx.front() != 0.0)
        throw ConfigError(p.string() + ": snapshot must contain both sides of x_tilde = 0");
    auto grid = SpatialGrid::from_sides(lx, rx);
    std::vector<double> u(lu);
    u.insert(u.end(), ru.begin(), ru.end());
    return GridField::with_jump(grid, std::move(u));
}

// ---- reports ----

inline json to_json(const BoundCheck& c) {
    return {{"estimate_id", c.estimate_id}, {"paper_eq", c.paper_eq}, {"bound", c.bound}, {"measured_max", c.measured_max},
            {"margin", c.margin}, {"pass", c.pass}, {"t_worst", c.t_worst}};
}

inline json to_json(const BoundsReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    return {{"alpha", r.alpha}, {"slack", r.slack}, {"all_pass", r.all_pass()}, {"checks", checks}};
}

inline BoundsReport bounds_from_json(const json& j) {
    BoundsReport r;
    r.alpha = j.at("alpha").get<double>();
    r.slack = j.at("slack").get<double>();
    for (const auto& c : j.at("checks"))
        r.checks.push_back({c.at("estimate_id").get<std::string>(), c.at("paper_eq").get<std::string>(), c.at("bound").get<double>(),
                            c.at("measured_max").get<double>(), c.at("margin").get<double>(), c.at("pass").get<bool>(),
                            c.value("t_worst", 0.0)});
    return r;
}

inline json to_json(const ConstantsTable& c) {
    return {{"alpha_space", c.alpha_space}, {"alpha_time", c.alpha_time}, {"alpha_min", c.alpha_min},
            {"alpha_min_prime", c.alpha_min_prime}, {"alpha_binding", c.alpha_binding}, {"absorb_radius", c.absorb_radius},
            {"deriv_bound", c.deriv_bound}, {"N_bound", c.N_bound}, {"nu0", c.nu0}, {"mu", c.mu}, {"mu_argmin", c.mu_argmin},
            {"M_dim", c.M_dim}, {"M_dim_optimized", c.M_dim_optimized}};
}

inline json to_json(const SpectrumReport& r) {
    return {{"m", r.m},
            {"exponents", r.exponents},
            {"mean_trace", r.mean_trace},
            {"volume_rate", r.volume_rate},
            {"M_dim_closed_form", r.M_dim_closed_form},
            {"M_dim_optimized", r.M_dim_optimized},
            {"dimension_estimate", r.dimension_estimate},
            {"mu", r.mu},
            {"worst_front_free_excess", r.worst_front_free_excess},
            {"worst_sum_excess", r.worst_sum_excess},
            {"worst_front_entry", r.worst_front_entry},
            {"max_constraint_residual", r.max_constraint_residual},
            {"samples", r.samples},
            {"window", r.window}};
}

inline void write_json(const fs::path& p, const json& j) {
    auto f = open_out(p);
    f << j.dump(2) << '\n';
}

/// Parses a JSON file; syntax errors report the line and column.
inline json read_json(const fs::path& p) {
    const std::string text = read_text(p);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(p.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

}  // namespace stefan::io
