#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stefan/error.hpp"
#include "stefan/grid.hpp"
#include "stefan/kinetics.hpp"
#include "stefan/params.hpp"

namespace stefan {

/// Parameter-only constants of the a priori, absorbing-set and dimension estimates.
struct ConstantsTable {
    double alpha_space = 0.0;
    double alpha_time = 0.0;
    double alpha_min = 0.0;
    double alpha_min_prime = 0.0;
    double absorb_radius = 0.0;
    /// derivative bound at alpha_min_prime
    double deriv_bound = 0.0;
    double N_bound = 0.0;
    double nu0 = 0.0;
    double mu = 0.0;
    /// minimizing a in the mu formula
    double mu_argmin = 0.0;
    /// a = 1 form
    double M_dim = 0.0;
    /// mu / gamma
    double M_dim_optimized = 0.0;
    /// "time", "space" or "tie"
    std::string alpha_binding;
};

/// V0 max[8/(e v0), (1 + V0/v0) e^alpha / 2, 2/sqrt(gamma) + 6].
inline double derivative_bound(double v0, double V0, double alpha, double gamma) {
    return V0 * std::max({8.0 / (std::numbers::e * v0), 0.5 * (1.0 + V0 / v0) * std::exp(alpha), 2.0 / std::sqrt(gamma) + 6.0});
}

/// ((2 nu0 + a) / (4 nu0^2))^2 + N^2 / (2a)
inline double trace_excess(double a, double nu0, double N) {
    const double q = (2.0 * nu0 + a) / (4.0 * nu0 * nu0);
    return q * q + N * N / (2.0 * a);
}

/// Golden-section minimum of trace_excess over a > 0 (convex), searched in log a.
inline double minimize_trace_excess(double nu0, double N, double* argmin = nullptr) {
    auto f = [&](double la) { return trace_excess(std::exp(la), nu0, N); };
    // the minimizer solves (2 nu0 + a) a^2 = 4 nu0^4 N^2; bracket it generously
    const double guess = std::cbrt(4.0 * std::pow(nu0, 4) * N * N) + 1e-300;
    double lo = std::log(guess) - 20.0, hi = std::log(guess) + 20.0;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 300 && hi - lo > 1e-13; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    const double la = 0.5 * (lo + hi);
    if (argmin) *argmin = std::exp(la);
    return f(la);
}

inline ConstantsTable compute_constants(const KineticsModel& k, double gamma) {
    if (!(gamma > 0.0)) throw ParameterError("compute_constants: gamma must be positive");
    const double v0 = k.v0(), V0 = k.V0();
    ConstantsTable c;
    c.alpha_space = std::min(v0 / 4.0, gamma / (2.0 * V0));
    c.alpha_time = 0.5 * V0 * (std::sqrt(1.0 + 4.0 * gamma / (V0 * V0)) - 1.0);
    c.alpha_min = std::min(c.alpha_time, c.alpha_space);
    c.alpha_binding = c.alpha_time < c.alpha_space ? "time" : (c.alpha_space < c.alpha_time ? "space" : "tie");
    c.alpha_min_prime = std::min(v0 / 8.0, gamma / (2.0 * V0));
    c.absorb_radius = V0 / std::sqrt(gamma);
    c.deriv_bound = derivative_bound(v0, V0, c.alpha_min_prime, gamma);
    c.N_bound = c.deriv_bound / std::sqrt(c.alpha_min_prime);
    c.nu0 = k.nu0();
    c.mu = -gamma + minimize_trace_excess(c.nu0, c.N_bound, &c.mu_argmin);
    c.M_dim = trace_excess(1.0, c.nu0, c.N_bound) / gamma;
    c.M_dim_optimized = c.mu / gamma;
    return c;
}

inline ConstantsTable compute_constants(const ProblemParams& p) { return compute_constants(p.kinetics, p.gamma); }

/// One audited estimate.
struct BoundCheck {
    std::string estimate_id;
    /// the inequality being audited, as a formula
    std::string paper_eq;
    double bound = 0.0;
    double measured_max = 0.0;
    /// bound * (1 + slack) - measured
    double margin = 0.0;
    bool pass = false;
    /// worst snapshot time
    double t_worst = 0.0;
};

struct BoundsReport {
    double alpha = 0.0;
    double slack = 0.05;
    std::vector<BoundCheck> checks;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
    }
    const BoundCheck* find(const std::string& id) const {
        for (const auto& c : checks)
            if (c.estimate_id == id) return &c;
        return nullptr;
    }
};

/// Field split at one time: interface part, initial-data part and their sum.
struct SnapshotParts {
    double t = 0.0;
    GridField t1;
    GridField t2;
    GridField total;
};

/// Audits the sup-norm estimates on a set of snapshots.
///
/// Checks: interface part below V0/sqrt(gamma); initial-data part below
/// 2 e^{(-gamma + alpha^2 + alpha V0) t} |u0|_alpha and its log-slope; total
/// below the absorbing bound; derivative of the total below the C^1_alpha bound.
inline BoundsReport verify_apriori(const std::vector<SnapshotParts>& snaps, double u0_norm, const KineticsModel& k,
                                   double gamma, const ConstantsTable& table, double alpha, double slack = 0.05) {
    if (!(alpha >= 0.0) || !(alpha < table.alpha_min))
        throw ParameterError("verify_apriori: alpha must lie in [0, alpha_min) for the solution bounds");
    const bool derivative_ok = alpha < table.alpha_min_prime;
    const double V0 = k.V0();
    const double rate = -gamma + alpha * alpha + alpha * V0;
    BoundsReport rep;
    rep.alpha = alpha;
    rep.slack = slack;

    auto finish = [&](BoundCheck c) {
        c.margin = c.bound * (1.0 + slack) - c.measured_max;
        c.pass = c.margin >= 0.0;
        rep.checks.push_back(std::move(c));
    };

    BoundCheck t1{"interface-part", "|interface part|_alpha <= V0/sqrt(gamma)", table.absorb_radius, 0.0, 0.0, false, 0.0};
    BoundCheck absorb{"absorbing-ball", "|u|_alpha <= V0/sqrt(gamma) + 2 exp((-gamma+alpha^2+alpha V0) t) |u0|_alpha", 0.0, 0.0, 0.0, false, 0.0};
    BoundCheck deriv{"derivative", "|u_x|_alpha <= M + |u0|_alpha (2/sqrt(pi t) + alpha/2) exp((alpha V0+alpha^2-gamma) t)", 0.0, 0.0, 0.0, false, 0.0};
    BoundCheck t2{"initial-data-part", "|initial-data part|_alpha <= 2 exp((-gamma+alpha^2+alpha V0) t) |u0|_alpha", 0.0, 0.0, 0.0, false, 0.0};
    double absorb_ratio = -1.0, deriv_ratio = -1.0, t2_ratio = -1.0;
    const double M = derivative_bound(k.v0(), V0, alpha, gamma);

    std::vector<std::pair<double, double>> t2_log;
    for (const auto& s : snaps) {
        if (!(s.t > 0.0)) continue;
        const WeightSpec w{alpha};
        const double n1 = c_alpha_norm(s.t1, w);
        if (n1 > t1.measured_max) {
            t1.measured_max = n1;
            t1.t_worst = s.t;
        }
        const double decay = std::exp(rate * s.t) * u0_norm;
        const double n2 = c_alpha_norm(s.t2, w);
        if (n2 > 0.0) t2_log.emplace_back(s.t, std::log(n2));
        const double b2 = 2.0 * decay;
        if (t2_ratio < 0.0 || (b2 > 0.0 ? n2 / b2 : (n2 > 0.0 ? 1e300 : 0.0)) > t2_ratio) {
            t2_ratio = b2 > 0.0 ? n2 / b2 : (n2 > 0.0 ? 1e300 : 0.0);
            t2.bound = b2;
            t2.measured_max = n2;
            t2.t_worst = s.t;
        }
        const double nt = c_alpha_norm(s.total, w);
        const double bt = table.absorb_radius + 2.0 * decay;
        if (absorb_ratio < 0.0 || nt / bt > absorb_ratio) {
            absorb_ratio = nt / bt;
            absorb.bound = bt;
            absorb.measured_max = nt;
            absorb.t_worst = s.t;
        }
        if (derivative_ok) {
            const double nd = c_alpha_norm(derivative_field(s.total).derivative, w);
            const double bd = M + u0_norm * (2.0 / std::sqrt(std::numbers::pi * s.t) + alpha / 2.0) * std::exp(rate * s.t);
            if (deriv_ratio < 0.0 || nd / bd > deriv_ratio) {
                deriv_ratio = nd / bd;
                deriv.bound = bd;
                deriv.measured_max = nd;
                deriv.t_worst = s.t;
            }
        }
    }
    finish(t1);
    finish(t2);
    finish(absorb);
    if (derivative_ok) finish(deriv);

    // Decay rate of the initial-data part: least-squares slope of log of its weighted norm.
    BoundCheck slope{"initial-data-decay-rate", "d/dt log|initial-data part|_alpha <= -gamma + alpha^2 + alpha V0", rate, rate, 0.0, true, 0.0};
    if (t2_log.size() >= 2) {
        double st = 0, sy = 0, stt = 0, sty = 0;
        for (auto [t, y] : t2_log) {
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
        const double n = static_cast<double>(t2_log.size());
        const double den = n * stt - st * st;
        slope.measured_max = den > 0.0 ? (n * sty - st * sy) / den : rate;
    }
    slope.margin = rate + 1e-2 - slope.measured_max;
    slope.pass = slope.margin >= 0.0;
    rep.checks.push_back(slope);
    return rep;
}

}  // namespace stefan
