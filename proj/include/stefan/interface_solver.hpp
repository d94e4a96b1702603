#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stefan/error.hpp"
#include "stefan/grid.hpp"
#include "stefan/heat_kernel.hpp"
#include "stefan/kinetics.hpp"
#include "stefan/params.hpp"
#include "stefan/quadrature.hpp"

namespace stefan {

/// Front velocity, position and temperature on a uniform time grid t_k = k dt.
struct FrontHistory {
    double dt = 0.0;
    std::vector<double> v;
    std::vector<double> s;
    std::vector<double> boundary_temp;

    std::size_t size() const noexcept { return v.size(); }
    double t(std::size_t k) const noexcept { return dt * static_cast<double>(k); }
    double t_end() const noexcept { return v.empty() ? 0.0 : t(v.size() - 1); }
    bool covers(double time) const noexcept { return !v.empty() && time <= t_end() * (1.0 + 1e-12) + 1e-14; }

    /// Index of the sample at time t; t must be on the grid.
    std::size_t index_of(double time) const {
        const double r = time / dt;
        const long k = std::lround(r);
        if (k < 0 || std::abs(r - static_cast<double>(k)) > 1e-6 || static_cast<std::size_t>(k) >= v.size())
            throw TimeError("history has no sample at t = " + std::to_string(time));
        return static_cast<std::size_t>(k);
    }

    /// Piecewise-linear velocity and position at arbitrary t inside the history.
    double v_at(double time) const { return lerp(v, time); }
    double s_at(double time) const { return lerp(s, time); }

private:
    double lerp(const std::vector<double>& y, double time) const {
        if (!covers(time) || time < 0.0) throw TimeError("history does not cover t = " + std::to_string(time));
        const double r = time / dt;
        std::size_t k = static_cast<std::size_t>(std::floor(r));
        if (k + 1 >= y.size()) return y.back();
        const double th = r - static_cast<double>(k);
        return (1.0 - th) * y[k] + th * y[k + 1];
    }
};

struct TravelingWave {
    double V = 0.0;
    double u_front = 0.0;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    GridField profile;

    double value(double x) const { return u_front * std::exp((x < 0.0 ? lambda_plus : lambda_minus) * x); }
};

/// Steady front: V solves g(|V| / sqrt(V^2 + 4 gamma)) = V, found by bisection on |V| in [v0, V0].
inline TravelingWave traveling_wave(const KineticsModel& k, double gamma, GridPtr grid = nullptr) {
    if (!(gamma > 0.0)) throw ParameterError("traveling_wave: gamma must be positive");
    auto front_temp = [gamma](double speed) { return speed / std::sqrt(speed * speed + 4.0 * gamma); };
    // Root of f(c) = -g(u(c)) - c with c = |V|; f(v0) >= 0 since -g >= v0.
    auto f = [&](double c) { return -k.g(front_temp(c)) - c; };
    double lo = k.v0(), hi = k.V0();
    double flo = f(lo), fhi = f(hi);
    if (flo < 0.0 || fhi > 0.0)
        throw ParameterError("traveling_wave: no sign change of the speed equation on [v0, V0]");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm > 0.0) lo = mid;
        else hi = mid;
    }
    TravelingWave w;
    const double c = 0.5 * (lo + hi);
    w.V = -c;
    const double root = std::sqrt(c * c + 4.0 * gamma);
    w.u_front = c / root;
    w.lambda_plus = (c + root) / 2.0;
    w.lambda_minus = (c - root) / 2.0;
    if (grid) {
        const TravelingWave& ref = w;
        w.profile = GridField::sample(grid, [&ref](double x) { return ref.value(x); });
    }
    return w;
}

/// g(u0(0)) against the slope jump of u0 at 0; the condition for a differentiable velocity at t = 0.
struct MatchingReport {
    double kinetic_velocity = 0.0;
    double slope_jump = 0.0;
    bool holds = false;
};

inline MatchingReport matching_condition(const KineticsModel& k, const GridField& u0, double tol = 1e-2) {
    MatchingReport r;
    r.kinetic_velocity = k.g(std::max(0.0, u0.at_zero()));
    r.slope_jump = derivative_field(u0).jump_at_zero;
    r.holds = std::abs(r.kinetic_velocity - r.slope_jump) <= tol;
    return r;
}

/// Marches the front velocity by solving the Volterra equation
///   v_n = g(e^{-gamma t} (G * u0)(s_n) - int_0^t G(s_n, t, s(tau), tau) e^{-gamma (t - tau)} v dtau)
/// one step at a time with Picard iteration.
class InterfaceSolver {
public:
    InterfaceSolver(const KineticsModel& kinetics, double gamma, GridField u0, SolverSettings cfg)
        : k_(kinetics), gamma_(gamma), u0_(std::move(u0)), cfg_(cfg) {
        if (!(gamma > 0.0)) throw ParameterError("interface solver: gamma must be positive");
        if (!(cfg_.dt > 0.0)) throw ParameterError("interface solver: dt must be positive");
        const double contraction = std::sqrt(cfg_.dt / std::numbers::pi) * k_.lip_g();
        if (!(contraction < 1.0))
            throw ParameterError("interface solver: dt too large for the Picard contraction (sqrt(dt/pi) lip_g = " +
                                 std::to_string(contraction) + ")");
        for (double y : u0_.values())
            if (y < 0.0) throw DomainError("interface solver: initial temperature must be nonnegative");
        h_.dt = cfg_.dt;
        const double u00 = u0_.at_zero();
        h_.v.push_back(k_.g(u00));
        h_.s.push_back(0.0);
        h_.boundary_temp.push_back(u00);
        build_final_panel();
    }

    InterfaceSolver(const ProblemParams& p, GridField u0) : InterfaceSolver(p.kinetics, p.gamma, std::move(u0), p.solver) {}

    const FrontHistory& history() const noexcept { return h_; }
    const GridField& initial_data() const noexcept { return u0_; }
    double gamma() const noexcept { return gamma_; }
    const KineticsModel& kinetics() const noexcept { return k_; }
    const SolverSettings& settings() const noexcept { return cfg_; }
    int last_picard_iterations() const noexcept { return last_iters_; }

    /// Appends one sample.
    void step() {
        const std::size_t n = h_.size();  // index of the new sample
        const double t = h_.t(n), dt = cfg_.dt;
        ensure_panels(n);

        const double v_prev = h_.v[n - 1], s_prev = h_.s[n - 1];
        double v = n >= 2 ? 2.0 * v_prev - h_.v[n - 2] : v_prev;
        v = std::clamp(v, -k_.V0(), -k_.v0());
        const double s_ref = s_prev + 0.5 * dt * (v_prev + v);

        // History (all panels but the last) and initial data, Taylor-expanded around s_ref.
        double H0 = 0.0, H1 = 0.0, H2 = 0.0;
        history_sum(n, s_ref, H0, H1, H2);
        const Convolution c = gaussian_convolution(u0_, s_ref, t);
        const double decay = std::exp(-gamma_ * t);
        if (decay * c.tail_bound > cfg_.tail_tolerance)
            throw NumericalError("initial data truncated too close to the front: tail bound " +
                                 std::to_string(decay * c.tail_bound) + " at t = " + std::to_string(t));
        const double I0 = decay * c.value, I1 = decay * c.d1, I2 = decay * c.d2;

        double theta_u = 0.0, residual = 0.0;
        for (int it = 1; it <= cfg_.max_picard_iters; ++it) {
            const double s_n = s_prev + 0.5 * dt * (v_prev + v);
            const double ds = s_n - s_ref;
            const double hist = H0 + ds * (H1 + 0.5 * ds * H2);
            const double init = I0 + ds * (I1 + 0.5 * ds * I2);
            theta_u = init - hist - final_panel(v_prev, v, s_n - s_prev);
            if (!std::isfinite(theta_u)) throw NumericalError("interface solver: non-finite front temperature at t = " + std::to_string(t));
            if (theta_u < 0.0) {
                if (theta_u < -1e-9) throw StepError("interface solver: negative front temperature", t, theta_u);
                theta_u = 0.0;
            }
            const double v_new = k_.g(theta_u);
            residual = std::abs(v_new - v);
            v = v_new;
            last_iters_ = it;
            if (residual < cfg_.picard_tol) {
                h_.v.push_back(v);
                h_.s.push_back(s_prev + 0.5 * dt * (v_prev + v));
                h_.boundary_temp.push_back(theta_u);
                return;
            }
        }
        throw StepError("interface solver: Picard iteration did not converge", t, residual);
    }

    void run_until(double T_final) {
        if (T_final < 0.0) throw TimeError("run: T_final must be >= 0");
        const std::size_t steps = static_cast<std::size_t>(std::llround(T_final / cfg_.dt));
        h_.v.reserve(steps + 1);
        h_.s.reserve(steps + 1);
        h_.boundary_temp.reserve(steps + 1);
        while (h_.size() <= steps) step();
    }

    /// Quadrature tables for the panel lying j steps back from the newest sample.
    struct PanelTable {
        std::vector<double> theta;  // fraction from the newer end toward the older one
        std::vector<double> inv4;   // 1 / (4 (t - tau))
        std::vector<double> weight; // eta-rule weight including e^{-gamma (t - tau)} / sqrt(pi)
    };
    const PanelTable& panels() const noexcept { return tab_; }

private:
    void ensure_panels(std::size_t n) {
        using GL = quad::GaussLegendre<3>;
        const double dt = cfg_.dt;
        // panels j = 1 .. n-1 are needed
        std::size_t have = tab_.theta.size() / 3;  // panels 1..have
        while (have + 1 < n) {
            const std::size_t j = have + 1;
            const double e_lo = std::sqrt(dt * static_cast<double>(j)), e_hi = std::sqrt(dt * static_cast<double>(j + 1));
            const double c = 0.5 * (e_lo + e_hi), r = 0.5 * (e_hi - e_lo);
            for (int q = 0; q < 3; ++q) {
                const double eta = c + r * GL::x[q];
                const double lag = eta * eta;
                tab_.theta.push_back((lag - dt * static_cast<double>(j)) / dt);
                tab_.inv4.push_back(0.25 / lag);
                tab_.weight.push_back(r * GL::w[q] * detail::kInvSqrtPi * std::exp(-gamma_ * lag));
            }
            ++have;
        }
    }

    void build_final_panel() {
        using GL = quad::GaussLegendre<5>;
        const double dt = cfg_.dt;
        const double r = 0.5 * std::sqrt(dt);
        for (int q = 0; q < 5; ++q) {
            const double eta = r + r * GL::x[q];
            const double lag = eta * eta;
            fin_theta_[q] = lag / dt;
            fin_inv4_[q] = 0.25 / lag;
            fin_weight_[q] = r * GL::w[q] * detail::kInvSqrtPi * std::exp(-gamma_ * lag);
        }
    }

    // Integral over the newest panel; d = theta (s_n - s_{n-1}).
    double final_panel(double v_old, double v_new, double ds_step) const {
        double acc = 0.0;
        for (int q = 0; q < 5; ++q) {
            const double th = fin_theta_[q];
            const double d = th * ds_step;
            const double vv = v_new + th * (v_old - v_new);
            acc += fin_weight_[q] * vv * std::exp(-d * d * fin_inv4_[q]);
        }
        return acc;
    }

    // Panels j >= 1 at front position s_n, with first and second s_n-derivatives.
    void history_sum(std::size_t n, double s_n, double& H0, double& H1, double& H2) const {
        const double* th = tab_.theta.data();
        const double* i4 = tab_.inv4.data();
        const double* wt = tab_.weight.data();
        const double* sv = h_.s.data();
        const double* vv = h_.v.data();
        double a0 = 0.0, a1 = 0.0, a2 = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
            const std::size_t k = n - 1 - j;  // panel [t_k, t_{k+1}]
            const double s_new = sv[k + 1], s_old = sv[k], v_new = vv[k + 1], v_old = vv[k];
            const std::size_t base = 3 * (j - 1);
            for (std::size_t q = 0; q < 3; ++q) {
                const double tq = th[base + q], inv4 = i4[base + q];
                const double d = s_n - (s_new + tq * (s_old - s_new));
                const double f = wt[base + q] * (v_new + tq * (v_old - v_new)) * std::exp(-d * d * inv4);
                const double g1 = -2.0 * d * inv4;
                a0 += f;
                a1 += f * g1;
                a2 += f * (g1 * g1 - 2.0 * inv4);
            }
        }
        if (!std::isfinite(a0)) throw NumericalError("interface solver: non-finite history quadrature");
        H0 = a0;
        H1 = a1;
        H2 = a2;
    }

    KineticsModel k_;
    double gamma_;
    GridField u0_;
    SolverSettings cfg_;
    FrontHistory h_;
    PanelTable tab_;
    double fin_theta_[5]{}, fin_inv4_[5]{}, fin_weight_[5]{};
    int last_iters_ = 0;
};

/// Solves the front problem on [0, T_final].
inline FrontHistory run_front(const ProblemParams& p, const GridField& u0, double T_final) {
    InterfaceSolver solver(p, u0);
    solver.run_until(T_final);
    return solver.history();
}

}  // namespace stefan
