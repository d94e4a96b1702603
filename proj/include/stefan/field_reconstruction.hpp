#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "stefan/bounds.hpp"
#include "stefan/error.hpp"
#include "stefan/grid.hpp"
#include "stefan/heat_kernel.hpp"
#include "stefan/interface_solver.hpp"
#include "stefan/quadrature.hpp"

namespace stefan {

/// Initial-data part e^{-gamma t} (G * u0)(s_t + x) on the front-attached grid.
inline GridField t2_apply(const GridField& u0, double t, double gamma, double s_t, GridPtr out_grid = nullptr) {
    if (!(t > 0.0)) throw TimeError("t2_apply: need t > 0");
    if (!out_grid) out_grid = u0.grid_ptr();
    const double decay = std::exp(-gamma * t);
    std::vector<double> y(out_grid->size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (i == out_grid->zero_right()) {
            y[i] = y[i - 1];
            continue;
        }
        y[i] = decay * gaussian_convolution(u0, s_t + out_grid->x(i), t).value;
    }
    return GridField(out_grid, std::move(y));
}

namespace detail {

// -int_0^{t_n} e^{-gamma (t_n - tau)} G(s_n + x, t_n, s(tau), tau) v(tau) dtau for one offset x.
inline double interface_potential(const FrontHistory& h, std::size_t n, double x, double gamma) {
    if (n == 0) return 0.0;
    const double dt = h.dt, s_n = h.s[n];
    constexpr double kPrune = 50.0;
    double acc = 0.0;

    auto panel_integrand = [&](std::size_t k, double eta) {
        const double lag = eta * eta;
        const double theta = (lag - (h.t(n) - h.t(k + 1))) / dt;
        const double s = h.s[k + 1] + theta * (h.s[k] - h.s[k + 1]);
        const double v = h.v[k + 1] + theta * (h.v[k] - h.v[k + 1]);
        const double d = s_n + x - s;
        return kInvSqrtPi * std::exp(-d * d / (4.0 * lag) - gamma * lag) * v;
    };

    if (x == 0.0) {
        // Same rule as the time stepper: 5-point Gauss on the newest panel, 3-point elsewhere.
        const double r0 = 0.5 * std::sqrt(dt);
        acc += quad::gauss_legendre<5>([&](double e) { return panel_integrand(n - 1, e); }, 0.0, 2.0 * r0);
        for (std::size_t j = 1; j < n; ++j) {
            const std::size_t k = n - 1 - j;
            acc += quad::gauss_legendre<3>([&](double e) { return panel_integrand(k, e); }, std::sqrt(dt * static_cast<double>(j)),
                                           std::sqrt(dt * static_cast<double>(j + 1)));
        }
        return -acc;
    }

    const double ax = std::abs(x);
    const double near_j = ax / std::sqrt(dt);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = n - 1 - j;
        const double lag_lo = dt * static_cast<double>(j), lag_hi = dt * static_cast<double>(j + 1);
        // smallest |d| on the panel; d is linear in tau
        const double d1 = s_n + x - h.s[k], d2 = s_n + x - h.s[k + 1];
        const double dmin = (d1 > 0.0) != (d2 > 0.0) ? 0.0 : std::min(std::abs(d1), std::abs(d2));
        if (dmin * dmin / (4.0 * lag_hi) + gamma * lag_lo > kPrune) continue;
        const double e_lo = std::sqrt(lag_lo), e_hi = std::sqrt(lag_hi);
        auto f = [&](double e) { return panel_integrand(k, e); };
        if (j < 4 || static_cast<double>(j) < near_j)
            acc += quad::adaptive_gk15(f, e_lo, e_hi, 1e-14, 20);
        else
            acc += quad::gauss_legendre<3>(f, e_lo, e_hi);
    }
    return -acc;
}

}  // namespace detail

/// Interface part at time t (a grid time of the history) on the front-attached grid.
inline GridField t1_apply(const FrontHistory& h, double t, double gamma, GridPtr grid) {
    if (!grid) throw GridError("t1_apply: no output grid");
    if (t < 0.0 || !h.covers(t)) throw TimeError("t1_apply: history does not cover t = " + std::to_string(t));
    const std::size_t n = h.index_of(t);
    std::vector<double> y(grid->size(), 0.0);
    if (n > 0) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (i == grid->zero_right()) {
                y[i] = y[i - 1];
                continue;
            }
            y[i] = detail::interface_potential(h, n, grid->x(i), gamma);
        }
    }
    return GridField(std::move(grid), std::move(y));
}

/// u = initial-data part + interface part at time t, sampled at x = s(t) + x_tilde.
inline SnapshotParts reconstruct_parts(const GridField& u0, const FrontHistory& h, double t, double gamma, GridPtr grid = nullptr) {
    if (!grid) grid = u0.grid_ptr();
    SnapshotParts p;
    p.t = t;
    p.t1 = t1_apply(h, t, gamma, grid);
    if (t == 0.0) {
        std::vector<double> y(grid->size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = u0.interpolate(grid->x(i));
        p.t2 = GridField(grid, std::move(y));
    } else {
        p.t2 = t2_apply(u0, t, gamma, h.s[h.index_of(t)], grid);
    }
    std::vector<double> sum(grid->size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = p.t1[i] + p.t2[i];
    p.total = GridField(grid, std::move(sum));
    return p;
}

inline GridField reconstruct(const GridField& u0, const FrontHistory& h, double t, double gamma, GridPtr grid = nullptr) {
    return reconstruct_parts(u0, h, t, gamma, std::move(grid)).total;
}

}  // namespace stefan
