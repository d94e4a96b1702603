#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "stefan/error.hpp"
#include "stefan/grid.hpp"
#include "stefan/quadrature.hpp"

namespace stefan {

/// G(x, t, xi, tau) = exp(-(x - xi)^2 / 4(t - tau)) / sqrt(4 pi (t - tau)).
inline double kernel(double x, double t, double xi, double tau) {
    const double dt = t - tau;
    if (!(dt > 0.0)) throw TimeError("kernel: need t > tau");
    const double d = x - xi;
    return std::exp(-d * d / (4.0 * dt)) / std::sqrt(4.0 * std::numbers::pi * dt);
}

/// Upper bound on the Gaussian tail integral of exp(-b eta^2) over [a, inf).
inline double erf_tail_bound(double a, double b) {
    if (!(b > 0.0)) throw ParameterError("erf_tail_bound: need b > 0");
    if (!(a >= 0.0)) throw ParameterError("erf_tail_bound: need a >= 0");
    const double rb = std::sqrt(b);
    if (a > 1.0 / rb) return std::exp(-b * a * a) / (2.0 * rb);
    return std::sqrt(std::numbers::pi) / (2.0 * rb);
}

namespace detail {

inline constexpr double kInvSqrtPi = 0.564189583547756286948079451560772586;

// (erf(zb) - erf(za)) / 2 using erfc on the side where it keeps relative accuracy.
inline double half_erf_diff(double za, double zb) {
    if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
    if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
    return 0.5 * (std::erf(zb) - std::erf(za));
}

}  // namespace detail

/// Gaussian convolution of piecewise-linear initial data and its first two x-derivatives.
struct Convolution {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    /// Bound on the mass of G outside the data window times the boundary values.
    double tail_bound = 0.0;
};

/// Integral of G(x, t, xi, 0) u0(xi) over the grid of u0 (zero outside). The linear
/// interpolant is convolved exactly, then the O(h^2) interpolation error is removed at
/// every node whose two neighbouring cells are non-degenerate; the duplicated front node
/// is left alone so a kink there is not smoothed. Segments further than 9 kernel widths away are skipped.
inline Convolution gaussian_convolution(const GridField& u0, double x, double t) {
    if (!(t > 0.0)) throw TimeError("gaussian_convolution: need t > 0");
    const auto& xi = u0.grid().x();
    const auto& u = u0.values();
    const std::size_t n = xi.size();
    const double r4t = std::sqrt(4.0 * t), inv_r4t = 1.0 / r4t;
    const double norm = detail::kInvSqrtPi * inv_r4t;
    constexpr double kWindow = 9.0;

    Convolution c;
    const double z_first = (xi.front() - x) * inv_r4t, z_last = (xi.back() - x) * inv_r4t;
    auto tail_mass = [](double z) { return detail::kInvSqrtPi * erf_tail_bound(z, 1.0); };
    c.tail_bound = std::abs(u.front()) * (z_first > 0.0 ? 0.5 : tail_mass(-z_first)) +
                   std::abs(u.back()) * (z_last < 0.0 ? 0.5 : tail_mass(z_last));

    // Node range that meets the window.
    const double lo = x - kWindow * r4t, hi = x + kWindow * r4t;
    std::size_t a = 0, b = n - 1;
    {
        auto it = std::lower_bound(xi.begin(), xi.end(), lo);
        a = it == xi.begin() ? 0 : static_cast<std::size_t>(it - xi.begin()) - 1;
        auto jt = std::upper_bound(xi.begin(), xi.end(), hi);
        b = jt == xi.end() ? n - 1 : static_cast<std::size_t>(jt - xi.begin());
    }
    if (a >= b) return c;

    double z_prev = (xi[a] - x) * inv_r4t;
    double G_prev = norm * std::exp(-z_prev * z_prev);
    const double G_first = G_prev;
    double h_prev = 0.0, sigma_prev = 0.0;
    bool nonneg = u[a] >= 0.0;
    for (std::size_t i = a; i < b; ++i) {
        const double z_next = (xi[i + 1] - x) * inv_r4t;
        const double G_next = norm * std::exp(-z_next * z_next);
        const double h = xi[i + 1] - xi[i];
        nonneg = nonneg && u[i + 1] >= 0.0;
        if (h > 0.0 && h_prev > 0.0) {
            // the interpolant overshoots u by h h' u'' / 12 on average around this node
            const double kink = (u[i + 1] - u[i]) / h - sigma_prev;
            const double w = h * h_prev / 12.0 * kink;
            const double r = xi[i] - x;
            c.value -= w * G_prev;
            c.d1 -= w * (r / (2.0 * t)) * G_prev;
            c.d2 -= w * (r * r / (4.0 * t * t) - 1.0 / (2.0 * t)) * G_prev;
        }
        if (h > 0.0) {
            const double dM = detail::half_erf_diff(z_prev, z_next);
            const double sigma = (u[i + 1] - u[i]) / h;
            c.value += u[i] * dM + sigma * ((x - xi[i]) * dM - 2.0 * t * (G_next - G_prev));
            c.d1 += sigma * dM;
            c.d2 += sigma * (G_prev - G_next);
            sigma_prev = sigma;
        }
        h_prev = h;
        z_prev = z_next;
        G_prev = G_next;
    }
    // Boundary terms from the jumps of u0 to zero at the window ends.
    const double G_last = G_prev;
    const double dG_first = -(x - xi[a]) / (2.0 * t) * G_first;
    const double dG_last = -(x - xi[b]) / (2.0 * t) * G_last;
    c.d1 += G_first * u[a] - G_last * u[b];
    c.d2 += dG_first * u[a] - dG_last * u[b];
    if (nonneg) c.value = std::max(c.value, 0.0);
    return c;
}

/// Weights w_k with sum_k w_k v_k approximating
///   int_0^{t_n} G(x_target, t_n, s(tau), tau) e^{-gamma (t_n - tau)} v(tau) dtau
/// for v and s linear between grid times. Each panel is mapped to eta = sqrt(t_n - tau)
/// and integrated by 3-point Gauss-Legendre, which removes the endpoint singularity.
inline std::vector<double> singular_step_weights(double t_n, const std::vector<double>& t_grid,
                                                 const std::vector<double>& s_samples, double x_target, double gamma) {
    if (t_grid.size() != s_samples.size()) throw GridError("singular_step_weights: t and s sample counts differ");
    if (t_grid.empty()) throw GridError("singular_step_weights: empty time grid");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw GridError("singular_step_weights: time grid not increasing");
    if (std::abs(t_grid.back() - t_n) > 1e-12 * std::max(1.0, t_n))
        throw GridError("singular_step_weights: last grid time must be t_n");

    std::vector<double> w(t_grid.size(), 0.0);
    using GL = quad::GaussLegendre<3>;
    for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
        const double h = t_grid[k + 1] - t_grid[k];
        const double e_lo = std::sqrt(std::max(0.0, t_n - t_grid[k + 1])), e_hi = std::sqrt(t_n - t_grid[k]);
        const double c = 0.5 * (e_lo + e_hi), r = 0.5 * (e_hi - e_lo);
        for (int q = 0; q < 3; ++q) {
            const double eta = c + r * GL::x[q];
            const double lag = eta * eta;
            const double theta = (lag - (t_n - t_grid[k + 1])) / h;  // 0 at t_{k+1}, 1 at t_k
            const double s = s_samples[k + 1] + theta * (s_samples[k] - s_samples[k + 1]);
            const double d = x_target - s;
            const double f = r * GL::w[q] * detail::kInvSqrtPi * std::exp(-d * d / (4.0 * lag) - gamma * lag);
            w[k] += theta * f;
            w[k + 1] += (1.0 - theta) * f;
        }
    }
    return w;
}

}  // namespace stefan
