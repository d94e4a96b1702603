#pragma once

// Independent numerical oracles for the tests: nothing here calls into the library's quadrature.

#include <cmath>
#include <functional>

namespace testing_support {

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb, double whole,
                           double tol, int depth) {
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm), right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson with Richardson correction.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12, int depth = 50) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Traveling-wave speed |V| for Arrhenius kinetics by Newton's method on c = V0 exp(-A / (u(c) - u_inf)).
inline double arrhenius_tw_speed(double V0, double A, double u_inf, double gamma) {
    auto f = [&](double c) {
        const double u = c / std::sqrt(c * c + 4.0 * gamma);
        return V0 * std::exp(-A / (u - u_inf)) - c;
    };
    double c = V0;
    for (int i = 0; i < 100; ++i) {
        const double h = 1e-7 * std::max(1.0, c);
        const double d = (f(c + h) - f(c - h)) / (2.0 * h);
        const double step = f(c) / d;
        c -= step;
        if (std::abs(step) < 1e-15 * c) break;
    }
    return c;
}

}  // namespace testing_support
