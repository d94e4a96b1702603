#pragma once

#include <array>
#include <cmath>

namespace stefan::quad {

template <int N>
struct GaussLegendre;

/// Nodes and weights on [-1, 1].
template <>
struct GaussLegendre<3> {
    static constexpr std::array<double, 3> x{-0.774596669241483377035853079956, 0.0, 0.774596669241483377035853079956};
    static constexpr std::array<double, 3> w{0.555555555555555555555555555556, 0.888888888888888888888888888889,
                                             0.555555555555555555555555555556};
};

template <>
struct GaussLegendre<5> {
    static constexpr std::array<double, 5> x{-0.906179845938663992797626878299, -0.538469310105683091036314420700, 0.0,
                                             0.538469310105683091036314420700, 0.906179845938663992797626878299};
    static constexpr std::array<double, 5> w{0.236926885056189087514264040720, 0.478628670499366468041291514836,
                                             0.568888888888888888888888888889, 0.478628670499366468041291514836,
                                             0.236926885056189087514264040720};
};

template <int N, class F>
double gauss_legendre(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int q = 0; q < N; ++q) s += GaussLegendre<N>::w[q] * f(c + h * GaussLegendre<N>::x[q]);
    return h * s;
}

namespace detail {

inline constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526, 0.949107912342758524526189684048,
                                            0.864864423359769072789712788641, 0.741531185599394439863864773281,
                                            0.586087235467691130294144845694, 0.405845151377397166906606412077,
                                            0.207784955007898467600689403773, 0.0};
inline constexpr std::array<double, 8> kWgk{0.022935322010529224963732008059, 0.063092092629978553290700663189,
                                            0.104790010322250183839876322542, 0.140653259715525918745189590510,
                                            0.169004726639267902826583426599, 0.190350578064785409913256402421,
                                            0.204432940075298892414161999235, 0.209482141084727828012999174892};
inline constexpr std::array<double, 4> kWg{0.129484966168869693270611432679, 0.279705391489276667901467771424,
                                           0.381830050505118944950369775489, 0.417959183673469387755102040816};

template <class F>
void gk15(F& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * kWgk[7], rg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = f(c - dx), f2 = f(c + dx);
        rk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) rg += kWg[j / 2] * (f1 + f2);
    }
    result = rk * h;
    err = std::abs((rk - rg) * h);
}

template <class F>
double adapt(F& f, double a, double b, double whole, double err, double tol, int depth) {
    if (err <= tol || depth <= 0 || !(b - a > 0.0)) return whole;
    const double m = 0.5 * (a + b);
    double r1, e1, r2, e2;
    gk15(f, a, m, r1, e1);
    gk15(f, m, b, r2, e2);
    return adapt(f, a, m, r1, e1, 0.5 * tol, depth - 1) + adapt(f, m, b, r2, e2, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod 7/15 with absolute tolerance.
template <class F>
double adaptive_gk15(F&& f, double a, double b, double abs_tol, int max_depth = 30) {
    double r, e;
    detail::gk15(f, a, b, r, e);
    return detail::adapt(f, a, b, r, e, abs_tol, max_depth);
}

}  // namespace stefan::quad
