#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "stefan/error.hpp"
#include "stefan/grid.hpp"
#include "stefan/interface_solver.hpp"
#include "stefan/kinetics.hpp"
#include "stefan/params.hpp"

namespace stefan {

namespace detail {

/// LU factors of a constant-coefficient tridiagonal matrix (sub a, diag b, super c).
class Tridiagonal {
public:
    Tridiagonal() = default;
    Tridiagonal(std::size_t n, double a, double b, double c) : c_(c), m_(n), inv_(n) {
        if (n == 0) return;
        double piv = b;
        inv_[0] = 1.0 / piv;
        for (std::size_t i = 1; i < n; ++i) {
            m_[i] = a * inv_[i - 1];
            piv = b - m_[i] * c;
            if (piv == 0.0 || !std::isfinite(piv)) throw NumericalError("tridiagonal solve: zero pivot");
            inv_[i] = 1.0 / piv;
        }
    }

    /// In-place solve.
    void solve(double* r) const {
        const std::size_t n = inv_.size();
        if (n == 0) return;
        for (std::size_t i = 1; i < n; ++i) r[i] -= m_[i] * r[i - 1];
        r[n - 1] *= inv_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) r[i] = (r[i] - c_ * r[i + 1]) * inv_[i];
    }

    std::size_t size() const noexcept { return inv_.size(); }

private:
    double c_ = 0.0;
    std::vector<double> m_, inv_;
};

}  // namespace detail

/// Front-attached finite-difference state; u uses the GridField layout with x = 0 stored twice.
struct FDState {
    GridPtr grid;
    std::vector<double> u;
    double t = 0.0;
    double v_current = 0.0;
    int newton_iterations = 0;
    double interface_residual = 0.0;
    /// Most negative temperature seen and the number of steps that went below -1e-6.
    double min_temperature = 0.0;
    int nonnegativity_warnings = 0;

    GridField field() const { return GridField(grid, u); }
};

/// Coefficients of one implicit Euler row: a u_{i-1} + b u_i + c u_{i+1} = u_i^old.
struct FDRow {
    double a, b, c;
    /// d a / d v and d c / d v
    double da, dc;
};

inline FDRow fd_row(double dt, double dx, double gamma, double v) {
    const double diff = 1.0 / (dx * dx), adv = v / (2.0 * dx);
    return {-dt * (diff - adv), 1.0 + dt * (2.0 * diff + gamma), -dt * (diff + adv), dt / (2.0 * dx), -dt / (2.0 * dx)};
}

/// Implicit Euler, central differences, u(+-L) = 0, front value g^{-1}(v) and
/// the discrete jump condition closed by Newton on the scalar v.
class FDSolver {
public:
    FDSolver(const KineticsModel& k, double gamma, GridPtr grid, double dt, double newton_tol = 1e-12, int max_newton = 60)
        : k_(k), gamma_(gamma), grid_(std::move(grid)), dt_(dt), tol_(newton_tol), max_newton_(max_newton) {
        if (!grid_ || !grid_->is_uniform()) throw GridError("finite-difference solver needs a uniform grid");
        if (grid_->n_minus() != grid_->n_plus()) throw GridError("finite-difference solver needs a symmetric grid");
        if (!(dt > 0.0)) throw ParameterError("finite-difference solver: dt must be positive");
        if (!(gamma > 0.0)) throw ParameterError("finite-difference solver: gamma must be positive");
        N_ = grid_->n_minus() - 1;
        dx_ = grid_->dx();
    }

    FDState initial_state(const GridField& u0) const {
        if (u0.grid().x() != grid_->x()) throw GridError("finite-difference solver: initial data on a different grid");
        FDState s;
        s.grid = grid_;
        s.u = u0.values();
        s.t = 0.0;
        s.v_current = k_.g(std::max(0.0, u0.at_zero()));
        s.min_temperature = *std::min_element(s.u.begin(), s.u.end());
        return s;
    }

    double dt() const noexcept { return dt_; }
    double dx() const noexcept { return dx_; }
    std::size_t half_cells() const noexcept { return N_; }
    const KineticsModel& kinetics() const noexcept { return k_; }
    double gamma() const noexcept { return gamma_; }

    /// One implicit step.
    FDState step(const FDState& s) const {
        Work w(N_);
        const double lo = -k_.V0(), hi = -k_.v0();
        double v = std::clamp(s.v_current, lo * (1.0 - 1e-9), hi);
        double R = residual(s, v, w, true);
        double dR = w.dR;
        int it = 0;
        bool ok = std::abs(R) < tol_;
        while (!ok && it < max_newton_) {
            ++it;
            double v_new = v - R / dR;
            if (!(dR > 0.0) || !std::isfinite(v_new) || v_new <= lo || v_new > hi) {
                v_new = bisect(s, w, v, R);
            }
            const double step_size = std::abs(v_new - v);
            v = v_new;
            R = residual(s, v, w, true);
            dR = w.dR;
            ok = std::abs(R) < tol_ || (step_size < 1e-15 * std::abs(v) && std::abs(R) < 1e3 * tol_);
        }
        if (!ok) throw StepError("finite-difference Newton did not converge", s.t + dt_, R);
        FDState out;
        out.grid = grid_;
        out.u = assemble(w);
        out.t = s.t + dt_;
        out.v_current = v;
        out.newton_iterations = it;
        out.interface_residual = R;
        const double mn = *std::min_element(out.u.begin(), out.u.end());
        out.min_temperature = std::min(s.min_temperature, mn);
        out.nonnegativity_warnings = s.nonnegativity_warnings + (mn < -1e-6 ? 1 : 0);
        return out;
    }

    /// Jump residual slope(0+) - slope(0-) - v after solving both sides with front value g^{-1}(v).
    double jump_residual(const FDState& s, double v) const {
        Work w(N_);
        return residual(s, v, w, false);
    }

private:
    struct Work {
        explicit Work(std::size_t N) : left(N - 1), right(N - 1), dleft(N - 1), dright(N - 1) {}
        std::vector<double> left, right, dleft, dright;
        double U0 = 0.0, dR = 0.0;
    };

    // Interior unknowns: left runs -L+dx .. -dx, right runs dx .. L-dx.
    double residual(const FDState& s, double v, Work& w, bool with_derivative) const {
        const std::size_t N = N_;
        const FDRow r = fd_row(dt_, dx_, gamma_, v);
        const detail::Tridiagonal T(N - 1, r.a, r.b, r.c);
        const double U0 = k_.g_inv(v);
        w.U0 = U0;
        const std::size_t zr = N + 1;  // layout index of 0+
        for (std::size_t i = 0; i + 1 < N; ++i) {
            w.left[i] = s.u[1 + i];        // layout 1..N-1
            w.right[i] = s.u[zr + 1 + i];  // layout N+2..2N
        }
        w.left[N - 2] -= r.c * U0;
        w.right[0] -= r.a * U0;
        T.solve(w.left.data());
        T.solve(w.right.data());

        const double um1 = w.left[N - 2], um2 = w.left[N - 3];
        const double up1 = w.right[0], up2 = w.right[1];
        const double slope_r = (-3.0 * U0 + 4.0 * up1 - up2) / (2.0 * dx_);
        const double slope_l = (3.0 * U0 - 4.0 * um1 + um2) / (2.0 * dx_);
        const double R = slope_r - slope_l - v;
        if (!with_derivative) return R;

        // d/dv: A u' = -(da u_{i-1} + dc u_{i+1}) with u'_0 = -nu, u'(+-L) = 0.
        const double dU0 = -k_.nu(std::max(v, -k_.V0() * (1.0 - 1e-12)));
        auto left_at = [&](long i) { return i < 0 ? 0.0 : (i >= static_cast<long>(N - 1) ? U0 : w.left[static_cast<std::size_t>(i)]); };
        auto right_at = [&](long i) { return i < 0 ? U0 : (i >= static_cast<long>(N - 1) ? 0.0 : w.right[static_cast<std::size_t>(i)]); };
        for (long i = 0; i < static_cast<long>(N - 1); ++i) {
            w.dleft[static_cast<std::size_t>(i)] = -(r.da * left_at(i - 1) + r.dc * left_at(i + 1));
            w.dright[static_cast<std::size_t>(i)] = -(r.da * right_at(i - 1) + r.dc * right_at(i + 1));
        }
        w.dleft[N - 2] -= r.c * dU0;
        w.dright[0] -= r.a * dU0;
        T.solve(w.dleft.data());
        T.solve(w.dright.data());
        const double d_r = (-3.0 * dU0 + 4.0 * w.dright[0] - w.dright[1]) / (2.0 * dx_);
        const double d_l = (3.0 * dU0 - 4.0 * w.dleft[N - 2] + w.dleft[N - 3]) / (2.0 * dx_);
        w.dR = d_r - d_l - 1.0;
        return R;
    }

    // Bisection fallback; R increases with v and tends to -infinity at -V0.
    double bisect(const FDState& s, Work& w, double v, double R) const {
        double a = -k_.V0() * (1.0 - 1e-9), b = -k_.v0();
        if (R < 0.0) a = v;
        else b = v;
        if (residual(s, a, w, false) > 0.0) throw StepError("finite-difference interface: no root above -V0", s.t + dt_, R);
        if (residual(s, b, w, false) < 0.0) throw StepError("finite-difference interface: no root below -v0", s.t + dt_, R);
        for (int i = 0; i < 200 && b - a > 1e-15 * std::abs(a); ++i) {
            const double m = 0.5 * (a + b);
            if (residual(s, m, w, false) < 0.0) a = m;
            else b = m;
        }
        return 0.5 * (a + b);
    }

    std::vector<double> assemble(const Work& w) const {
        const std::size_t N = N_;
        std::vector<double> u(2 * N + 2, 0.0);
        for (std::size_t i = 0; i + 1 < N; ++i) {
            u[1 + i] = w.left[i];
            u[N + 2 + i] = w.right[i];
        }
        u[N] = u[N + 1] = w.U0;
        return u;
    }

    KineticsModel k_;
    double gamma_;
    GridPtr grid_;
    double dt_, tol_;
    int max_newton_;
    std::size_t N_ = 0;
    double dx_ = 0.0;
};

inline FDState fd_step(const FDSolver& solver, const FDState& state) { return solver.step(state); }

struct FDRun {
    FrontHistory history;
    std::vector<std::pair<double, GridField>> snapshots;
    FDState final_state;
};

/// Runs to T_final, recording the velocity every step and fields at the requested times.
inline FDRun fd_run(const ProblemParams& p, const GridField& u0, double T_final, const std::vector<double>& snapshot_times = {}) {
    FDSolver solver(p.kinetics, p.gamma, u0.grid_ptr(), p.solver.dt);
    FDState st = solver.initial_state(u0);
    FDRun r;
    r.history.dt = p.solver.dt;
    r.history.v.push_back(st.v_current);
    r.history.s.push_back(0.0);
    r.history.boundary_temp.push_back(st.u[u0.grid().zero_left()]);
    const std::size_t steps = static_cast<std::size_t>(std::llround(T_final / p.solver.dt));
    std::vector<std::size_t> snap_idx;
    for (double ts : snapshot_times) {
        if (ts < 0.0 || ts > T_final * (1 + 1e-12)) throw TimeError("snapshot time outside [0, T_final]");
        snap_idx.push_back(static_cast<std::size_t>(std::llround(ts / p.solver.dt)));
    }
    auto take = [&](std::size_t k) {
        for (std::size_t q = 0; q < snap_idx.size(); ++q)
            if (snap_idx[q] == k) r.snapshots.emplace_back(snapshot_times[q], st.field());
    };
    take(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        st = solver.step(st);
        const double v_old = r.history.v.back();
        r.history.v.push_back(st.v_current);
        r.history.s.push_back(r.history.s.back() + 0.5 * p.solver.dt * (v_old + st.v_current));
        r.history.boundary_temp.push_back(st.u[u0.grid().zero_left()]);
        take(k);
    }
    r.final_state = std::move(st);
    return r;
}

namespace testing_hooks {

/// Implicit Euler for u_t = u_xx + V u_x - gamma u with V frozen and no interface:
/// x = 0 is an ordinary node and u(+-L) = 0.
inline std::vector<double> frozen_velocity_step(const SpatialGrid& grid, const std::vector<double>& u, double V, double gamma, double dt) {
    const std::size_t N = grid.n_minus() - 1;
    const FDRow r = fd_row(dt, grid.dx(), gamma, V);
    // merged unknowns: -L+dx .. L-dx, 2N-1 nodes
    std::vector<double> rhs(2 * N - 1);
    for (std::size_t i = 0; i < N; ++i) rhs[i] = u[1 + i];                 // -L+dx .. 0
    for (std::size_t i = 1; i < N; ++i) rhs[N - 1 + i] = u[N + 1 + i];     // dx .. L-dx
    detail::Tridiagonal(rhs.size(), r.a, r.b, r.c).solve(rhs.data());
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t i = 0; i < N; ++i) out[1 + i] = rhs[i];
    out[N + 1] = out[N];
    for (std::size_t i = 1; i < N; ++i) out[N + 1 + i] = rhs[N - 1 + i];
    return out;
}

}  // namespace testing_hooks

}  // namespace stefan
