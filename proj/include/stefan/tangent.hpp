#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "stefan/bounds.hpp"
#include "stefan/error.hpp"
#include "stefan/grid.hpp"
#include "stefan/reference_pde.hpp"

namespace stefan {

/// m perturbation fields in the finite-difference layout plus growth bookkeeping.
struct TangentSet {
    GridPtr grid;
    std::vector<std::vector<double>> z;
    double log_volume = 0.0;
    /// accumulated log stretch per vector
    std::vector<double> log_stretch;
    int renorm_period = 10;

    std::size_t m() const noexcept { return z.size(); }

    static TangentSet from_fields(const std::vector<GridField>& fields, int renorm_period = 10) {
        if (fields.empty()) throw ParameterError("tangent set needs at least one field");
        TangentSet t;
        t.grid = fields.front().grid_ptr();
        for (const auto& f : fields) {
            f.require_same_grid(fields.front());
            t.z.push_back(f.values());
        }
        t.log_stretch.assign(t.z.size(), 0.0);
        t.renorm_period = renorm_period;
        return t;
    }

    GridField field(std::size_t i) const { return GridField::with_jump(grid, z[i]); }
};

/// Frozen trajectory data for one tangent step: the new state U, V and nu(V).
struct TangentCoefficients {
    const std::vector<double>* U = nullptr;
    double V = 0.0;
    double nu = 1.0;
};

/// Implicit Euler for z_t = z_xx + V z_x - gamma z - z(0) U_x / nu with z(+-L) = 0 and
/// z(0) + nu [z_x](0) = 0, discretized exactly as the linearization of FDSolver::step.
/// The nonlocal term is handled by writing z = p + z(0) q and solving the scalar border.
inline void linearized_step(TangentSet& ts, const TangentCoefficients& co, double dt, double gamma, double time = 0.0) {
    const SpatialGrid& g = *ts.grid;
    const std::size_t N = g.n_minus() - 1;
    const double dx = g.dx();
    if (!(dx > 0.0)) throw GridError("linearized_step needs a uniform grid");
    const std::vector<double>& U = *co.U;
    const FDRow r = fd_row(dt, dx, gamma, co.V);
    const detail::Tridiagonal T(N - 1, r.a, r.b, r.c);
    const double nu = co.nu;

    // q for a unit front value: A q = -dt D1U / nu - (boundary coupling)
    std::vector<double> ql(N - 1), qr(N - 1);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        ql[i] = -dt * (U[i + 2] - U[i]) / (2.0 * dx) / nu;          // layout i + 1
        qr[i] = -dt * (U[N + 3 + i] - U[N + 1 + i]) / (2.0 * dx) / nu;  // layout N + 2 + i
    }
    ql[N - 2] -= r.c;
    qr[0] -= r.a;
    T.solve(ql.data());
    T.solve(qr.data());
    const double Jq = (4.0 * qr[0] - qr[1] + 4.0 * ql[N - 2] - ql[N - 3]) / (2.0 * dx);
    const double denom = 1.0 - 3.0 * nu / dx + nu * Jq;
    if (!(std::abs(denom) > 1e-300) || !std::isfinite(denom))
        throw StepError("tangent step: singular bordered system", time, denom);

    std::vector<double> pl(N - 1), pr(N - 1);
    for (auto& z : ts.z) {
        for (std::size_t i = 0; i + 1 < N; ++i) {
            pl[i] = z[1 + i];
            pr[i] = z[N + 2 + i];
        }
        T.solve(pl.data());
        T.solve(pr.data());
        const double Jp = (4.0 * pr[0] - pr[1] + 4.0 * pl[N - 2] - pl[N - 3]) / (2.0 * dx);
        const double z0 = -nu * Jp / denom;
        z.assign(z.size(), 0.0);
        for (std::size_t i = 0; i + 1 < N; ++i) {
            z[1 + i] = pl[i] + z0 * ql[i];
            z[N + 2 + i] = pr[i] + z0 * qr[i];
        }
        z[N] = z[N + 1] = z0;
    }
}

/// Residual of z(0) + nu [z_x](0) = 0 with the one-sided stencils, relative to |z|.
inline double boundary_constraint_residual(const std::vector<double>& z, const SpatialGrid& g, double nu) {
    const std::size_t N = g.n_minus() - 1;
    const double dx = g.dx();
    const double jump = (-3.0 * z[N + 1] + 4.0 * z[N + 2] - z[N + 3]) / (2.0 * dx) - (3.0 * z[N] - 4.0 * z[N - 1] + z[N - 2]) / (2.0 * dx);
    double nrm = 0.0;
    for (double y : z) nrm = std::max(nrm, std::abs(y));
    return std::abs(z[N] + nu * jump) / std::max(nrm, 1e-300);
}

namespace detail {

inline double weighted_dot(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
}

}  // namespace detail

/// Modified Gram-Schmidt (two passes) in the trapezoid L2 product; returns log stretch per vector
/// and adds them to the set's bookkeeping.
inline std::vector<double> orthonormalize(TangentSet& ts) {
    const auto w = ts.grid->trapezoid_weights();
    const std::size_t m = ts.m();
    std::vector<double> logs(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto& zi = ts.z[i];
        const double before = std::sqrt(detail::weighted_dot(zi, zi, w));
        if (!(before > 0.0) || !std::isfinite(before)) throw DegenerateSetError("tangent vector " + std::to_string(i) + " vanished");
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < i; ++j) {
                const double c = detail::weighted_dot(zi, ts.z[j], w);
                for (std::size_t k = 0; k < zi.size(); ++k) zi[k] -= c * ts.z[j][k];
            }
        const double after = std::sqrt(detail::weighted_dot(zi, zi, w));
        if (!(after > 1e-13 * before)) throw DegenerateSetError("tangent vectors are numerically dependent");
        for (double& y : zi) y /= after;
        logs[i] = std::log(after);
    }
    ts.log_stretch.resize(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        ts.log_stretch[i] += logs[i];
        ts.log_volume += logs[i];
    }
    return logs;
}

/// Rotated copy of an orthonormal set whose first m-1 vectors vanish at x = 0.
inline std::vector<std::vector<double>> rotate_front_free(const TangentSet& ts) {
    const std::size_t m = ts.m(), N0 = ts.grid->zero_left();
    std::vector<double> c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = ts.z[i][N0];
    const double nc = std::sqrt(std::inner_product(c.begin(), c.end(), c.begin(), 0.0));
    std::vector<std::vector<double>> out = ts.z;
    if (m == 1 || nc == 0.0) return out;
    // Householder reflection H with H c = sigma |c| e_m
    std::vector<double> u = c;
    const double sigma = c[m - 1] >= 0.0 ? 1.0 : -1.0;
    u[m - 1] += sigma * nc;
    const double uu = std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        auto& row = out[j];
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double h = (i == j ? 1.0 : 0.0) - 2.0 * u[j] * u[i] / uu;
            if (h == 0.0) continue;
            for (std::size_t k = 0; k < row.size(); ++k) row[k] += h * ts.z[i][k];
        }
    }
    for (std::size_t j = 0; j + 1 < m; ++j) {
        out[j][N0] = 0.0;
        out[j][N0 + 1] = 0.0;
    }
    return out;
}

/// <F'phi, phi> = -gamma + phi(0)^2/nu - int phi_x^2 - (phi(0)/nu) int U_x phi for each basis vector.
inline std::vector<double> trace_entries(const std::vector<std::vector<double>>& basis, const GridPtr& grid, const std::vector<double>& U,
                                         double gamma, double nu) {
    const auto w = grid->trapezoid_weights();
    const GridField Uf = GridField::with_jump(grid, U);
    const auto Ux = derivative_field(Uf).derivative.values();
    const std::size_t N0 = grid->zero_left();
    std::vector<double> out;
    out.reserve(basis.size());
    for (const auto& phi : basis) {
        const auto px = derivative_field(GridField::with_jump(grid, phi)).derivative.values();
        const double p0 = 0.5 * (phi[N0] + phi[N0 + 1]);
        double grad2 = 0.0, cross = 0.0, norm2 = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            grad2 += w[k] * px[k] * px[k];
            cross += w[k] * Ux[k] * phi[k];
            norm2 += w[k] * phi[k] * phi[k];
        }
        out.push_back(-gamma * norm2 + p0 * p0 / nu - grad2 - p0 / nu * cross);
    }
    return out;
}

struct SpectrumReport {
    std::size_t m = 0;
    std::vector<double> exponents;
    /// time average of the trace over the measurement window
    double mean_trace = 0.0;
    /// log-volume growth per unit time over the same window
    double volume_rate = 0.0;
    double M_dim_closed_form = 0.0;
    double M_dim_optimized = 0.0;
    double dimension_estimate = 0.0;
    /// largest entry + gamma over vectors vanishing at 0 (must be <= 1e-6)
    double worst_front_free_excess = -1e300;
    /// largest value of (trace sum) - (mu - (m-1) gamma)
    double worst_sum_excess = -1e300;
    /// largest single entry for the vector not vanishing at 0, against mu
    double worst_front_entry = -1e300;
    double mu = 0.0;
    std::size_t samples = 0;
    double window = 0.0;
    double max_constraint_residual = 0.0;
};

/// Kaplan-Yorke interpolation; exponents need not be sorted.
inline double kaplan_yorke(std::vector<double> ex) {
    std::sort(ex.begin(), ex.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t j = 0; j < ex.size(); ++j) {
        if (s + ex[j] < 0.0) return static_cast<double>(j) + s / std::abs(ex[j]);
        s += ex[j];
    }
    return static_cast<double>(ex.size());
}

/// Smooth random perturbations localized near the front, one per vector.
inline std::vector<GridField> random_perturbations(const GridPtr& grid, std::size_t m, std::uint64_t seed, double width = 3.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), ctr(-2.0 * width, 2.0 * width);
    std::vector<GridField> out;
    const double L = grid->L();
    for (std::size_t i = 0; i < m; ++i) {
        double a[4], c[4];
        for (int q = 0; q < 4; ++q) {
            a[q] = amp(rng);
            c[q] = ctr(rng);
        }
        out.push_back(GridField::sample(grid, [&](double x) {
            double y = 0.0;
            for (int q = 0; q < 4; ++q) y += a[q] * std::exp(-(x - c[q]) * (x - c[q]) / (width * width));
            return y * (1.0 - (x / L) * (x / L));
        }));
    }
    return out;
}

struct VolumeGrowthOptions {
    std::size_t m = 1;
    double horizon = 20.0;
    /// time skipped before averaging
    double transient = 5.0;
    int renorm_period = 10;
    std::uint64_t seed = 1;
};

/// Runs the finite-difference trajectory and m tangent vectors together and measures growth.
inline SpectrumReport volume_growth(const FDSolver& solver, FDState state, const VolumeGrowthOptions& opt, const ConstantsTable* table = nullptr) {
    const double dt = solver.dt();
    if (opt.m < 1) throw ParameterError("volume_growth: m must be >= 1");
    if (opt.renorm_period < 1) throw ParameterError("volume_growth: renorm_period must be >= 1");
    const double window = opt.horizon - opt.transient;
    if (!(window >= 10.0 * opt.renorm_period * dt))
        throw TimeError("volume_growth: measurement window shorter than 10 renormalization periods");
    const std::size_t steps = static_cast<std::size_t>(std::llround(opt.horizon / dt));
    const std::size_t skip = static_cast<std::size_t>(std::llround(opt.transient / dt));

    TangentSet ts = TangentSet::from_fields(random_perturbations(state.grid, opt.m, opt.seed), opt.renorm_period);
    orthonormalize(ts);
    const double gamma = solver.gamma();
    const KineticsModel& k = solver.kinetics();

    SpectrumReport rep;
    rep.m = opt.m;
    if (table) {
        rep.M_dim_closed_form = table->M_dim;
        rep.M_dim_optimized = table->M_dim_optimized;
        rep.mu = table->mu;
    }
    std::vector<double> sums(opt.m, 0.0);
    double trace_integral = 0.0, prev_trace = 0.0, prev_t = 0.0, vol = 0.0;
    bool have_prev = false;
    int since = 0;
    const auto w = state.grid->trapezoid_weights();

    for (std::size_t n = 1; n <= steps; ++n) {
        state = solver.step(state);
        const double nu = k.nu(state.v_current);
        linearized_step(ts, {&state.u, state.v_current, nu}, dt, gamma, state.t);
        ++since;
        bool renorm = since >= opt.renorm_period || n == steps;
        if (!renorm) {
            for (const auto& z : ts.z) {
                const double nz = detail::weighted_dot(z, z, w);
                if (!(nz > 1e-300) || nz > 1e300) renorm = true;
            }
        }
        if (!renorm) continue;
        since = 0;
        for (const auto& z : ts.z) rep.max_constraint_residual = std::max(rep.max_constraint_residual, n > 1 ? boundary_constraint_residual(z, *ts.grid, nu) : 0.0);
        const auto logs = orthonormalize(ts);
        if (n <= skip) continue;
        for (std::size_t i = 0; i < opt.m; ++i) sums[i] += logs[i];
        vol += std::accumulate(logs.begin(), logs.end(), 0.0);

        const auto rotated = rotate_front_free(ts);
        const auto entries = trace_entries(rotated, ts.grid, state.u, gamma, nu);
        double tr = 0.0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            tr += entries[i];
            if (i + 1 < entries.size()) rep.worst_front_free_excess = std::max(rep.worst_front_free_excess, entries[i] + gamma);
            else rep.worst_front_entry = std::max(rep.worst_front_entry, entries[i]);
        }
        if (table) rep.worst_sum_excess = std::max(rep.worst_sum_excess, tr - (table->mu - static_cast<double>(opt.m - 1) * gamma));
        const double t = state.t;
        if (have_prev) trace_integral += 0.5 * (tr + prev_trace) * (t - prev_t);
        else {
            // first sample after the transient; the interval since the last renormalization is covered by this sample
            trace_integral += tr * (t - static_cast<double>(skip) * dt);
        }
        prev_trace = tr;
        prev_t = t;
        have_prev = true;
        ++rep.samples;
    }
    const double span = static_cast<double>(steps - skip) * dt;
    rep.window = span;
    rep.exponents.resize(opt.m);
    for (std::size_t i = 0; i < opt.m; ++i) rep.exponents[i] = sums[i] / span;
    rep.volume_rate = vol / span;
    rep.mean_trace = trace_integral / span;
    rep.dimension_estimate = kaplan_yorke(rep.exponents);
    return rep;
}

/// L2 size of T(t)(u0 + eps xi) - T(t)u0 - eps z(t), where z is the linearized flow started at xi.
inline double linearization_remainder(const FDSolver& solver, const GridField& u0, const GridField& xi, double eps, double t_final) {
    FDState base = solver.initial_state(u0);
    FDState pert = solver.initial_state(u0.plus(xi, eps));
    TangentSet ts = TangentSet::from_fields({xi});
    const std::size_t steps = static_cast<std::size_t>(std::llround(t_final / solver.dt()));
    for (std::size_t n = 0; n < steps; ++n) {
        base = solver.step(base);
        pert = solver.step(pert);
        linearized_step(ts, {&base.u, base.v_current, solver.kinetics().nu(base.v_current)}, solver.dt(), solver.gamma(), base.t);
    }
    std::vector<double> r(base.u.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = pert.u[i] - base.u[i] - eps * ts.z[0][i];
    return std::sqrt(detail::weighted_dot(r, r, ts.grid->trapezoid_weights()));
}

}  // namespace stefan
