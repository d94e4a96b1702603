#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stefan/field_reconstruction.hpp"
#include "stefan/reference_pde.hpp"

using namespace stefan;

namespace {

KineticsModel baseline_k() { return KineticsModel::arrhenius(2.0, 1.0, -1.0); }

GridField front_free_bump(const GridPtr& g, double amp) {
    return GridField::sample(g, [amp](double x) { return amp * x * x * std::exp(-(x - 1.0) * (x - 1.0)); });
}

double weighted_norm2(const std::vector<double>& u, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i] * u[i];
    return s;
}

}  // namespace

TEST(FiniteDifference, ZeroFieldStartsAtSlowSpeed) {
    const auto k = baseline_k();
    const auto g = SpatialGrid::uniform(40.0, 0.02);
    FDSolver s(k, 0.1, g, 1e-3);
    const auto st = s.initial_state(GridField::zeros(g));
    EXPECT_EQ(st.v_current, -k.v0());
    const auto st1 = s.step(st);
    EXPECT_GE(st1.v_current, -k.V0());
    EXPECT_LE(st1.v_current, -k.v0());
}

TEST(FiniteDifference, TravelingWaveShortRun) {
    const auto k = baseline_k();
    ProblemParams p(0.1, k);
    const auto g = p.grid.make();
    const auto w = traveling_wave(k, 0.1, g);
    const auto r = fd_run(p, w.profile, 5.0);
    double err = 0.0;
    for (double v : r.history.v) err = std::max(err, std::abs(v - w.V));
    EXPECT_LT(err, 1e-3);
}

TEST(FiniteDifference, InterfaceConditionsEveryStep) {
    const auto k = baseline_k();
    const auto g = SpatialGrid::uniform(40.0, 0.02);
    FDSolver s(k, 0.1, g, 1e-3);
    auto st = s.initial_state(GridField::sample(g, [](double x) { return 1.5 * std::exp(-x * x); }));
    for (int n = 0; n < 500; ++n) {
        st = s.step(st);
        EXPECT_NEAR(k.g(st.u[g->zero_left()]), st.v_current, 1e-10);
        EXPECT_EQ(st.u[g->zero_left()], st.u[g->zero_right()]);
        EXPECT_LT(std::abs(st.interface_residual), 1e-10);
        EXPECT_LT(std::abs(derivative_field(st.field()).jump_at_zero - st.v_current), 1e-9);
    }
}

TEST(FiniteDifference, JumpResidualIncreasesWithVelocity) {
    const auto k = baseline_k();
    const auto g = SpatialGrid::uniform(40.0, 0.02);
    FDSolver s(k, 0.1, g, 1e-3);
    const auto st = s.initial_state(GridField::sample(g, [](double x) { return std::exp(-x * x); }));
    double prev = -1e300;
    for (int i = 0; i <= 50; ++i) {
        const double v = -k.v0() - (k.V0() - k.v0()) * (0.99 - 0.99 * i / 50.0);
        const double R = s.jump_residual(st, v);
        EXPECT_GT(R, prev);
        prev = R;
    }
}

TEST(FiniteDifference, FrozenVelocityEigenmodeDecay) {
    // on (-L, L) with zero ends: phi = e^{-Vx/2} sin(pi (x + L) / 2L), rate -(pi^2/4L^2 + V^2/4 + gamma)
    const double L = 10.0, V = -1.2, gamma = 0.1, dt = 1e-3, T = 1.0;
    const auto g = SpatialGrid::uniform(L, 0.02);
    std::vector<double> u(g->size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = g->x(i);
        u[i] = std::exp(-V * x / 2.0) * std::sin(std::numbers::pi * (x + L) / (2.0 * L));
    }
    u.front() = 0.0;
    u.back() = 0.0;
    const auto u0 = u;
    for (int n = 0; n < static_cast<int>(std::llround(T / dt)); ++n) u = testing_hooks::frozen_velocity_step(*g, u, V, gamma, dt);
    const std::size_t probe = g->zero_left() + 100;
    const double measured = std::log(u[probe] / u0[probe]) / T;
    const double expected = -(std::numbers::pi * std::numbers::pi / (4.0 * L * L) + V * V / 4.0 + gamma);
    EXPECT_NEAR(measured / expected, 1.0, 1e-2);
}

TEST(FiniteDifference, MaximumPrinciple) {
    const auto k = baseline_k();
    ProblemParams p(0.1, k);
    const auto g = p.grid.make();
    const auto u0 = GridField::sample(g, [](double x) { return 2.0 * std::exp(-(x + 3.0) * (x + 3.0)) + 0.5 * std::exp(-x * x / 9.0); });
    const auto r = fd_run(p, u0, 5.0);
    EXPECT_GE(r.final_state.min_temperature, -1e-8);
    EXPECT_EQ(r.final_state.nonnegativity_warnings, 0);
}

TEST(FiniteDifference, EnergyIdentity) {
    // (1/2) d/dt |u|^2 = -u(0) v - |u_x|^2 - gamma |u|^2
    const auto k = baseline_k();
    const auto g = SpatialGrid::uniform(40.0, 0.02);
    const double dt = 1e-3, gamma = 0.1;
    FDSolver s(k, gamma, g, dt);
    auto st = s.initial_state(traveling_wave(k, gamma, g).profile.plus(front_free_bump(g, 0.3)));
    const auto w = g->trapezoid_weights();
    for (int n = 0; n < 200; ++n) st = s.step(st);
    for (int n = 0; n < 50; ++n) {
        const auto next = s.step(st);
        const double lhs = (weighted_norm2(next.u, w) - weighted_norm2(st.u, w)) / (2.0 * dt);
        const auto ux = derivative_field(next.field()).derivative;
        const double rhs = -next.u[g->zero_left()] * next.v_current - weighted_norm2(ux.values(), w) - gamma * weighted_norm2(next.u, w);
        EXPECT_NEAR(lhs, rhs, 0.05 * std::abs(rhs)) << n;
        st = next;
    }
}

TEST(FiniteDifference, NewtonFailureCarriesTime) {
    const auto k = baseline_k();
    const auto g = SpatialGrid::uniform(10.0, 0.05);
    FDSolver s(k, 0.1, g, 1e-2, 1e-12, 0);
    const auto st = s.initial_state(GridField::sample(g, [](double x) { return std::exp(-x * x); }));
    try {
        s.step(st);
        FAIL() << "expected a step error";
    } catch (const StepError& e) {
        EXPECT_DOUBLE_EQ(e.time(), 1e-2);
        EXPECT_GT(std::abs(e.residual()), 0.0);
    }
}

TEST(FiniteDifference, RejectsBadSetup) {
    const auto k = baseline_k();
    EXPECT_THROW(FDSolver(k, 0.1, SpatialGrid::from_sides({-1.0, -0.5, 0.0}, {0.0, 0.4, 1.0}), 1e-3), GridError);
    EXPECT_THROW(FDSolver(k, 0.0, SpatialGrid::uniform(1.0, 0.1), 1e-3), ParameterError);
    EXPECT_THROW(FDSolver(k, 0.1, SpatialGrid::uniform(1.0, 0.1), 0.0), ParameterError);
}

TEST(FiniteDifference, SnapshotsAtRequestedTimes) {
    ProblemParams p(0.1, baseline_k());
    const auto g = p.grid.make();
    const auto r = fd_run(p, traveling_wave(p.kinetics, 0.1, g).profile, 1.0, {0.0, 0.5, 1.0});
    ASSERT_EQ(r.snapshots.size(), 3u);
    EXPECT_DOUBLE_EQ(r.snapshots[1].first, 0.5);
    EXPECT_THROW(fd_run(p, GridField::zeros(g), 1.0, {2.0}), TimeError);
}

TEST(CrossValidation, VelocityAgreesWithIntegralEquation) {
    ProblemParams p(0.1, baseline_k());
    const auto g = p.grid.make();
    const auto u0 = GridField::sample(g, [](double x) { return std::exp(-x * x); });
    const auto fd = fd_run(p, u0, 10.0);
    const auto ie = run_front(p, u0, 10.0);
    ASSERT_EQ(fd.history.size(), ie.size());
    double d = 0.0;
    for (std::size_t n = 0; n < ie.size(); ++n) d = std::max(d, std::abs(fd.history.v[n] - ie.v[n]));
    EXPECT_LE(d, 1e-2);
}

TEST(CrossValidation, FieldsAgreeAtTimeFive) {
    ProblemParams p(0.1, baseline_k());
    const auto g = p.grid.make();
    const auto u0 = GridField::sample(g, [](double x) { return std::exp(-x * x); });
    const auto fd = fd_run(p, u0, 5.0, {5.0});
    const auto ie = run_front(p, u0, 5.0);
    const auto u_ie = reconstruct(u0, ie, 5.0, 0.1, g);
    const auto& u_fd = fd.snapshots.at(0).second;
    double diff = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) diff = std::max(diff, std::abs(u_ie[i] - u_fd[i]));
    EXPECT_LE(diff, 0.02 * sup_norm(u_ie));
}

TEST(CrossValidation, DiscrepancyHalvesUnderRefinement) {
    const auto k = baseline_k();
    auto discrepancy = [&](double dt, double dx) {
        ProblemParams p(0.1, k, GridSpec{40.0, dx}, SolverSettings{dt});
        const auto g = p.grid.make();
        const auto u0 = traveling_wave(k, 0.1, g).profile.plus(front_free_bump(g, 0.3));
        const auto fd = fd_run(p, u0, 2.0);
        const auto ie = run_front(p, u0, 2.0);
        double d = 0.0;
        for (std::size_t n = 0; n < ie.size(); ++n) d = std::max(d, std::abs(fd.history.v[n] - ie.v[n]));
        return d;
    };
    const double d1 = discrepancy(2e-3, 0.04), d2 = discrepancy(1e-3, 0.02);
    EXPECT_GE(std::log2(d1 / d2), 1.0) << d1 << ' ' << d2;
}

TEST(FiniteDifference, Deterministic) {
    ProblemParams p(0.1, baseline_k());
    const auto g = p.grid.make();
    const auto u0 = GridField::sample(g, [](double x) { return std::exp(-x * x); });
    EXPECT_EQ(fd_run(p, u0, 1.0).history.v, fd_run(p, u0, 1.0).history.v);
}
