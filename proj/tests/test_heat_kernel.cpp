#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stefan/heat_kernel.hpp"
#include "support.hpp"

using namespace stefan;

TEST(HeatKernel, OnDiagonalValue) {
    EXPECT_NEAR(kernel(0.0, 1.0, 0.0, 0.0), 1.0 / std::sqrt(4.0 * std::numbers::pi), 1e-16);
    EXPECT_NEAR(kernel(0.0, 1.0, 0.0, 0.0), 0.28209479177387814, 1e-15);
}

TEST(HeatKernel, ReferenceValue) {
    EXPECT_NEAR(kernel(2.0, 1.5, 0.5, 0.5), 0.160732767298801832263369228591, 1e-15);
}

TEST(HeatKernel, SymmetricAndPositive) {
    for (double d : {0.0, 0.3, 2.0, 7.5}) {
        EXPECT_GT(kernel(d, 2.0, 0.0, 0.5), 0.0);
        EXPECT_EQ(kernel(d, 2.0, 0.0, 0.5), kernel(0.0, 2.0, d, 0.5));
    }
}

TEST(HeatKernel, TimeOrdering) {
    EXPECT_THROW(kernel(0.0, 1.0, 0.0, 1.0), TimeError);
    EXPECT_THROW(kernel(0.0, 1.0, 0.0, 2.0), TimeError);
}

TEST(HeatKernel, Normalization) {
    const double h = 1e-2;
    double s = 0.0;
    for (int i = 0; i <= 8000; ++i) {
        const double xi = -40.0 + h * i;
        s += (i == 0 || i == 8000 ? 0.5 : 1.0) * kernel(0.3, 1.0, xi, 0.0);
    }
    EXPECT_NEAR(s * h, 1.0, 1e-6);
}

TEST(HeatKernel, ChapmanKolmogorov) {
    const double x = 0.7, t = 1.3, tau = 0.4, xi = -0.2;
    const double h = 5e-3;
    double s = 0.0;
    for (int i = 0; i <= 8000; ++i) {
        const double y = -20.0 + h * i;
        s += (i == 0 || i == 8000 ? 0.5 : 1.0) * kernel(x, t, y, tau) * kernel(y, tau, xi, 0.0);
    }
    EXPECT_NEAR(s * h, kernel(x, t, xi, 0.0), 1e-6);
}

TEST(ErfTail, LargeArgumentBranch) {
    const double b = erf_tail_bound(2.0, 1.0);
    EXPECT_NEAR(b, 0.5 * std::exp(-4.0), 1e-16);
    const double truth = testing_support::adaptive_simpson([](double e) { return std::exp(-e * e); }, 2.0, 12.0, 1e-14);
    EXPECT_NEAR(truth, 0.00414553469033633368160270575652, 1e-12);
    EXPECT_GE(b, truth);
}

TEST(ErfTail, FullHalfLine) {
    EXPECT_DOUBLE_EQ(erf_tail_bound(0.0, 1.0), std::sqrt(std::numbers::pi) / 2.0);
}

TEST(ErfTail, SmallArgumentBranch) {
    const double b = erf_tail_bound(0.5, 1.0);
    EXPECT_DOUBLE_EQ(b, std::sqrt(std::numbers::pi) / 2.0);
    const double truth = testing_support::adaptive_simpson([](double e) { return std::exp(-e * e); }, 0.5, 12.0, 1e-14);
    EXPECT_NEAR(truth, 0.42494591903996556489338080493, 1e-12);
    EXPECT_GE(b, truth);
}

TEST(ErfTail, RejectsNonPositiveRate) {
    EXPECT_THROW(erf_tail_bound(1.0, 0.0), ParameterError);
    EXPECT_THROW(erf_tail_bound(1.0, -2.0), ParameterError);
}

TEST(ErfTail, BoundsRandomTails) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ad(0.0, 10.0), bd(0.01, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = ad(rng), b = bd(rng);
        // closed form of the tail: (sqrt(pi) / (2 sqrt b)) erfc(a sqrt b)
        const double truth = std::sqrt(std::numbers::pi) / (2.0 * std::sqrt(b)) * std::erfc(a * std::sqrt(b));
        EXPECT_GE(erf_tail_bound(a, b), truth * (1.0 - 1e-14)) << a << ' ' << b;
    }
}

namespace {

double abel_sum(double t_n, double dt, double gamma, double vconst = 1.0) {
    const auto n = static_cast<std::size_t>(std::llround(t_n / dt));
    std::vector<double> tg(n + 1), s(n + 1, 0.0);
    for (std::size_t k = 0; k <= n; ++k) tg[k] = dt * static_cast<double>(k);
    tg.back() = t_n;
    const auto w = singular_step_weights(t_n, tg, s, 0.0, gamma);
    double r = 0.0;
    for (double x : w) r += x * vconst;
    return r;
}

}  // namespace

TEST(SingularWeights, AbelIntegral) {
    const double t = 1.0;
    EXPECT_NEAR(abel_sum(t, 1e-3, 0.0) / std::sqrt(t / std::numbers::pi), 1.0, 1e-4);
}

TEST(SingularWeights, AbelIntegralWithDecay) {
    EXPECT_NEAR(abel_sum(2.0, 1e-3, 1.0), 0.477249868051820792799717362833, 1e-4);
}

TEST(SingularWeights, ZeroVelocity) {
    EXPECT_EQ(abel_sum(1.0, 1e-2, 0.3, 0.0), 0.0);
}

TEST(SingularWeights, LastPanelWeightScalesAsRootDt) {
    for (double dt : {1e-2, 1e-3, 1e-4}) {
        const std::vector<double> tg{1.0 - dt, 1.0}, s{0.0, 0.0};
        const auto w = singular_step_weights(1.0, tg, s, 0.0, 0.0);
        EXPECT_NEAR((w[0] + w[1]) / std::sqrt(dt / std::numbers::pi), 1.0, 1e-12);
    }
}

TEST(SingularWeights, ConvergenceOrder) {
    // smooth v and a moving source: compare against a fine reference
    auto run = [](double dt) {
        const double T = 1.0, gamma = 0.3;
        const auto n = static_cast<std::size_t>(std::llround(T / dt));
        std::vector<double> tg(n + 1), s(n + 1), v(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            tg[k] = dt * static_cast<double>(k);
            v[k] = -1.0 - 0.5 * std::sin(3.0 * tg[k]);
            s[k] = -tg[k] + 0.5 * (1.0 - std::cos(3.0 * tg[k])) / 3.0;
        }
        tg.back() = T;
        const auto w = singular_step_weights(T, tg, s, s.back(), gamma);
        double r = 0.0;
        for (std::size_t k = 0; k <= n; ++k) r += w[k] * v[k];
        return r;
    };
    const double ref = run(1.0 / 25600.0);
    const double e1 = std::abs(run(1.0 / 100.0) - ref), e2 = std::abs(run(1.0 / 200.0) - ref), e3 = std::abs(run(1.0 / 400.0) - ref);
    EXPECT_GE(std::log2(e1 / e2), 1.5);
    EXPECT_GE(std::log2(e2 / e3), 1.5);
}

TEST(SingularWeights, AbelConvergenceOrder) {
    const double exact = 0.477249868051820792799717362833;
    const double e1 = std::abs(abel_sum(2.0, 4e-2, 1.0) - exact), e2 = std::abs(abel_sum(2.0, 2e-2, 1.0) - exact);
    // the rule is exact for v = 1 and s = 0 up to the Gauss error in eta; anything at rounding level passes
    EXPECT_TRUE(e2 < 1e-13 || std::log2(e1 / e2) >= 1.5) << e1 << ' ' << e2;
}

TEST(SingularWeights, RejectsBadGrids) {
    EXPECT_THROW(singular_step_weights(1.0, {0.0, 0.6, 0.5, 1.0}, {0, 0, 0, 0}, 0.0, 0.0), GridError);
    EXPECT_THROW(singular_step_weights(1.0, {0.0, 0.5, 0.9}, {0, 0, 0}, 0.0, 0.0), GridError);
    EXPECT_THROW(singular_step_weights(1.0, {0.0, 1.0}, {0.0}, 0.0, 0.0), GridError);
}

TEST(GaussianConvolution, MatchesClosedForm) {
    // u0 = exp(-xi^2/4) convolved to t = 1 gives sqrt(1/2) exp(-x^2/8)
    const auto g = SpatialGrid::uniform(40.0, 0.02);
    const auto u0 = GridField::sample(g, [](double x) { return std::exp(-x * x / 4.0); });
    for (double x : {-3.0, -0.5, 0.0, 1.2, 6.0}) {
        const auto c = gaussian_convolution(u0, x, 1.0);
        EXPECT_NEAR(c.value, std::sqrt(0.5) * std::exp(-x * x / 8.0), 1e-6) << x;
        EXPECT_NEAR(c.d1, -x / 4.0 * std::sqrt(0.5) * std::exp(-x * x / 8.0), 1e-5) << x;
        EXPECT_LT(c.tail_bound, 1e-8);
    }
}
