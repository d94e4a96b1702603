#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stefan/error.hpp"

namespace stefan {

enum class Side { Left, Right };

/// Truncated front-attached grid on [-L, L].
///
/// Nodes are stored left to right with x = 0 appearing twice: index
/// zero_left() holds the left limit and zero_right() = zero_left() + 1 the
/// right limit. Each side needs at least three nodes.
class SpatialGrid {
public:
    /// Uniform grid with spacing dx; L must be a multiple of dx up to rounding.
    static std::shared_ptr<const SpatialGrid> uniform(double L, double dx) {
        if (!(L > 0.0) || !(dx > 0.0) || !std::isfinite(L) || !std::isfinite(dx))
            throw GridError("uniform grid: need L > 0 and dx > 0");
        const double cells = L / dx;
        const long n = std::lround(cells);
        if (n < 2) throw GridError("uniform grid: fewer than 3 nodes per side");
        if (std::abs(cells - static_cast<double>(n)) > 1e-9 * cells)
            throw GridError("uniform grid: L must be an integer multiple of dx");
        std::vector<double> left(static_cast<std::size_t>(n) + 1), right(static_cast<std::size_t>(n) + 1);
        for (long i = 0; i <= n; ++i) {
            left[static_cast<std::size_t>(i)] = -L + dx * static_cast<double>(i);
            right[static_cast<std::size_t>(i)] = dx * static_cast<double>(i);
        }
        left.back() = 0.0;
        right.back() = L;
        left.front() = -L;
        auto g = build(std::move(left), std::move(right));
        g->dx_ = dx;
        return g;
    }

    /// Arbitrary grid; left must end at 0, right must start at 0, both strictly increasing.
    static std::shared_ptr<const SpatialGrid> from_sides(std::vector<double> left, std::vector<double> right) {
        return build(std::move(left), std::move(right));
    }

    std::size_t size() const noexcept { return x_.size(); }
    const std::vector<double>& x() const noexcept { return x_; }
    double x(std::size_t i) const { return x_[i]; }
    std::size_t zero_left() const noexcept { return n_left_ - 1; }
    std::size_t zero_right() const noexcept { return n_left_; }
    /// Nodes on the left side including 0.
    std::size_t n_minus() const noexcept { return n_left_; }
    std::size_t n_plus() const noexcept { return x_.size() - n_left_; }
    /// Half length; min of the two sides for asymmetric grids.
    double L() const noexcept { return std::min(L_minus_, L_plus_); }
    /// Spacing for uniform grids, 0 otherwise.
    double dx() const noexcept { return dx_; }
    bool is_uniform() const noexcept { return dx_ > 0.0; }
    Side side(std::size_t i) const noexcept { return i < n_left_ ? Side::Left : Side::Right; }

    /// Trapezoid weights; the two sides are integrated separately and added.
    std::vector<double> trapezoid_weights() const {
        std::vector<double> w(x_.size(), 0.0);
        auto side_weights = [&](std::size_t a, std::size_t b) {
            for (std::size_t i = a; i + 1 < b; ++i) {
                const double h = x_[i + 1] - x_[i];
                w[i] += 0.5 * h;
                w[i + 1] += 0.5 * h;
            }
        };
        side_weights(0, n_left_);
        side_weights(n_left_, x_.size());
        return w;
    }

    /// Enforces the truncation rule L >= 10/alpha.
    void require_weight_resolved(double alpha) const {
        if (alpha > 0.0 && L() * alpha < 10.0 * (1.0 - 1e-12))
            throw GridError("grid half length " + std::to_string(L()) + " is below 10/alpha = " + std::to_string(10.0 / alpha));
    }

private:
    SpatialGrid() = default;

    static std::shared_ptr<SpatialGrid> build(std::vector<double> left, std::vector<double> right) {
        if (left.size() < 3 || right.size() < 3) throw GridError("grid: need at least 3 nodes per side");
        if (left.back() != 0.0 || right.front() != 0.0) throw GridError("grid: x = 0 must close the left side and open the right side");
        for (std::size_t i = 1; i < left.size(); ++i)
            if (!(left[i] > left[i - 1])) throw GridError("grid: left nodes not strictly increasing");
        for (std::size_t i = 1; i < right.size(); ++i)
            if (!(right[i] > right[i - 1])) throw GridError("grid: right nodes not strictly increasing");
        auto g = std::shared_ptr<SpatialGrid>(new SpatialGrid());
        g->n_left_ = left.size();
        g->x_ = std::move(left);
        g->x_.insert(g->x_.end(), right.begin(), right.end());
        g->L_minus_ = -g->x_.front();
        g->L_plus_ = g->x_.back();
        return g;
    }

    std::vector<double> x_;
    std::size_t n_left_ = 0;
    double L_minus_ = 0.0, L_plus_ = 0.0, dx_ = 0.0;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

/// Samples of a profile on a SpatialGrid, with separate left/right values at 0.
class GridField {
public:
    static constexpr double kContinuityTol = 1e-10;

    GridField() = default;

    /// Continuous field; rejects non-finite values and a jump at 0.
    GridField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), u_(std::move(values)) {
        validate();
        if (std::abs(u_[grid_->zero_left()] - u_[grid_->zero_right()]) > kContinuityTol * std::max(1.0, std::abs(u_[grid_->zero_left()])))
            throw GridError("field is discontinuous at x = 0");
    }

    /// Field allowed to jump at 0 (derivatives).
    static GridField with_jump(GridPtr grid, std::vector<double> values) {
        GridField f;
        f.grid_ = std::move(grid);
        f.u_ = std::move(values);
        f.validate();
        return f;
    }

    static GridField zeros(GridPtr grid) {
        const std::size_t n = grid->size();
        return GridField(std::move(grid), std::vector<double>(n, 0.0));
    }

    /// Samples f(x, side); side distinguishes the two limits at 0.
    static GridField sample(GridPtr grid, const std::function<double(double, Side)>& f) {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->x(i), grid->side(i));
        return GridField(std::move(grid), std::move(v));
    }

    static GridField sample(GridPtr grid, const std::function<double(double)>& f) {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->x(i));
        return GridField(std::move(grid), std::move(v));
    }

    const SpatialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return u_; }
    std::size_t size() const noexcept { return u_.size(); }
    double operator[](std::size_t i) const { return u_[i]; }
    double at_zero() const { return 0.5 * (u_[grid_->zero_left()] + u_[grid_->zero_right()]); }

    /// Piecewise-linear evaluation on the side containing x (left side for x = 0).
    double interpolate(double x) const {
        const auto& xs = grid_->x();
        std::size_t a = 0, b = grid_->n_minus();
        if (x > 0.0) {
            a = grid_->zero_right();
            b = xs.size();
        }
        if (x <= xs[a]) return u_[a];
        if (x >= xs[b - 1]) return u_[b - 1];
        const auto it = std::upper_bound(xs.begin() + static_cast<long>(a), xs.begin() + static_cast<long>(b), x);
        const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
        const double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
        return (1.0 - t) * u_[k] + t * u_[k + 1];
    }

    GridField scaled(double c) const {
        std::vector<double> v(u_);
        for (double& y : v) y *= c;
        return with_jump(grid_, std::move(v));
    }

    GridField plus(const GridField& o, double c = 1.0) const {
        require_same_grid(o);
        std::vector<double> v(u_);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += c * o.u_[i];
        return with_jump(grid_, std::move(v));
    }

    void require_same_grid(const GridField& o) const {
        if (grid_ != o.grid_ && (grid_->x() != o.grid_->x())) throw GridError("fields live on different grids");
    }

private:
    void validate() const {
        if (!grid_) throw GridError("field has no grid");
        if (u_.size() != grid_->size())
            throw GridError("field has " + std::to_string(u_.size()) + " values for " + std::to_string(grid_->size()) + " nodes");
        for (double y : u_)
            if (!std::isfinite(y)) throw GridError("field has a non-finite value");
    }

    GridPtr grid_;
    std::vector<double> u_;
};

struct WeightSpec {
    double alpha = 0.0;
};

/// sup over nodes of e^{alpha |x|} |f(x)|.
inline double c_alpha_norm(const GridField& f, WeightSpec w) {
    f.grid().require_weight_resolved(w.alpha);
    const auto& x = f.grid().x();
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::exp(w.alpha * std::abs(x[i])) * std::abs(f[i]));
    return m;
}

/// (integral of e^{2 beta |x|} f^2)^{1/2}, trapezoid on each side.
inline double h_beta_norm(const GridField& f, WeightSpec w) {
    f.grid().require_weight_resolved(w.alpha);
    const auto& x = f.grid().x();
    const auto wt = f.grid().trapezoid_weights();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double y = std::exp(w.alpha * std::abs(x[i])) * f[i];
        s += wt[i] * y * y;
    }
    return std::sqrt(s);
}

struct EmbeddingReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Checks ||f||_beta <= |f|_alpha / sqrt(alpha - beta).
inline EmbeddingReport embedding_check(const GridField& f, double alpha, double beta) {
    if (!(beta < alpha)) throw ParameterError("embedding_check: need beta < alpha");
    if (beta < 0.0) throw ParameterError("embedding_check: need beta >= 0");
    EmbeddingReport r;
    r.lhs = h_beta_norm(f, {beta});
    r.rhs = c_alpha_norm(f, {alpha}) / std::sqrt(alpha - beta);
    r.holds = r.lhs <= r.rhs + 1e-8;
    return r;
}

struct DerivativeResult {
    GridField derivative;
    /// right slope minus left slope at x = 0
    double jump_at_zero = 0.0;
};

namespace detail {

// Second-order derivative of f on nodes [a, b) of one side.
inline void side_derivative(const std::vector<double>& x, const std::vector<double>& f, std::size_t a, std::size_t b,
                            std::vector<double>& out) {
    auto three_point = [&](std::size_t i0, std::size_t i1, std::size_t i2, std::size_t at) {
        const double x0 = x[i0], x1 = x[i1], x2 = x[i2], xa = x[at];
        const double l0 = ((xa - x1) + (xa - x2)) / ((x0 - x1) * (x0 - x2));
        const double l1 = ((xa - x0) + (xa - x2)) / ((x1 - x0) * (x1 - x2));
        const double l2 = ((xa - x0) + (xa - x1)) / ((x2 - x0) * (x2 - x1));
        return l0 * f[i0] + l1 * f[i1] + l2 * f[i2];
    };
    out[a] = three_point(a, a + 1, a + 2, a);
    for (std::size_t i = a + 1; i + 1 < b; ++i) out[i] = three_point(i - 1, i, i + 1, i);
    out[b - 1] = three_point(b - 3, b - 2, b - 1, b - 1);
}

}  // namespace detail

/// Central differences inside each side, one-sided second-order at 0 and at +-L.
inline DerivativeResult derivative_field(const GridField& f) {
    const auto& g = f.grid();
    if (g.n_minus() < 3 || g.n_plus() < 3) throw GridError("derivative_field: need 3 nodes per side");
    std::vector<double> d(f.size());
    detail::side_derivative(g.x(), f.values(), 0, g.n_minus(), d);
    detail::side_derivative(g.x(), f.values(), g.zero_right(), g.size(), d);
    const double jump = d[g.zero_right()] - d[g.zero_left()];
    return {GridField::with_jump(f.grid_ptr(), std::move(d)), jump};
}

/// Unweighted trapezoid L2 inner product.
inline double l2_inner(const GridField& a, const GridField& b) {
    a.require_same_grid(b);
    const auto w = a.grid().trapezoid_weights();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
}

inline double sup_norm(const GridField& f) {
    double m = 0.0;
    for (double y : f.values()) m = std::max(m, std::abs(y));
    return m;
}

inline double min_value(const GridField& f) { return *std::min_element(f.values().begin(), f.values().end()); }

}  // namespace stefan
