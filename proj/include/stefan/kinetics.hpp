#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stefan/error.hpp"

namespace stefan {

/// Kinetic law v = g(u) relating the front temperature to the front velocity.
///
/// g is negative, strictly decreasing and bounded: -V0 <= g(u) <= -v0 with
/// g(0) = -v0. Instances are immutable after construction and validated on a
/// 10^4-point audit grid over [0, 100]; a model that leaves the velocity band or
/// fails strict monotonicity there is rejected.
class KineticsModel {
public:
    enum class Family { Arrhenius, Table, Custom };

    /// g(u) = -V0 exp(-A / (u - u_inf)), u_inf < 0. v0 = V0 exp(A / u_inf) is derived.
    static KineticsModel arrhenius(double V0, double A, double u_inf) {
        if (!(V0 > 0.0) || !std::isfinite(V0)) throw ParameterError("arrhenius kinetics: V0 must be positive");
        if (!(A > 0.0) || !std::isfinite(A)) throw ParameterError("arrhenius kinetics: A must be positive");
        if (!(u_inf < 0.0) || !std::isfinite(u_inf)) throw ParameterError("arrhenius kinetics: u_inf must be negative");
        KineticsModel m;
        m.family_ = Family::Arrhenius;
        m.V0_ = V0;
        m.A_ = A;
        m.u_inf_ = u_inf;
        m.v0_ = V0 * std::exp(A / u_inf);
        const double w = std::max(A / 2.0, -u_inf);
        m.lip_g_ = V0 * A * std::exp(-A / w) / (w * w);
        m.finish();
        return m;
    }

    /// Monotone cubic (Fritsch-Carlson) interpolation of tabulated (u, g(u)).
    ///
    /// The first abscissa must be 0. Past the last node the law continues with a
    /// rational tail g_last - s*l*x/(l + x), x = u - u_last, s = |g'(u_last)|,
    /// l = tail_scale, so V0 = -g_last + s*l.
    static KineticsModel table(std::vector<double> u, std::vector<double> g, double tail_scale = 1.0) {
        if (u.size() != g.size() || u.size() < 2)
            throw ParameterError("table kinetics: need at least two (u, g) rows of equal length");
        if (u.front() != 0.0) throw ParameterError("table kinetics: first u must be 0");
        if (!(tail_scale > 0.0)) throw ParameterError("table kinetics: tail_scale must be positive");
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!std::isfinite(u[i]) || !std::isfinite(g[i])) throw ParameterError("table kinetics: non-finite entry");
            if (!(g[i] < 0.0)) throw ParameterError("table kinetics: g must be negative");
            if (i > 0 && !(u[i] > u[i - 1])) throw ParameterError("table kinetics: u must be strictly increasing");
            if (i > 0 && !(g[i] < g[i - 1])) throw ParameterError("table kinetics: g must be strictly decreasing");
        }
        auto t = std::make_shared<TableData>();
        t->u = std::move(u);
        t->g = std::move(g);
        t->tail_scale = tail_scale;
        t->build_slopes();

        KineticsModel m;
        m.family_ = Family::Table;
        m.table_ = std::move(t);
        m.v0_ = -m.table_->g.front();
        m.V0_ = -m.table_->g.back() + m.table_->tail_slope() * tail_scale;
        m.lip_g_ = m.table_->max_abs_slope();
        m.finish();
        return m;
    }

    /// User-supplied law. V0 is the asymptotic speed bound; v0 = -g(0).
    /// lip_g is the maximum of |g'| on the audit grid.
    static KineticsModel custom(std::function<double(double)> g, std::function<double(double)> g_prime, double V0) {
        if (!g || !g_prime) throw ParameterError("custom kinetics: g and g' are required");
        if (!(V0 > 0.0)) throw ParameterError("custom kinetics: V0 must be positive");
        KineticsModel m;
        m.family_ = Family::Custom;
        m.custom_ = std::make_shared<CustomData>(CustomData{std::move(g), std::move(g_prime)});
        m.V0_ = V0;
        m.v0_ = -m.custom_->g(0.0);
        if (!(m.v0_ > 0.0) || !(m.v0_ <= V0)) throw ParameterError("custom kinetics: need 0 < -g(0) <= V0");
        double lip = 0.0;
        for (int i = 0; i <= kAuditPoints; ++i) lip = std::max(lip, std::abs(m.custom_->g_prime(audit_u(i))));
        m.lip_g_ = lip;
        m.finish();
        return m;
    }

    Family family() const noexcept { return family_; }
    double V0() const noexcept { return V0_; }
    double v0() const noexcept { return v0_; }
    /// Activation energy; NaN unless Arrhenius.
    double A() const noexcept { return A_; }
    /// Temperature offset; NaN unless Arrhenius.
    double u_inf() const noexcept { return u_inf_; }
    double lip_g() const noexcept { return lip_g_; }
    double nu0() const noexcept { return nu0_; }
    /// True when the grid minimum of nu sits at V = -v0.
    bool nu0_at_endpoint() const noexcept { return nu0_at_endpoint_; }

    double g(double u) const {
        if (!(u >= 0.0)) throw DomainError("g(u): temperature must be >= 0, got " + std::to_string(u));
        return g_unchecked(u);
    }

    double g_prime(double u) const {
        if (!(u >= 0.0)) throw DomainError("g'(u): temperature must be >= 0, got " + std::to_string(u));
        switch (family_) {
            case Family::Arrhenius: {
                if (std::isinf(u)) return -0.0;
                const double w = u - u_inf_;
                return g_unchecked(u) * A_ / (w * w);
            }
            case Family::Table: return table_->derivative(u);
            case Family::Custom: return custom_->g_prime(u);
        }
        return 0.0;
    }

    /// Inverse kinetics u = g^{-1}(v) for v in [-V0, -v0].
    double g_inv(double v) const {
        v = checked_velocity(v, "g_inv");
        if (v == -v0_) return 0.0;
        switch (family_) {
            case Family::Arrhenius: {
                if (v == -V0_) return std::numeric_limits<double>::infinity();
                const double u = u_inf_ - A_ / std::log(-v / V0_);
                return std::max(u, 0.0);
            }
            case Family::Table:
                if (v <= table_->g.back()) return table_->tail_inverse(v);
                return bisect_inverse(v, table_->u.back());
            case Family::Custom: return bisect_inverse(v, 1.0);
        }
        return 0.0;
    }

    /// nu(V) = -(g^{-1})'(V) = -1/g'(g^{-1}(V)); defined on (-V0, -v0].
    double nu(double V) const {
        if (!(V > -V0_)) {
            if (V >= -V0_ * (1.0 + kRangeSlack))
                throw SingularityError("nu(V): g^{-1} has unbounded slope at V = -V0");
            throw RangeError("nu(V): velocity below -V0");
        }
        V = checked_velocity(V, "nu");
        if (family_ == Family::Arrhenius) {
            if (V == -v0_) return u_inf_ * u_inf_ / (A_ * v0_);
            const double w = -A_ / std::log(-V / V0_);
            return w * w / (A_ * (-V));
        }
        const double gp = g_prime(g_inv(V));
        if (!(gp < 0.0)) throw SingularityError("nu(V): g' vanishes at g^{-1}(V)");
        return -1.0 / gp;
    }

    static constexpr int kAuditPoints = 10000;
    static constexpr double kAuditUMax = 100.0;

private:
    static constexpr double kRangeSlack = 1e-13;

    struct TableData {
        std::vector<double> u, g, d;
        double tail_scale = 1.0;

        void build_slopes() {
            const std::size_t n = u.size();
            std::vector<double> h(n - 1), delta(n - 1);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                h[i] = u[i + 1] - u[i];
                delta[i] = (g[i + 1] - g[i]) / h[i];
            }
            d.assign(n, 0.0);
            if (n == 2) {
                d[0] = d[1] = delta[0];
                return;
            }
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }

        // Three-point end formula with the Fritsch-Carlson sign/size limits; falls
        // back to the secant when the limited value is not strictly decreasing.
        static double end_slope(double h0, double h1, double d0, double d1) {
            double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (s * d0 <= 0.0) s = d0;
            else if (d0 * d1 < 0.0 && std::abs(s) > 3 * std::abs(d0)) s = 3 * d0;
            return s < 0.0 ? s : d0;
        }

        std::size_t segment(double x) const {
            auto it = std::upper_bound(u.begin(), u.end(), x);
            std::size_t k = static_cast<std::size_t>(it - u.begin());
            return k == 0 ? 0 : std::min(k - 1, u.size() - 2);
        }

        double tail_slope() const { return -d.back(); }

        double value(double x) const {
            if (x >= u.back()) {
                const double y = x - u.back(), s = tail_slope(), l = tail_scale;
                if (std::isinf(y)) return g.back() - s * l;
                return g.back() - s * l * y / (l + y);
            }
            const std::size_t k = segment(x);
            const double h = u[k + 1] - u[k], t = (x - u[k]) / h;
            const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
            const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
            return h00 * g[k] + h10 * h * d[k] + h01 * g[k + 1] + h11 * h * d[k + 1];
        }

        double derivative(double x) const {
            if (x >= u.back()) {
                const double y = x - u.back(), l = tail_scale;
                if (std::isinf(y)) return -0.0;
                return -tail_slope() * l * l / ((l + y) * (l + y));
            }
            const std::size_t k = segment(x);
            const double h = u[k + 1] - u[k], t = (x - u[k]) / h;
            const double dh00 = 6 * t * t - 6 * t, dh10 = 3 * t * t - 4 * t + 1;
            const double dh01 = -6 * t * t + 6 * t, dh11 = 3 * t * t - 2 * t;
            return (dh00 * g[k] + dh01 * g[k + 1]) / h + dh10 * d[k] + dh11 * d[k + 1];
        }

        double tail_inverse(double v) const {
            const double r = g.back() - v, s = tail_slope(), l = tail_scale;
            if (r <= 0.0) return u.back();
            if (r >= s * l) return std::numeric_limits<double>::infinity();
            return u.back() + l * r / (s * l - r);
        }

        double max_abs_slope() const {
            double m = 0.0;
            for (std::size_t k = 0; k + 1 < u.size(); ++k)
                for (int i = 0; i <= 64; ++i) m = std::max(m, std::abs(derivative(u[k] + (u[k + 1] - u[k]) * i / 64.0)));
            return std::max(m, tail_slope());
        }
    };

    struct CustomData {
        std::function<double(double)> g;
        std::function<double(double)> g_prime;
    };

    KineticsModel() = default;

    static double audit_u(int i) { return kAuditUMax * i / kAuditPoints; }

    double g_unchecked(double u) const {
        switch (family_) {
            case Family::Arrhenius:
                if (std::isinf(u)) return -V0_;
                return -V0_ * std::exp(-A_ / (u - u_inf_));
            case Family::Table: return table_->value(u);
            case Family::Custom: return custom_->g(u);
        }
        return 0.0;
    }

    double checked_velocity(double v, const char* who) const {
        const double lo = -V0_, hi = -v0_;
        if (!(v >= lo * (1.0 + kRangeSlack)) || !(v <= hi * (1.0 - kRangeSlack)))
            throw RangeError(std::string(who) + ": velocity " + std::to_string(v) + " outside [-V0, -v0]");
        return std::clamp(v, lo, hi);
    }

    // Safeguarded bisection on [0, u_hi], u_hi doubled until it brackets v.
    double bisect_inverse(double v, double u_hi) const {
        double lo = 0.0, hi = std::max(u_hi, 1.0);
        int grow = 0;
        while (g_unchecked(hi) > v) {
            lo = hi;
            hi *= 2.0;
            if (++grow > 1100) return std::numeric_limits<double>::infinity();
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (g_unchecked(mid) > v) lo = mid;
            else hi = mid;
            if (hi - lo <= 1e-12 * std::max(1.0, lo) * 1e-3) break;
        }
        return 0.5 * (lo + hi);
    }

    void finish() {
        double prev = g_unchecked(0.0);
        if (prev != -v0_) throw ParameterError("kinetics: g(0) must equal -v0");
        for (int i = 1; i <= kAuditPoints; ++i) {
            const double gi = g_unchecked(audit_u(i));
            if (!(gi >= -V0_) || !(gi <= -v0_))
                throw ParameterError("kinetics: g leaves [-V0, -v0] at u = " + std::to_string(audit_u(i)));
            if (!(gi < prev))
                throw ParameterError("kinetics: g is not strictly decreasing near u = " + std::to_string(audit_u(i)));
            prev = gi;
        }
        if (!(v0_ < V0_)) throw ParameterError("kinetics: need v0 < V0");

        const double eps = 1e-3 * (V0_ - v0_);
        const double lo = -V0_ + eps, hi = -v0_;
        double best = std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i <= kAuditPoints; ++i) {
            const double V = (i == kAuditPoints) ? hi : lo + (hi - lo) * i / kAuditPoints;
            const double n = nu(V);
            if (n < best) {
                best = n;
                best_i = i;
            }
        }
        if (!(best > 0.0)) throw ParameterError("kinetics: nu must be positive");
        nu0_ = best;
        nu0_at_endpoint_ = (best_i == kAuditPoints);
    }

    Family family_ = Family::Arrhenius;
    double V0_ = std::numeric_limits<double>::quiet_NaN();
    double v0_ = std::numeric_limits<double>::quiet_NaN();
    double A_ = std::numeric_limits<double>::quiet_NaN();
    double u_inf_ = std::numeric_limits<double>::quiet_NaN();
    double lip_g_ = 0.0;
    double nu0_ = 0.0;
    bool nu0_at_endpoint_ = false;
    std::shared_ptr<const TableData> table_;
    std::shared_ptr<const CustomData> custom_;
};

inline double g_eval(const KineticsModel& m, double u) { return m.g(u); }
inline double g_inv(const KineticsModel& m, double v) { return m.g_inv(v); }
inline double nu_eval(const KineticsModel& m, double V) { return m.nu(V); }
inline double g_prime(const KineticsModel& m, double u) { return m.g_prime(u); }

inline const char* to_string(KineticsModel::Family f) {
    switch (f) {
        case KineticsModel::Family::Arrhenius: return "arrhenius";
        case KineticsModel::Family::Table: return "table";
        case KineticsModel::Family::Custom: return "custom";
    }
    return "?";
}

}  // namespace stefan
