#pragma once

// Special functions and quadrature rules used by the link and adaptation
// models: the Gaussian Q-function and its inverse, Gauss-Hermite and
// Gauss-Legendre rules, and a region-restricted lognormal expectation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fsoam/errors.hpp"

namespace fsoam {

/// Hermite order used for full-range fading averages. 128 nodes keep the
/// Hermite route within 1e-9 of the panel integrator for sigma_x <= 0.5.
inline constexpr int kDefaultHermiteOrder = 128;

/// Log-domain truncation of infinite limits, in standard deviations.
inline constexpr double kLogTruncation = 10.0;

// ---------------------------------------------------------------------------
// Q-function
// ---------------------------------------------------------------------------

/// Gaussian tail probability Q(x) = P(Z > x), Z ~ N(0,1).
inline double q_function(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("q_function: argument must be finite");
    }
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

namespace detail {

// Q(x) accepting +-infinity; used where region limits sit at 0 or +inf.
inline double q_extended(double x) {
    if (std::isnan(x)) {
        throw DomainError("q_function: NaN argument");
    }
    if (x == -INFINITY) return 1.0;
    if (x == INFINITY) return 0.0;
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

inline double standard_normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599343819;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

} // namespace detail

/// Inverse of q_function: returns x with Q(x) = p.
///
/// Newton iteration on ln Q(x) - ln p, which stays well conditioned deep in
/// the upper tail, inside a shrinking bisection bracket.
inline double inverse_q(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("inverse_q: probability must lie in (0, 1)");
    }
    if (p == 0.5) return 0.0;

    // Rational starting point (Hastings), accurate to ~4.5e-4.
    const double tail = std::min(p, 1.0 - p);
    const double t = std::sqrt(-2.0 * std::log(tail));
    double x = t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                       (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));
    if (p > 0.5) x = -x;

    double lo = -39.0; // Q(lo) = 1 > p
    double hi = 39.0;  // Q(hi) < smallest double > p
    const double log_p = std::log(p);

    for (int iter = 0; iter < 200; ++iter) {
        const double q = detail::q_extended(x);
        const double residual = std::log(q) - log_p;
        if (residual == 0.0) return x;
        // ln Q is decreasing: positive residual means x is too small.
        if (residual > 0.0) lo = x; else hi = x;

        const double step = residual * q / detail::standard_normal_pdf(x);
        double next = x + step;
        if (!std::isfinite(next) || next <= lo || next >= hi) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Quadrature rules
// ---------------------------------------------------------------------------

enum class QuadratureKind { hermite, legendre };

/// Immutable Gaussian quadrature rule. Hermite rules integrate against
/// e^{-t^2} on the real line; Legendre rules against 1 on [-1, 1].
class QuadratureRule {
public:
    QuadratureRule(QuadratureKind kind, std::vector<double> nodes, std::vector<double> weights)
        : kind_(kind), nodes_(std::move(nodes)), weights_(std::move(weights)) {}

    QuadratureKind kind() const noexcept { return kind_; }
    int order() const noexcept { return static_cast<int>(nodes_.size()); }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Sum of w_i f(t_i).
    template <class F>
    double apply(F&& f) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            sum += weights_[i] * f(nodes_[i]);
        }
        return sum;
    }

private:
    QuadratureKind kind_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Physicists' Gauss-Hermite rule (weight e^{-t^2}), 2 <= order <= 128.
inline QuadratureRule gauss_hermite(int order) {
    if (order < 2 || order > 128) {
        throw ConfigError("gauss_hermite: order must be in [2, 128], got " + std::to_string(order));
    }
    const int n = order;
    const int half = (n + 1) / 2;
    const double pi_m4 = std::pow(std::numbers::pi, -0.25);
    std::vector<double> roots(static_cast<std::size_t>(half));
    std::vector<double> w(static_cast<std::size_t>(half));

    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        // Asymptotic guesses for the largest roots, then extrapolate inward.
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * roots[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * roots[1];
        } else {
            z = 2.0 * z - roots[static_cast<std::size_t>(i - 2)];
        }

        double derivative = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Orthonormal Hermite recurrence.
            double p1 = pi_m4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            derivative = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / derivative;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        roots[static_cast<std::size_t>(i)] = z;
        w[static_cast<std::size_t>(i)] = 2.0 / (derivative * derivative);
    }

    std::vector<double> nodes(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int i = 0; i < half; ++i) {
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        nodes[lo] = -roots[lo];
        nodes[hi] = roots[lo];
        weights[lo] = w[lo];
        weights[hi] = w[lo];
    }
    if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return QuadratureRule(QuadratureKind::hermite, std::move(nodes), std::move(weights));
}

/// Gauss-Legendre rule on [-1, 1], 2 <= order <= 128.
inline QuadratureRule gauss_legendre(int order) {
    if (order < 2 || order > 128) {
        throw ConfigError("gauss_legendre: order must be in [2, 128], got " + std::to_string(order));
    }
    const int n = order;
    std::vector<double> nodes(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double derivative = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            derivative = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / derivative;
            z -= dz;
            if (std::abs(dz) <= 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * derivative * derivative);
        nodes[static_cast<std::size_t>(i)] = -z;
        nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return QuadratureRule(QuadratureKind::legendre, std::move(nodes), std::move(weights));
}

namespace detail {

inline const QuadratureRule& default_hermite_rule() {
    static const QuadratureRule rule = gauss_hermite(kDefaultHermiteOrder);
    return rule;
}

inline const QuadratureRule& panel_legendre_rule() {
    static const QuadratureRule rule = gauss_legendre(20);
    return rule;
}

inline constexpr double kPanelWidth = 0.25;

} // namespace detail

/// Returns the cached default-order rule when possible.
inline QuadratureRule hermite_rule(int order) {
    if (order == kDefaultHermiteOrder) return detail::default_hermite_rule();
    return gauss_hermite(order);
}

// ---------------------------------------------------------------------------
// Region-restricted lognormal expectation
// ---------------------------------------------------------------------------

struct RegionIntegral {
    double value = 0.0;
    /// Set when a negative lower limit was clamped to zero.
    bool lower_clamped = false;
};

/// Integrates f(I) against the density of I = exp(mean + std * U), U ~ N(0,1),
/// over lo <= I <= hi. Works in u-space with composite 20-point
/// Gauss-Legendre panels no wider than 0.25; u is truncated to
/// [-10, 10] (hi = +inf maps to u = 10, lo = 0 to u = -10).
template <class F>
RegionIntegral integrate_truncated_normal(F&& f, double lo, double hi, double mean, double std) {
    if (!(std > 0.0) || !std::isfinite(std) || !std::isfinite(mean)) {
        throw DomainError("integrate_truncated_normal: log-domain mean/std invalid");
    }
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
        throw EmptyRegionError("integrate_truncated_normal: empty region (lo >= hi)");
    }
    RegionIntegral result;
    if (lo < 0.0) {
        lo = 0.0;
        result.lower_clamped = true;
    }
    const double u_lo = lo == 0.0 ? -kLogTruncation
                                  : std::max((std::log(lo) - mean) / std, -kLogTruncation);
    const double u_hi = std::isinf(hi) ? kLogTruncation
                                       : std::min((std::log(hi) - mean) / std, kLogTruncation);
    if (!(u_lo < u_hi)) return result;

    const auto& rule = detail::panel_legendre_rule();
    const auto panels = static_cast<int>(std::ceil((u_hi - u_lo) / detail::kPanelWidth));
    const double width = (u_hi - u_lo) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = u_lo + k * width;
        const double mid = a + 0.5 * width;
        const double half = 0.5 * width;
        total += half * rule.apply([&](double t) {
            const double u = mid + half * t;
            return f(std::exp(mean + std * u)) * detail::standard_normal_pdf(u);
        });
    }
    result.value = total;
    return result;
}

} // namespace fsoam
