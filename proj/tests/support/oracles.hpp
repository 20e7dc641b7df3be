#pragma once

// Reference computations for the test suites. Deliberately independent of
// the library's quadrature and root-finding code paths.

#include <cmath>
#include <functional>
#include <numbers>

namespace fsoam::testing {

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance eps.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps = 1e-13, int max_depth = 50) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, eps, max_depth);
}

inline double gaussian_density(double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

/// Gaussian tail mass beyond x by direct integration (tail beyond x + 40 is
/// below 1e-300).
inline double gaussian_tail(double x) {
    return adaptive_simpson(gaussian_density, x, x + 40.0, 1e-16);
}

/// Bisection for x with q(x) = p, q decreasing.
template <class Q>
double bisect_decreasing(Q&& q, double p, double lo = -40.0, double hi = 40.0) {
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (q(mid) > p) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace fsoam::testing
