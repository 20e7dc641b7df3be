#pragma once

// BER-constrained adaptive modulation: for a target BER P_o the fading range
// is split at thresholds I_1 < ... < I_N < I_{N+1} = +inf, and M_j = 2^j is
// used while I_j <= I < I_{j+1}. Below I_1 nothing is sent.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fsoam/errors.hpp"
#include "fsoam/link.hpp"
#include "fsoam/numerics.hpp"
#include "fsoam/parallel.hpp"
#include "fsoam/turbulence.hpp"

namespace fsoam {

class AdaptiveScheme {
public:
    AdaptiveScheme(int requested_orders, double target_ber, std::vector<double> boundaries,
                   LinkBudget budget, std::vector<std::string> notes)
        : requested_orders_(requested_orders),
          target_ber_(target_ber),
          boundaries_(std::move(boundaries)),
          budget_(budget),
          notes_(std::move(notes)) {}

    /// Orders actually in use (after dropping infeasible ones).
    int n_orders() const noexcept { return static_cast<int>(boundaries_.size()) - 1; }
    int requested_orders() const noexcept { return requested_orders_; }
    double target_ber() const noexcept { return target_ber_; }
    const LinkBudget& budget() const noexcept { return budget_; }
    /// I_1 .. I_N followed by the +inf sentinel.
    const std::vector<double>& boundaries() const noexcept { return boundaries_; }
    /// Lower edge of region j (1-based).
    double boundary(int j) const { return boundaries_.at(static_cast<std::size_t>(j - 1)); }
    const std::vector<std::string>& notes() const noexcept { return notes_; }

private:
    int requested_orders_;
    double target_ber_;
    std::vector<double> boundaries_;
    LinkBudget budget_;
    std::vector<std::string> notes_;
};

/// Thresholds at which each order first meets the target:
///   I_1 = Q^-1(P_o) / sqrt(2 avg_snr)
///   I_j = Q^-1(j P_o / 2) / (sin(pi / 2^j) sqrt(2 avg_snr)),  j >= 2.
/// Orders whose threshold is undefined (j P_o / 2 >= 1) or not above the
/// previous one are dropped together with every larger order, and noted.
inline AdaptiveScheme compute_boundaries(int n, double p_o, const LinkBudget& budget) {
    if (n < 1 || n > 30) {
        throw ConfigError("number of modulation orders must lie in [1, 30]");
    }
    if (!(p_o > 0.0 && p_o <= 0.5)) {
        throw ConfigError("target BER must lie in (0, 0.5]");
    }
    const double scale = std::sqrt(1.0 / (2.0 * budget.avg_snr()));
    std::vector<double> bounds;
    std::vector<std::string> notes;
    bounds.push_back(scale * inverse_q(p_o));
    for (int j = 2; j <= n; ++j) {
        const double arg = 0.5 * j * p_o;
        if (arg >= 1.0) {
            notes.push_back("order " + std::to_string(1U << j) +
                            " dropped: target BER unreachable by threshold rule");
            break;
        }
        const double threshold =
            scale * inverse_q(arg) / std::sin(std::numbers::pi / static_cast<double>(1U << j));
        if (!(threshold > bounds.back())) {
            notes.push_back("order " + std::to_string(1U << j) +
                            " dropped: threshold not above the previous order's");
            break;
        }
        bounds.push_back(threshold);
    }
    if (static_cast<int>(bounds.size()) < n) {
        notes.push_back("using " + std::to_string(bounds.size()) + " of " + std::to_string(n) +
                        " orders");
    }
    bounds.push_back(INFINITY);
    return AdaptiveScheme(n, p_o, std::move(bounds), budget, std::move(notes));
}

/// Order for fading level i, or nullopt below I_1. Regions are
/// [I_j, I_{j+1}); a tie goes to the higher order.
inline std::optional<ModOrder> select_order(const AdaptiveScheme& scheme, double i) {
    const auto& b = scheme.boundaries();
    const auto region = std::upper_bound(b.begin(), b.end(), i) - b.begin();
    if (region == 0) return std::nullopt;
    return ModOrder::from_index(static_cast<int>(region));
}

struct RegionProbabilities {
    /// a_j (b_j for MIMO), j = 1..N, stored 0-based.
    std::vector<double> regions;
    /// Mass below I_1.
    double outage = 0.0;
};

template <FadingModel Model>
RegionProbabilities region_probabilities(const AdaptiveScheme& scheme, const Model& model) {
    const LogNormalLaw law = model.law();
    RegionProbabilities out;
    const auto& b = scheme.boundaries();
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
        out.regions.push_back(law.tail(b[j]) - law.tail(b[j + 1]));
    }
    out.outage = law.cumulative(b.front());
    return out;
}

/// S = sum_j Q(x_j) / 2 with x_j the standardized log-threshold.
template <FadingModel Model>
double spectral_efficiency(const AdaptiveScheme& scheme, const Model& model) {
    const LogNormalLaw law = model.law();
    double sum = 0.0;
    for (int j = 1; j <= scheme.n_orders(); ++j) sum += law.tail(scheme.boundary(j));
    return 0.5 * sum;
}

/// sum_j a_j log2 M_j  -  (sum_j Q(x_j) - N Q(x_{N+1})); zero up to rounding.
template <FadingModel Model>
double telescoping_residual(const AdaptiveScheme& scheme, const Model& model) {
    const LogNormalLaw law = model.law();
    const RegionProbabilities probs = region_probabilities(scheme, model);
    double bits = 0.0;
    double tails = 0.0;
    for (int j = 1; j <= scheme.n_orders(); ++j) {
        bits += j * probs.regions[static_cast<std::size_t>(j - 1)];
        tails += law.tail(scheme.boundary(j));
    }
    tails -= scheme.n_orders() * law.tail(scheme.boundaries().back());
    return bits - tails;
}

/// Transmission probability below which the adaptive BER is undefined.
inline constexpr double kMinTransmitProbability = 1e-12;

/// Average BER of the adaptive scheme: expected bit errors over expected
/// bits, region by region. nullopt when the link is (numerically) always in
/// outage.
template <FadingModel Model>
std::optional<double> average_ber_adaptive(const AdaptiveScheme& scheme, const Model& model) {
    const LogNormalLaw law = model.law();
    const RegionProbabilities probs = region_probabilities(scheme, model);
    if (law.tail(scheme.boundary(1)) < kMinTransmitProbability) return std::nullopt;

    double errors = 0.0;
    double bits = 0.0;
    for (int j = 1; j <= scheme.n_orders(); ++j) {
        const double lo = scheme.boundary(j);
        const double hi = scheme.boundary(j + 1);
        const ModOrder m = ModOrder::from_index(j);
        const auto integral = integrate_truncated_normal(
            [&](double i) { return ber_conditional(m, i, scheme.budget()); }, lo, hi,
            law.log_mean, law.log_std);
        errors += j * integral.value;
        bits += j * probs.regions[static_cast<std::size_t>(j - 1)];
    }
    return errors / bits;
}

struct PerfPoint {
    double snr_db = 0.0;
    double spectral_eff = 0.0;
    std::optional<double> avg_ber;
    double outage_prob = 0.0;
    std::vector<double> region_probs;
    std::vector<double> boundaries; ///< I_1..I_N (sentinel omitted)
    std::vector<std::string> notes;
    std::optional<std::string> error;
};

struct SchemeTemplate {
    int n_orders = 5;
    double target_ber = 1e-3;
};

template <FadingModel Model>
PerfPoint evaluate_point(const SchemeTemplate& tmpl, const Model& model, double snr_db) {
    PerfPoint p;
    p.snr_db = snr_db;
    try {
        const AdaptiveScheme scheme =
            compute_boundaries(tmpl.n_orders, tmpl.target_ber, LinkBudget::from_db(snr_db));
        const RegionProbabilities probs = region_probabilities(scheme, model);
        assert(std::abs(telescoping_residual(scheme, model)) <= 1e-12 * scheme.n_orders());
        p.spectral_eff = spectral_efficiency(scheme, model);
        p.avg_ber = average_ber_adaptive(scheme, model);
        p.outage_prob = probs.outage;
        p.region_probs = probs.regions;
        p.boundaries.assign(scheme.boundaries().begin(), scheme.boundaries().end() - 1);
        p.notes = scheme.notes();
        if (!p.avg_ber) p.notes.emplace_back("outage only: average BER undefined");
    } catch (const std::exception& e) {
        p.error = e.what();
    }
    return p;
}

/// Evaluates the scheme at every grid point (thresholds recomputed per
/// point). Grid points run in parallel; output order follows the grid.
template <FadingModel Model>
std::vector<PerfPoint> sweep(const SchemeTemplate& tmpl, const Model& model,
                             const std::vector<double>& snr_grid_db, unsigned workers = 0) {
    if (snr_grid_db.empty()) throw ConfigError("sweep: SNR grid is empty");
    if (!std::is_sorted(snr_grid_db.begin(), snr_grid_db.end())) {
        throw ConfigError("sweep: SNR grid must be sorted");
    }
    std::vector<PerfPoint> out(snr_grid_db.size());
    parallel_for(snr_grid_db.size(), workers,
                 [&](std::size_t k) { out[k] = evaluate_point(tmpl, model, snr_grid_db[k]); });
    return out;
}

// ---------------------------------------------------------------------------
// Operating-point search
// ---------------------------------------------------------------------------

/// Root of a nondecreasing function g on [lo, hi] by bisection; nullopt when
/// the bracket does not contain a sign change.
template <class G>
std::optional<double> bisect_increasing(G&& g, double lo, double hi, double tol = 1e-9) {
    double g_lo = g(lo);
    const double g_hi = g(hi);
    if (g_lo > 0.0 || g_hi < 0.0) return std::nullopt;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = g(mid);
        if (g_mid < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// SNR [dB] at which the adaptive scheme reaches spectral efficiency `level`.
template <FadingModel Model>
std::optional<double> snr_db_for_spectral_efficiency(const SchemeTemplate& tmpl, const Model& model,
                                                     double level, double lo_db = -30.0,
                                                     double hi_db = 90.0) {
    return bisect_increasing(
        [&](double db) {
            const auto s = compute_boundaries(tmpl.n_orders, tmpl.target_ber, LinkBudget::from_db(db));
            return spectral_efficiency(s, model) - level;
        },
        lo_db, hi_db);
}

/// SNR [dB] at which fixed-order transmission's average BER falls to `target`.
template <FadingModel Model>
std::optional<double> snr_db_for_fixed_ber(ModOrder m, const Model& model, double target,
                                           double lo_db = -30.0, double hi_db = 90.0) {
    return bisect_increasing(
        [&](double db) { return target - ber_average(m, model, LinkBudget::from_db(db)); }, lo_db,
        hi_db);
}

} // namespace fsoam
