#pragma once

// Symbol-level Monte Carlo of the subcarrier PSK link over block fading.
//
// Per block: draw the exact fading level, pick the order (fixed, or by the
// adaptive thresholds with ideal channel knowledge), then for each of K
// symbols send a Gray-labelled M-PSK point through
//     r = sqrt(avg_snr) * I * s + n,   n ~ CN(0, 1)
// and detect the nearest phase. This normalization equals the physical
// model with gamma = avg_snr * I^2.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fsoam/adaptation.hpp"
#include "fsoam/errors.hpp"
#include "fsoam/link.hpp"
#include "fsoam/parallel.hpp"
#include "fsoam/random.hpp"
#include "fsoam/turbulence.hpp"

namespace fsoam {

struct FixedOrderMode {
    ModOrder order;
};

struct AdaptiveMode {
    AdaptiveScheme scheme;
};

using SimMode = std::variant<FixedOrderMode, AdaptiveMode>;

/// Upper limit on blocks * symbols_per_block.
inline constexpr std::uint64_t kMaxSimSymbols = 1'000'000'000ULL;
/// Blocks per RNG stream.
inline constexpr std::uint64_t kBlocksPerChunk = 1024;

struct SimConfig {
    std::uint64_t blocks = 1;
    std::uint64_t symbols_per_block = 1;
    std::uint64_t seed = 0;
    SimMode mode;
    Channel channel;
    LinkBudget budget;
    unsigned workers = 0;
};

struct SimReport {
    std::uint64_t blocks = 0;
    std::uint64_t symbols = 0;
    std::uint64_t bits_sent = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t outage_blocks = 0;
    double ber_point = 0.0;
    /// 95% normal-approximation binomial half-width at the observed BER.
    double ber_ci95 = 0.0;
    double throughput_bits_per_symbol = 0.0;
    double outage_fraction = 0.0;
    /// Blocks per region: [0] = no transmission, [j] = order 2^j.
    std::vector<std::uint64_t> per_region_histogram;

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

inline constexpr double kZ95 = 1.959963984540054;

/// 95% binomial half-width z sqrt(p(1-p)/n).
inline double binomial_half_width(double p, std::uint64_t n) {
    if (n == 0) return INFINITY;
    return kZ95 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

inline unsigned gray_encode(unsigned k) { return k ^ (k >> 1); }

inline unsigned gray_decode(unsigned g) {
    unsigned k = g;
    for (unsigned shift = 1; shift < 32; shift <<= 1) k ^= k >> shift;
    return k;
}

namespace detail {

struct Tally {
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
    std::uint64_t outage = 0;
    std::vector<std::uint64_t> histogram;
};

// Gray-labelled M-PSK at phases 2 pi k / M.
class PskModem {
public:
    explicit PskModem(ModOrder order) : m_(order.m()), re_(m_), im_(m_) {
        for (unsigned k = 0; k < m_; ++k) {
            const double phase = 2.0 * std::numbers::pi * k / m_;
            re_[k] = std::cos(phase);
            im_[k] = std::sin(phase);
        }
    }

    unsigned size() const noexcept { return m_; }
    double re(unsigned position) const { return re_[position]; }
    double im(unsigned position) const { return im_[position]; }

    /// Nearest constellation position for received sample (x, y).
    unsigned detect(double x, double y) const {
        if (m_ == 2) return x < 0.0 ? 1U : 0U;
        const double sector = std::atan2(y, x) * (m_ / (2.0 * std::numbers::pi));
        const auto k = static_cast<long long>(std::llround(sector));
        return static_cast<unsigned>(((k % m_) + m_) % m_);
    }

private:
    unsigned m_;
    std::vector<double> re_;
    std::vector<double> im_;
};

} // namespace detail

inline void validate(const SimConfig& cfg) {
    if (cfg.blocks < 1 || cfg.symbols_per_block < 1) {
        throw ConfigError("simulation needs at least one block and one symbol per block");
    }
    if (cfg.symbols_per_block > kMaxSimSymbols / cfg.blocks) {
        throw ConfigError("blocks * symbols_per_block exceeds the 1e9 symbol guard rail");
    }
}

/// Runs the configured simulation. The result is a pure function of the
/// config: work is split into fixed chunks with their own RNG streams and
/// merged by integer addition.
inline SimReport run(const SimConfig& cfg) {
    validate(cfg);
    const int max_index = std::visit(
        [](const auto& mode) {
            if constexpr (std::same_as<std::decay_t<decltype(mode)>, FixedOrderMode>) {
                return mode.order.bits();
            } else {
                return mode.scheme.n_orders();
            }
        },
        cfg.mode);

    std::vector<detail::PskModem> modems;
    for (int j = 1; j <= max_index; ++j) modems.emplace_back(ModOrder::from_index(j));

    const double amplitude = std::sqrt(cfg.budget.avg_snr());
    const double noise_std = std::sqrt(0.5);
    const std::uint64_t chunks = (cfg.blocks + kBlocksPerChunk - 1) / kBlocksPerChunk;
    std::vector<detail::Tally> tallies(chunks);

    parallel_for(chunks, cfg.workers, [&](std::size_t c) {
        Engine rng = make_stream(cfg.seed, c);
        StandardNormal normal;
        detail::Tally& t = tallies[c];
        t.histogram.assign(static_cast<std::size_t>(max_index) + 1, 0);
        const std::uint64_t begin = c * kBlocksPerChunk;
        const std::uint64_t end = std::min(cfg.blocks, begin + kBlocksPerChunk);
        for (std::uint64_t b = begin; b < end; ++b) {
            const double fade = std::visit([&](const auto& m) { return m.draw(rng, normal); },
                                           cfg.channel);
            int index = 0;
            if (const auto* fixed = std::get_if<FixedOrderMode>(&cfg.mode)) {
                index = fixed->order.bits();
            } else {
                const auto& scheme = std::get<AdaptiveMode>(cfg.mode).scheme;
                const auto order = select_order(scheme, fade);
                index = order ? order->bits() : 0;
            }
            ++t.histogram[static_cast<std::size_t>(index)];
            if (index == 0) {
                ++t.outage;
                continue;
            }
            const auto& modem = modems[static_cast<std::size_t>(index - 1)];
            const unsigned mask = modem.size() - 1;
            const double gain = amplitude * fade;
            for (std::uint64_t k = 0; k < cfg.symbols_per_block; ++k) {
                const auto label = static_cast<unsigned>(rng()) & mask;
                const unsigned position = gray_decode(label);
                const double x = gain * modem.re(position) + noise_std * normal(rng);
                const double y = gain * modem.im(position) + noise_std * normal(rng);
                const unsigned detected = gray_encode(modem.detect(x, y));
                t.errors += static_cast<std::uint64_t>(std::popcount(label ^ detected));
            }
            t.bits += static_cast<std::uint64_t>(index) * cfg.symbols_per_block;
        }
    });

    SimReport r;
    r.blocks = cfg.blocks;
    r.symbols = cfg.blocks * cfg.symbols_per_block;
    r.per_region_histogram.assign(static_cast<std::size_t>(max_index) + 1, 0);
    for (const auto& t : tallies) {
        r.bits_sent += t.bits;
        r.bit_errors += t.errors;
        r.outage_blocks += t.outage;
        for (std::size_t j = 0; j < t.histogram.size(); ++j) r.per_region_histogram[j] += t.histogram[j];
    }
    r.ber_point = r.bits_sent ? static_cast<double>(r.bit_errors) / r.bits_sent : 0.0;
    r.ber_ci95 = r.bits_sent ? binomial_half_width(r.ber_point, r.bits_sent) : INFINITY;
    r.throughput_bits_per_symbol = static_cast<double>(r.bits_sent) / r.symbols;
    r.outage_fraction = static_cast<double>(r.outage_blocks) / r.blocks;
    return r;
}

// ---------------------------------------------------------------------------
// Simulation vs analytics
// ---------------------------------------------------------------------------

enum class ValidationStatus { pass, fail, inconclusive, info };

inline const char* to_string(ValidationStatus s) {
    switch (s) {
        case ValidationStatus::pass: return "pass";
        case ValidationStatus::fail: return "fail";
        case ValidationStatus::inconclusive: return "inconclusive";
        case ValidationStatus::info: return "info";
    }
    return "?";
}

/// Fixed-order check: simulated BER against ber_average.
struct FixedTarget {
    ModOrder order;
};

/// Adaptive check: simulated throughput / 2 against spectral_efficiency and
/// simulated BER against the target.
struct AdaptiveTarget {
    int n_orders = 5;
    double target_ber = 1e-3;
};

using ValidationTarget = std::variant<FixedTarget, AdaptiveTarget>;

struct ValidationResult {
    ValidationStatus status = ValidationStatus::inconclusive;
    std::string quantity;      ///< "ber" or "spectral_efficiency"
    double analytic = 0.0;
    double measured = 0.0;
    double signed_gap = 0.0;   ///< measured - analytic
    double half_width = 0.0;   ///< 95% half-width used for the comparison
    std::uint64_t symbols = 0;
    std::optional<SimReport> report;
    /// MIMO only: simulated b_j (exact sum) minus lognormal-approximation b_j.
    std::vector<double> region_gaps;
    std::string message;
};

struct ValidationOptions {
    std::uint64_t seed = 1;
    std::uint64_t min_symbols = 100'000;
    unsigned workers = 0;
    /// When false a failed comparison is reported as `info` (used where the
    /// analytic model is a known approximation).
    bool gating = true;
};

/// Simulates one operating point sized so the 95% half-width is below
/// tolerance * analytic, then compares. Fixed order passes iff
/// |gap| <= 3 half-widths (half-width at the analytic BER); adaptive passes
/// iff the relative throughput gap is within tolerance and the simulated BER
/// is at most target + its own half-width.
inline ValidationResult validate_point(double snr_db, const Channel& channel,
                                       const ValidationTarget& target, double tolerance,
                                       const ValidationOptions& opt = {}) {
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
        throw ConfigError("validation tolerance must be positive");
    }
    const LinkBudget budget = LinkBudget::from_db(snr_db);
    ValidationResult res;
    SimConfig cfg{.blocks = 1, .symbols_per_block = 1, .seed = opt.seed,
                  .mode = FixedOrderMode{ModOrder(2)}, .channel = channel, .budget = budget,
                  .workers = opt.workers};

    const auto finish = [&](bool ok) {
        if (ok) res.status = ValidationStatus::pass;
        else res.status = opt.gating ? ValidationStatus::fail : ValidationStatus::info;
    };

    if (const auto* fixed = std::get_if<FixedTarget>(&target)) {
        res.quantity = "ber";
        const double p = std::visit([&](const auto& m) { return ber_average(fixed->order, m, budget); },
                                    channel);
        res.analytic = p;
        if (!(p > 0.0)) {
            res.message = "analytic BER underflows; nothing to measure";
            return res;
        }
        const double bits_needed = kZ95 * kZ95 * (1.0 - p) / (p * tolerance * tolerance);
        const double symbols = std::max(std::ceil(bits_needed / fixed->order.bits()),
                                        static_cast<double>(opt.min_symbols));
        if (symbols > static_cast<double>(kMaxSimSymbols)) {
            res.message = "required sample size exceeds the 1e9 symbol guard rail";
            res.symbols = static_cast<std::uint64_t>(std::min(symbols, 1e19));
            return res;
        }
        cfg.blocks = static_cast<std::uint64_t>(symbols);
        cfg.mode = FixedOrderMode{fixed->order};
        const SimReport rep = run(cfg);
        res.measured = rep.ber_point;
        res.signed_gap = rep.ber_point - p;
        res.half_width = binomial_half_width(p, rep.bits_sent);
        res.symbols = rep.symbols;
        res.report = rep;
        finish(std::abs(res.signed_gap) <= 3.0 * res.half_width);
        res.message = "BER sim vs analytic";
        return res;
    }

    const auto& adaptive = std::get<AdaptiveTarget>(target);
    res.quantity = "spectral_efficiency";
    const AdaptiveScheme scheme = compute_boundaries(adaptive.n_orders, adaptive.target_ber, budget);
    const double s = std::visit([&](const auto& m) { return spectral_efficiency(scheme, m); }, channel);
    const auto probs = std::visit([&](const auto& m) { return region_probabilities(scheme, m); }, channel);
    const auto ber = std::visit([&](const auto& m) { return average_ber_adaptive(scheme, m); }, channel);
    res.analytic = s;
    if (!(s > 0.0) || !ber) {
        res.message = "scheme is in outage; nothing to measure";
        return res;
    }
    // Bits per symbol has mean 2S; size so z * sd / sqrt(n) < tolerance * mean,
    // and aim for >= 100 expected bit errors.
    double second_moment = 0.0;
    for (std::size_t j = 0; j < probs.regions.size(); ++j) {
        const double bits = static_cast<double>(j + 1);
        second_moment += bits * bits * probs.regions[j];
    }
    const double mean_bits = 2.0 * s;
    const double variance = std::max(0.0, second_moment - mean_bits * mean_bits);
    const double for_throughput = kZ95 * kZ95 * variance / (tolerance * tolerance * mean_bits * mean_bits);
    const double for_errors = 100.0 / (*ber * mean_bits);
    const double symbols = std::max({std::ceil(for_throughput), std::ceil(for_errors),
                                     static_cast<double>(opt.min_symbols)});
    if (symbols > static_cast<double>(kMaxSimSymbols)) {
        res.message = "required sample size exceeds the 1e9 symbol guard rail";
        res.symbols = static_cast<std::uint64_t>(std::min(symbols, 1e19));
        return res;
    }
    cfg.blocks = static_cast<std::uint64_t>(symbols);
    cfg.mode = AdaptiveMode{scheme};
    const SimReport rep = run(cfg);
    res.measured = 0.5 * rep.throughput_bits_per_symbol;
    res.signed_gap = res.measured - s;
    res.half_width = kZ95 * std::sqrt(variance / static_cast<double>(rep.symbols)) / 2.0;
    res.symbols = rep.symbols;
    res.report = rep;

    if (std::holds_alternative<MimoConfig>(channel)) {
        for (std::size_t j = 0; j < probs.regions.size(); ++j) {
            const double simulated =
                static_cast<double>(rep.per_region_histogram[j + 1]) / static_cast<double>(rep.blocks);
            res.region_gaps.push_back(simulated - probs.regions[j]);
        }
    }
    const bool throughput_ok = std::abs(res.signed_gap) <= tolerance * s;
    const bool ber_ok = rep.ber_point <= adaptive.target_ber + rep.ber_ci95;
    finish(throughput_ok && ber_ok);
    res.message = std::string("throughput ") + (throughput_ok ? "ok" : "off") + ", BER " +
                  (ber_ok ? "within target" : "above target");
    return res;
}

} // namespace fsoam
