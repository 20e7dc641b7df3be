#pragma once

// Lognormal turbulence-induced fading. A single optical path has
// I = exp(2x), x ~ N(-sigma_x^2, sigma_x^2), so E{I} = 1. For F x L
// apertures with equal gain combining the decision metric is the mean of the
// F*L independent path intensities; analytics replace it by a moment-matched
// lognormal, the sampler draws the exact mean.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fsoam/errors.hpp"
#include "fsoam/numerics.hpp"
#include "fsoam/parallel.hpp"
#include "fsoam/random.hpp"

namespace fsoam {

/// Law of ln I: ln I ~ N(log_mean, log_std^2).
struct LogNormalLaw {
    double log_mean = 0.0;
    double log_std = 1.0;

    /// Standardized log-intensity (ln i - log_mean) / log_std; 0 maps to -inf.
    double standardize(double i) const {
        if (i == 0.0) return -INFINITY;
        if (std::isinf(i)) return INFINITY;
        return (std::log(i) - log_mean) / log_std;
    }

    /// P(I >= i) for i in [0, +inf].
    double tail(double i) const { return detail::q_extended(standardize(i)); }

    double density(double i) const {
        const double z = (std::log(i) - log_mean) / log_std;
        return detail::standard_normal_pdf(z) / (i * log_std);
    }

    /// P(I < i) = Q(-z), accurate in the lower tail.
    double cumulative(double i) const { return detail::q_extended(-standardize(i)); }

    friend bool operator==(const LogNormalLaw&, const LogNormalLaw&) = default;
};

class TurbulenceParams {
public:
    explicit TurbulenceParams(double sigma_x) : sigma_x_(sigma_x) {
        if (!(sigma_x > 0.0 && sigma_x <= 1.0)) {
            throw ConfigError("sigma_x must lie in (0, 1] (lognormal regime), got " +
                              std::to_string(sigma_x));
        }
    }

    double sigma_x() const noexcept { return sigma_x_; }
    /// Log-amplitude mean, fixed to -sigma_x^2 for E{I} = 1.
    double m_x() const noexcept { return -(sigma_x_ * sigma_x_); }
    /// Unfaded intensity I_o.
    static constexpr double i_o() noexcept { return 1.0; }

    LogNormalLaw law() const noexcept { return {2.0 * m_x(), 2.0 * sigma_x_}; }

    /// One intensity draw exp(2x).
    double draw(Engine& rng, StandardNormal& normal) const {
        return std::exp(2.0 * (m_x() + sigma_x_ * normal(rng)));
    }

private:
    double sigma_x_;
};

/// F transmit and L receive apertures with repetition coding and EGC.
class MimoConfig {
public:
    MimoConfig(double sigma_x, int f_tx, int l_rx) : path_(sigma_x), f_tx_(f_tx), l_rx_(l_rx) {
        if (f_tx < 1 || l_rx < 1) {
            throw ConfigError("aperture counts F and L must be >= 1");
        }
        const int paths = f_tx * l_rx;
        if (paths == 1) {
            // Keeps the (1,1) law bit-identical to the single path.
            const double s = 2.0 * sigma_x;
            sigma_xi_sq_ = s * s;
            sigma_xi_ = s;
        } else {
            sigma_xi_sq_ = std::log1p(std::expm1(4.0 * sigma_x * sigma_x) / paths);
            sigma_xi_ = std::sqrt(sigma_xi_sq_);
        }
    }

    const TurbulenceParams& path() const noexcept { return path_; }
    double sigma_x() const noexcept { return path_.sigma_x(); }
    int f_tx() const noexcept { return f_tx_; }
    int l_rx() const noexcept { return l_rx_; }
    int paths() const noexcept { return f_tx_ * l_rx_; }
    double sigma_xi() const noexcept { return sigma_xi_; }
    double sigma_xi_sq() const noexcept { return sigma_xi_sq_; }
    double m_xi() const noexcept { return -sigma_xi_sq_ / 2.0; }

    /// Moment-matched lognormal approximation of I_T.
    LogNormalLaw law() const noexcept { return {m_xi(), sigma_xi_}; }

    /// Exact I_T: arithmetic mean of F*L independent path draws.
    double draw(Engine& rng, StandardNormal& normal) const {
        double sum = 0.0;
        for (int k = 0; k < paths(); ++k) sum += path_.draw(rng, normal);
        return sum / paths();
    }

private:
    TurbulenceParams path_;
    int f_tx_;
    int l_rx_;
    double sigma_xi_sq_ = 0.0;
    double sigma_xi_ = 0.0;
};

template <class T>
concept FadingModel = requires(const T& m, Engine& rng, StandardNormal& normal) {
    { m.law() } -> std::same_as<LogNormalLaw>;
    { m.draw(rng, normal) } -> std::same_as<double>;
    { m.sigma_x() } -> std::convertible_to<double>;
};

/// Runtime choice of fading model, for the CLI and simulator configs.
using Channel = std::variant<TurbulenceParams, MimoConfig>;

inline LogNormalLaw law_of(const Channel& channel) {
    return std::visit([](const auto& m) { return m.law(); }, channel);
}

/// Fading density of the (approximate, for MIMO) intensity law.
template <FadingModel Model>
double pdf(const Model& model, double i) {
    if (!(i > 0.0) || std::isnan(i)) {
        throw DomainError("pdf: intensity must be positive");
    }
    if (std::isinf(i)) return 0.0;
    return model.law().density(i);
}

/// F_I(i_th) = 1 - Q((ln i_th - log_mean) / log_std).
template <FadingModel Model>
double cdf(const Model& model, double i_th) {
    if (!(i_th > 0.0) || std::isnan(i_th)) {
        throw DomainError("cdf: threshold must be positive");
    }
    return model.law().cumulative(i_th);
}

inline constexpr std::size_t kSamplesPerStream = 1U << 16;

/// `count` exact fading draws, deterministic for a given seed and independent
/// of `workers`.
template <FadingModel Model>
std::vector<double> sample_fading(const Model& model, std::uint64_t seed, std::size_t count,
                                  unsigned workers = 0) {
    if (count < 1) {
        throw ConfigError("sample_fading: count must be >= 1");
    }
    std::vector<double> out(count);
    const std::size_t streams = (count + kSamplesPerStream - 1) / kSamplesPerStream;
    parallel_for(streams, workers, [&](std::size_t s) {
        Engine rng = make_stream(seed, s);
        StandardNormal normal;
        const std::size_t begin = s * kSamplesPerStream;
        const std::size_t end = std::min(count, begin + kSamplesPerStream);
        for (std::size_t k = begin; k < end; ++k) out[k] = model.draw(rng, normal);
    });
    return out;
}

} // namespace fsoam
