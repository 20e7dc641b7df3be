#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fsoam {

using Engine = std::mt19937_64;

/// Independent, reproducible stream for (seed, stream index). Streams are
/// keyed by logical work units (chunks of blocks or samples), never by
/// thread, so results do not depend on how work is scheduled.
inline Engine make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x5eedf50aU};
    return Engine(seq);
}

/// Uniform double in (0, 1) from the top 53 bits.
inline double uniform_open(Engine& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal variates by Marsaglia's polar method. Keeps the spare
/// variate, so one instance must stay bound to one stream.
class StandardNormal {
public:
    double operator()(Engine& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0;
        double v = 0.0;
        double s = 0.0;
        do {
            u = 2.0 * uniform_open(rng) - 1.0;
            v = 2.0 * uniform_open(rng) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace fsoam
