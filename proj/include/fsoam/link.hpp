#pragma once

// Subcarrier M-PSK over the faded IM/DD channel: conditional and
// fading-averaged bit error rate, and the high-SNR capacity upper bound.

#include <bit>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fsoam/errors.hpp"
#include "fsoam/numerics.hpp"
#include "fsoam/turbulence.hpp"
#include "fsoam/units.hpp"

namespace fsoam {

/// Physical constituents of the average electrical SNR.
struct PhysicalLink {
    double mu = 0.0;    ///< modulation index, 0 < mu < 1
    double eta = 0.0;   ///< optical-to-electrical efficiency
    double p_opt = 0.0; ///< average optical power [W]
    double e_s = 0.0;   ///< symbol energy E_g / 2
    double n_o = 0.0;   ///< noise spectral density
};

class LinkBudget {
public:
    static LinkBudget from_linear(double avg_snr) {
        if (!(avg_snr > 0.0) || !std::isfinite(avg_snr)) {
            throw ConfigError("average SNR must be positive and finite");
        }
        return LinkBudget(avg_snr);
    }

    static LinkBudget from_db(double snr_db) {
        if (!std::isfinite(snr_db)) throw ConfigError("SNR [dB] must be finite");
        return from_linear(db_to_linear(snr_db));
    }

    /// avg_snr = mu^2 eta^2 P^2 E_s / N_o.
    static LinkBudget from_physical(const PhysicalLink& phys) {
        if (!(phys.mu > 0.0 && phys.mu < 1.0)) {
            throw ConfigError("modulation index must lie in (0, 1)");
        }
        if (!(phys.eta > 0.0 && phys.p_opt > 0.0 && phys.e_s > 0.0 && phys.n_o > 0.0)) {
            throw ConfigError("eta, optical power, symbol energy and N_o must be positive");
        }
        LinkBudget b = from_linear(phys.mu * phys.mu * phys.eta * phys.eta * phys.p_opt *
                                   phys.p_opt * phys.e_s / phys.n_o);
        b.physical_ = phys;
        return b;
    }

    double avg_snr() const noexcept { return avg_snr_; }
    double snr_db() const { return linear_to_db(avg_snr_); }
    const std::optional<PhysicalLink>& physical() const noexcept { return physical_; }

    /// Instantaneous SNR gamma = avg_snr * I^2.
    double instantaneous_snr(double i) const noexcept { return avg_snr_ * i * i; }

private:
    explicit LinkBudget(double avg_snr) : avg_snr_(avg_snr) {}

    double avg_snr_;
    std::optional<PhysicalLink> physical_;
};

/// PSK constellation size M = 2^bits, M >= 2.
class ModOrder {
public:
    explicit ModOrder(unsigned m) : m_(m) {
        if (m < 2 || m > (1U << 30) || !std::has_single_bit(m)) {
            throw ConfigError("modulation order must be a power of two >= 2, got " +
                              std::to_string(m));
        }
    }

    /// M_j = 2^j.
    static ModOrder from_index(int j) {
        if (j < 1 || j > 30) throw ConfigError("modulation index j out of range");
        return ModOrder(1U << j);
    }

    unsigned m() const noexcept { return m_; }
    int bits() const noexcept { return std::countr_zero(m_); }

    friend bool operator==(const ModOrder&, const ModOrder&) = default;

private:
    unsigned m_;
};

/// P_b(M, I): exact for BPSK, Q(I sqrt(2 avg_snr)); for M > 2 the
/// nearest-neighbour Gray approximation (2/log2 M) Q(I sqrt(2 avg_snr) sin(pi/M)).
inline double ber_conditional(ModOrder m, double i, const LinkBudget& budget) {
    if (!(i > 0.0) || !std::isfinite(i)) {
        throw DomainError("ber_conditional: intensity must be positive and finite");
    }
    const double amplitude = i * std::sqrt(2.0 * budget.avg_snr());
    if (m.m() == 2) return q_function(amplitude);
    return (2.0 / m.bits()) * q_function(amplitude * std::sin(std::numbers::pi / m.m()));
}

/// Fading-averaged BER by Gauss-Hermite quadrature in the log-intensity
/// variable: ln I = log_mean + sqrt(2) log_std t.
template <FadingModel Model>
double ber_average(ModOrder m, const Model& model, const LinkBudget& budget,
                   int hermite_order = kDefaultHermiteOrder) {
    const LogNormalLaw law = model.law();
    const QuadratureRule rule = hermite_rule(hermite_order);
    const double scale = std::numbers::sqrt2 * law.log_std;
    const double sum = rule.apply([&](double t) {
        return ber_conditional(m, std::exp(law.log_mean + scale * t), budget);
    });
    return sum / std::sqrt(std::numbers::pi);
}

/// Same average by the composite Legendre panel integrator; the
/// cross-check route for ber_average.
template <FadingModel Model>
double ber_average_panels(ModOrder m, const Model& model, const LinkBudget& budget) {
    const LogNormalLaw law = model.law();
    return integrate_truncated_normal([&](double i) { return ber_conditional(m, i, budget); },
                                      0.0, INFINITY, law.log_mean, law.log_std)
        .value;
}

/// (W/2) E{ log2(avg_snr I^2 / e) }, integrated numerically.
template <FadingModel Model>
double capacity_upper_numeric(const Model& model, const LinkBudget& budget, double bandwidth) {
    if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
    const LogNormalLaw law = model.law();
    const double g = budget.avg_snr();
    const auto integrand = [&](double i) {
        return 0.5 * bandwidth * std::log2(g * i * i / std::numbers::e);
    };
    return integrate_truncated_normal(integrand, 0.0, INFINITY, law.log_mean, law.log_std).value;
}

/// Closed form K1 + K2 with K1 = (W/2) log2(avg_snr/e) and
/// K2 = W E{ln I} / ln 2, i.e. -2 W sigma_x^2 / ln 2 for one path. For MIMO the
/// moment-matched law gives E{ln I_T} = m_xi (an extrapolation, see
/// capacity_caveats).
template <FadingModel Model>
double capacity_upper_closed(const Model& model, const LinkBudget& budget, double bandwidth) {
    if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
    const double k1 = 0.5 * bandwidth * std::log2(budget.avg_snr() / std::numbers::e);
    const double k2 = bandwidth * model.law().log_mean / std::numbers::ln2;
    return k1 + k2;
}

/// Capacity bound is not trusted below this average SNR.
inline constexpr double kCapacityMinSnrDb = 10.0;

/// Human-readable caveats attached to a capacity evaluation.
template <FadingModel Model>
std::vector<std::string> capacity_caveats(const Model& model, const LinkBudget& budget) {
    std::vector<std::string> notes;
    if (budget.snr_db() < kCapacityMinSnrDb) {
        notes.emplace_back("average SNR below 10 dB: high-SNR capacity bound is loose");
    }
    if constexpr (std::same_as<Model, MimoConfig>) {
        if (model.paths() > 1) {
            notes.emplace_back("MIMO capacity bound extrapolated from the moment-matched lognormal law");
        }
    }
    return notes;
}

} // namespace fsoam
