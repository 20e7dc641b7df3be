#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <numeric>

#include "fsoam/simulator.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace fsoam;

namespace {

SimConfig fixed_config(unsigned m, double sigma, double snr_db, std::uint64_t blocks, std::uint64_t k,
                       std::uint64_t seed, unsigned workers = 0) {
    return SimConfig{.blocks = blocks, .symbols_per_block = k, .seed = seed,
                     .mode = FixedOrderMode{ModOrder(m)}, .channel = TurbulenceParams(sigma),
                     .budget = LinkBudget::from_db(snr_db), .workers = workers};
}

} // namespace

TEST_CASE("Gray labelling", "[simulator][gray]") {
    for (unsigned k = 0; k < 1024; ++k) CHECK(gray_decode(gray_encode(k)) == k);
    for (unsigned m : {2U, 4U, 8U, 16U, 32U}) {
        for (unsigned p = 0; p < m; ++p) {
            const unsigned next = (p + 1) % m;
            CHECK(std::popcount(gray_encode(p) ^ gray_encode(next)) == 1);
        }
    }
}

TEST_CASE("PskModem: every point detects as itself", "[simulator][modem]") {
    for (unsigned m : {2U, 4U, 8U, 16U, 32U}) {
        const detail::PskModem modem{ModOrder(m)};
        for (unsigned p = 0; p < m; ++p) {
            CHECK(modem.detect(modem.re(p), modem.im(p)) == p);
            CHECK_THAT(std::hypot(modem.re(p), modem.im(p)), WithinAbs(1.0, 1e-15));
        }
    }
}

TEST_CASE("run: report bookkeeping", "[simulator][run]") {
    const auto scheme = compute_boundaries(5, 1e-3, LinkBudget::from_db(12.0));
    const SimConfig cfg{.blocks = 50'000, .symbols_per_block = 3, .seed = 9,
                        .mode = AdaptiveMode{scheme}, .channel = TurbulenceParams(0.5),
                        .budget = scheme.budget(), .workers = 2};
    const SimReport r = run(cfg);
    CHECK(r.blocks == 50'000);
    CHECK(r.symbols == 150'000);
    REQUIRE(r.per_region_histogram.size() == 6);
    CHECK(std::accumulate(r.per_region_histogram.begin(), r.per_region_histogram.end(), std::uint64_t{0}) == r.blocks);
    CHECK(r.per_region_histogram[0] == r.outage_blocks);
    CHECK(r.outage_blocks > 0);
    std::uint64_t bits = 0;
    for (std::size_t j = 1; j < r.per_region_histogram.size(); ++j) bits += j * 3 * r.per_region_histogram[j];
    CHECK(bits == r.bits_sent);
    CHECK(r.bit_errors <= r.bits_sent);
    CHECK(r.outage_fraction == static_cast<double>(r.outage_blocks) / r.blocks);
    CHECK(r.throughput_bits_per_symbol == static_cast<double>(r.bits_sent) / r.symbols);
}

TEST_CASE("run: deterministic and independent of worker count", "[simulator][run]") {
    const auto scheme = compute_boundaries(5, 1e-3, LinkBudget::from_db(15.0));
    SimConfig cfg{.blocks = 10'000, .symbols_per_block = 7, .seed = 42, .mode = AdaptiveMode{scheme},
                  .channel = MimoConfig(0.3, 2, 2), .budget = scheme.budget(), .workers = 1};
    const SimReport a = run(cfg);
    cfg.workers = 4;
    const SimReport b = run(cfg);
    CHECK(a == b);
    CHECK(run(cfg) == b);
    cfg.seed = 43;
    CHECK_FALSE(run(cfg) == b);
}

TEST_CASE("run: guard rail and config errors", "[simulator][run]") {
    auto cfg = fixed_config(2, 0.3, 10.0, 1, 1, 1);
    cfg.blocks = 0;
    CHECK_THROWS_AS(run(cfg), ConfigError);
    cfg.blocks = 1;
    cfg.symbols_per_block = 0;
    CHECK_THROWS_AS(run(cfg), ConfigError);
    cfg.blocks = 100'000;
    cfg.symbols_per_block = 10'001;
    CHECK_THROWS_AS(run(cfg), ConfigError);
    cfg.symbols_per_block = 10'000;
    CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("run: noiseless limit gives no errors", "[simulator][run]") {
    for (unsigned m : {2U, 8U, 32U}) {
        const SimReport r = run(fixed_config(m, 1e-9, 200.0, 2'000, 50, 3));
        CHECK(r.bit_errors == 0);
        CHECK(r.bits_sent == 2'000ULL * 50 * std::countr_zero(m));
    }
}

TEST_CASE("run: BPSK without fading matches Q(sqrt(2 snr))", "[simulator][run][mc]") {
    // Linear SNR for which Q(sqrt(2 snr)) = 1e-2.
    const double snr = 2.70594721552717054621;
    REQUIRE_THAT(q_function(std::sqrt(2.0 * snr)), WithinRel(1e-2, 1e-12));
    const SimConfig cfg{.blocks = 1'000'000, .symbols_per_block = 10, .seed = 2718,
                        .mode = FixedOrderMode{ModOrder(2)}, .channel = TurbulenceParams(1e-9),
                        .budget = LinkBudget::from_linear(snr), .workers = 0};
    const SimReport r = run(cfg);
    CHECK(r.symbols == 10'000'000);
    CHECK(std::abs(r.ber_point - 1e-2) <= r.ber_ci95);
}

TEST_CASE("run: adaptive mode at 15 dB", "[simulator][run][mc]") {
    const TurbulenceParams t(0.3);
    const auto scheme = compute_boundaries(5, 1e-3, LinkBudget::from_db(15.0));
    const SimConfig cfg{.blocks = 10'000'000, .symbols_per_block = 1, .seed = 15,
                        .mode = AdaptiveMode{scheme}, .channel = t, .budget = scheme.budget(), .workers = 0};
    const SimReport r = run(cfg);
    CHECK(r.ber_point <= 1e-3 + r.ber_ci95);
    CHECK_THAT(r.throughput_bits_per_symbol / 2.0, WithinRel(spectral_efficiency(scheme, t), 0.02));
    CHECK_THAT(r.outage_fraction, WithinAbs(region_probabilities(scheme, t).outage, 1e-3));
}

TEST_CASE("binomial_half_width", "[simulator][ci]") {
    CHECK_THAT(binomial_half_width(0.5, 100), WithinRel(kZ95 * 0.05, 1e-15));
    CHECK(binomial_half_width(0.0, 100) == 0.0);
    CHECK(std::isinf(binomial_half_width(0.1, 0)));
}

TEST_CASE("validate_point: fixed BPSK passes", "[simulator][validate]") {
    const auto r = validate_point(10.0, TurbulenceParams(0.3), FixedTarget{ModOrder(2)}, 0.05);
    CHECK(r.status == ValidationStatus::pass);
    CHECK(r.quantity == "ber");
    CHECK_THAT(r.analytic, WithinRel(0.013183177789054009, 1e-9));
    CHECK(r.report);
    CHECK(r.symbols >= 100'000);
    CHECK(std::abs(r.signed_gap) <= 3.0 * r.half_width);
    CHECK(r.signed_gap == r.measured - r.analytic);

    const auto nofade = validate_point(linear_to_db(2.70594721552717054621), TurbulenceParams(1e-9),
                                       FixedTarget{ModOrder(2)}, 0.01);
    CHECK(nofade.status == ValidationStatus::pass);
    CHECK(nofade.half_width < 0.01 * nofade.analytic);
}

TEST_CASE("validate_point: adaptive SISO and MIMO", "[simulator][validate]") {
    const auto siso = validate_point(15.0, TurbulenceParams(0.3), AdaptiveTarget{5, 1e-3}, 0.02);
    CHECK(siso.status == ValidationStatus::pass);
    CHECK(siso.quantity == "spectral_efficiency");
    CHECK(siso.region_gaps.empty());

    ValidationOptions info;
    info.gating = false;
    const auto mimo = validate_point(15.0, MimoConfig(0.3, 2, 2), AdaptiveTarget{5, 1e-3}, 0.05, info);
    CHECK(mimo.status != ValidationStatus::fail);
    CHECK(mimo.status != ValidationStatus::inconclusive);
    CHECK(mimo.region_gaps.size() == 5);
}

TEST_CASE("validate_point: approximate 8-PSK formula reports a signed gap", "[simulator][validate]") {
    ValidationOptions info;
    info.gating = false;
    const auto r = validate_point(15.0, TurbulenceParams(0.1), FixedTarget{ModOrder(8)}, 0.05, info);
    CHECK(r.status != ValidationStatus::fail);
    CHECK(r.status != ValidationStatus::inconclusive);
    CHECK_THAT(r.analytic, WithinRel(0.00255602370145216, 1e-9));
    CHECK(r.signed_gap == r.measured - r.analytic);
}

TEST_CASE("validate_point: infeasible size is inconclusive", "[simulator][validate]") {
    const auto r = validate_point(25.0, TurbulenceParams(0.1), FixedTarget{ModOrder(2)}, 0.05);
    CHECK(r.status == ValidationStatus::inconclusive);
    CHECK_FALSE(r.report);
    CHECK(r.symbols > kMaxSimSymbols);
}

TEST_CASE("validate_point: tolerance must be positive", "[simulator][validate]") {
    CHECK_THROWS_AS(validate_point(10.0, TurbulenceParams(0.3), FixedTarget{ModOrder(2)}, 0.0), ConfigError);
    CHECK_THROWS_AS(validate_point(10.0, TurbulenceParams(0.3), AdaptiveTarget{}, -0.1), ConfigError);
}
