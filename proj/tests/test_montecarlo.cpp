#include <doctest.h>

#include <cmath>
#include <random>

#include "codes.hpp"
#include "error.hpp"
#include "montecarlo.hpp"
#include "rng.hpp"
#include "stats.hpp"

using namespace bbq;

TEST_CASE("wilson interval closed forms")
{
    const auto zero = wilson_interval(0, 100);
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi == doctest::Approx(0.0370).epsilon(0.01));

    const auto half = wilson_interval(50, 100);
    CHECK(half.lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(half.hi == doctest::Approx(0.5962).epsilon(1e-3));
    CHECK(half.lo + half.hi == doctest::Approx(1.0));

    const auto big = wilson_interval(75000, 100000);
    CHECK(big.lo == doctest::Approx(0.7473).epsilon(1e-4));
    CHECK(big.hi == doctest::Approx(0.7527).epsilon(1e-4));

    const auto all = wilson_interval(100, 100);
    CHECK(all.hi == 1.0);

    // center is pulled toward 1/2
    const auto low = wilson_interval(10, 100);
    CHECK((low.lo + low.hi) / 2 > 0.10);

    // wider at higher confidence
    const auto c99 = wilson_interval(30, 200, 0.99);
    const auto c95 = wilson_interval(30, 200, 0.95);
    CHECK(c99.lo < c95.lo);
    CHECK(c99.hi > c95.hi);
}

TEST_CASE("wilson interval covers the true rate")
{
    Rng rng(2026);
    for (double rate : {0.1, 0.5}) {
        const std::size_t shots = 1000;
        const int reps = 10000;
        std::binomial_distribution<std::size_t> draw(shots, rate);
        int covered = 0;
        for (int r = 0; r < reps; ++r) {
            const auto iv = wilson_interval(draw(rng), shots);
            covered += (iv.lo <= rate && rate <= iv.hi);
        }
        const double slack = 3 * std::sqrt(0.95 * 0.05 / reps);
        CHECK(static_cast<double>(covered) / reps >= 0.95 - slack);
    }
}

TEST_CASE("wilson interval brackets the point estimate")
{
    for (std::size_t s : {1u, 7u, 100u, 5000u})
        for (std::size_t f = 0; f <= s; f += std::max<std::size_t>(1, s / 13)) {
            const auto iv = wilson_interval(f, s);
            const double phat = static_cast<double>(f) / s;
            CHECK(iv.lo <= phat);
            CHECK(phat <= iv.hi);
            CHECK(iv.lo >= 0.0);
            CHECK(iv.hi <= 1.0);
        }
}

TEST_CASE("seed derivation")
{
    CHECK(derive_shot_seed(12345, 0, 0) == derive_shot_seed(12345, 0, 0));
    CHECK(derive_shot_seed(12345, 0, 0) != derive_shot_seed(12345, 0, 1));
    CHECK(derive_shot_seed(12345, 0, 0) != derive_shot_seed(12345, 1, 0));
    CHECK(derive_shot_seed(12345, 0, 0) != derive_shot_seed(12346, 0, 0));
    CHECK(derive_stage_seed(12345, "pstar-boot", "a") != derive_stage_seed(12345, "fss-boot", "a"));
    // SplitMix64 reference output for state 0
    CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);

    CHECK(quantize_p(0.37) == 370000000);
    CHECK(quantize_p(0.3700000000004) == 370000000);
    CHECK(point_id("bb-12x6", "bposd", 0.37, 100) == point_id("bb-12x6", "bposd", 0.3700000000001, 100));
    CHECK(point_id("bb-12x6", "bposd", 0.37, 100) != point_id("bb-12x6", "bposd", 0.37, 101));
    CHECK(point_id("bb-12x6", "bposd", 0.37, 100) != point_id("bb-18x9", "bposd", 0.37, 100));
}

TEST_CASE("decoder names")
{
    for (auto k : {DecoderKind::BpOsd, DecoderKind::MwpmUninformed, DecoderKind::MwpmErasure})
        CHECK(decoder_from_name(decoder_name(k)) == k);
    CHECK_THROWS_AS(decoder_from_name("mwpm"), Error);
}

TEST_CASE("p = 0 never fails")
{
    const auto gross = code_from_registry("bb-12x6");
    const auto toric = code_from_registry("toric-12");
    CHECK(estimate_wer(gross, {DecoderKind::BpOsd, {}}, 0.0, 200, 1).failures == 0);
    CHECK(estimate_wer(toric, {DecoderKind::MwpmUninformed, {}}, 0.0, 200, 1).failures == 0);
    CHECK(estimate_wer(toric, {DecoderKind::MwpmErasure, {}}, 0.0, 200, 1).failures == 0);
}

TEST_CASE("point fields")
{
    const auto gross = code_from_registry("bb-12x6");
    const auto pt = estimate_wer(gross, {}, 0.3, 1, 12345);
    CHECK(pt.shots == 1);
    CHECK(pt.failures <= 1);
    CHECK(pt.code_name == "bb-12x6");
    CHECK(pt.family == "bb");
    CHECK(pt.n == 144);
    CHECK(pt.k == 12);
    CHECK(pt.decoder == "bposd");
    CHECK(pt.point_seed == derive_point_seed(12345, point_id("bb-12x6", "bposd", 0.3, 1)));

    const auto pt2 = estimate_wer(gross, {}, 0.4, 300, 12345);
    CHECK(pt2.wer == static_cast<double>(pt2.failures) / 300);
    CHECK(pt2.wilson_lo <= pt2.wer);
    CHECK(pt2.wer <= pt2.wilson_hi);

    CHECK_THROWS_AS(estimate_wer(gross, {}, 0.4, 0, 1), Error);
    CHECK_THROWS_AS(estimate_wer(gross, {}, 1.4, 10, 1), Error);
    CHECK_THROWS_AS(estimate_wer(gross, {DecoderKind::MwpmErasure, {}}, 0.4, 10, 1), Error);
}

TEST_CASE("results do not depend on the thread count")
{
    const auto gross = code_from_registry("bb-12x6");
    const auto toric = code_from_registry("toric-12");
    const auto a1 = estimate_wer(gross, {}, 0.4, 240, 12345, 1);
    const auto a8 = estimate_wer(gross, {}, 0.4, 240, 12345, 8);
    CHECK(a1.failures == a8.failures);
    CHECK(a1.wer == a8.wer);
    const auto b1 = estimate_wer(toric, {DecoderKind::MwpmErasure, {}}, 0.45, 500, 7, 1);
    const auto b3 = estimate_wer(toric, {DecoderKind::MwpmErasure, {}}, 0.45, 500, 7, 3);
    CHECK(b1.failures == b3.failures);
    // and on the seed
    const auto c = estimate_wer(toric, {DecoderKind::MwpmErasure, {}}, 0.45, 500, 8, 1);
    CHECK(c.point_seed != b1.point_seed);
}

TEST_CASE("uninformed matching on the torus fails well above three quarters")
{
    // Each sector lands in one of four homology classes, so a blind guess fails
    // with 1 - (1/4)^2; at p = 0.3 the matching still carries a little signal.
    const auto toric = code_from_registry("toric-12");
    const DecoderSpec spec{DecoderKind::MwpmUninformed, {}};
    const auto mid = estimate_wer(toric, spec, 0.30, 2000, 12345);
    CHECK(mid.wer > 0.80);
    const auto high = estimate_wer(toric, spec, 0.60, 2000, 12345);
    CHECK(std::abs(high.wer - 15.0 / 16.0) < 0.02);
}

TEST_CASE("erasure-aware WER grows with p")
{
    const auto toric = code_from_registry("toric-8");
    const DecoderSpec spec{DecoderKind::MwpmErasure, {}};
    const auto lo = estimate_wer(toric, spec, 0.35, 3000, 3);
    const auto hi = estimate_wer(toric, spec, 0.50, 3000, 3);
    const double sigma = std::sqrt(lo.wer * (1 - lo.wer) / 3000 + hi.wer * (1 - hi.wer) / 3000);
    CHECK(hi.wer >= lo.wer - 3 * sigma);
    CHECK(hi.wer > lo.wer);
}

TEST_CASE("resampling helpers")
{
    CHECK(percentile({3.0, 1.0, 2.0}, 0.5) == 2.0);
    CHECK(percentile({1.0, 2.0}, 0.25) == doctest::Approx(1.25));
    CHECK(percentile({5.0}, 0.975) == 5.0);
    CHECK_THROWS_AS(percentile({}, 0.5), std::invalid_argument);
    Rng rng(1);
    CHECK(resample_rate(rng, 100, 0.0) == 0.0);
    CHECK(resample_rate(rng, 100, 1.0) == 1.0);
}
