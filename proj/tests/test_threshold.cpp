#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "threshold.hpp"

using namespace bbq;

namespace {

/// A noiseless evaluator reporting wer = f(p) at the given shot count.
WerEvaluator synthetic(std::function<double(double)> f, std::size_t shots = 1000000000, int* calls = nullptr)
{
    return [f = std::move(f), shots, calls](double p) {
        if (calls)
            ++*calls;
        WerPoint pt;
        pt.code_name = "synthetic";
        pt.decoder = "stub";
        pt.p = p;
        pt.shots = shots;
        pt.failures = static_cast<std::size_t>(std::llround(std::clamp(f(p), 0.0, 1.0) * static_cast<double>(shots)));
        pt.wer = static_cast<double>(pt.failures) / static_cast<double>(shots);
        return pt;
    };
}

double logistic(double p) { return 1.0 / (1.0 + std::exp(-(p - 0.45) / 0.02)); }

void check_invariants(const ThresholdResult& r, const ThresholdOptions& opts)
{
    CHECK(r.evaluations.size() <= opts.max_evals);
    CHECK(r.bracket.lo.wer <= r.target_wer);
    CHECK(r.bracket.hi.wer > r.target_wer);
    CHECK(r.bracket.lo.p <= r.p_star);
    CHECK(r.p_star <= r.bracket.hi.p);
    CHECK(r.ci_lo <= r.p_star);
    CHECK(r.p_star <= r.ci_hi);
}

}  // namespace

TEST_CASE("options validation")
{
    ThresholdOptions o;
    CHECK_NOTHROW(o.validate());
    auto bad = o;
    bad.target_wer = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = o;
    bad.step = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = o;
    bad.max_evals = 1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = o;
    bad.confidence = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("cached evaluator")
{
    int calls = 0;
    CachedEvaluator eval(synthetic([](double p) { return p; }, 1000, &calls));
    eval(0.3);
    eval(0.3 + 1e-12);
    eval(0.4);
    CHECK(calls == 2);
    CHECK(eval.evaluations() == 2);
    CHECK(eval.contains(0.4));
    CHECK_FALSE(eval.contains(0.41));
    CHECK(eval.trace()[1].p == 0.4);
}

TEST_CASE("bracketing")
{
    const ThresholdOptions opts;
    SUBCASE("wer = p - 0.30 brackets upward at (0.38, 0.42)")
    {
        CachedEvaluator eval(synthetic([](double p) { return p - 0.30; }));
        const auto b = bracket_upward(eval, opts);
        CHECK(b.lo.p == doctest::Approx(0.38));
        CHECK(b.hi.p == doctest::Approx(0.42));
        CHECK(eval.evaluations() == 2);
    }
    SUBCASE("wer = p starts above target and steps down")
    {
        CachedEvaluator eval(synthetic([](double p) { return p; }));
        const auto b = bracket_upward(eval, opts);
        // wer(p_lo) <= 0.10 < wer(p_hi)
        CHECK(b.lo.p == doctest::Approx(0.10));
        CHECK(b.hi.p == doctest::Approx(0.14));
        CHECK(eval.evaluations() == 8);
        // grid points are exact to 1e-9
        CHECK(b.lo.p == 0.1);
    }
    SUBCASE("no crossing in range")
    {
        CachedEvaluator low(synthetic([](double) { return 0.01; }));
        auto wide = opts;
        wide.max_evals = 100;
        try {
            bracket_upward(low, wide);
            FAIL("bracketed");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoCrossing);
        }
        CachedEvaluator high(synthetic([](double) { return 0.9; }));
        CHECK_THROWS_AS(bracket_upward(high, wide), Error);
    }
    SUBCASE("budget runs out first")
    {
        auto tight = opts;
        tight.max_evals = 3;
        CachedEvaluator eval(synthetic([](double p) { return p; }));
        try {
            bracket_upward(eval, tight);
            FAIL("bracketed");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoCrossing);
        }
        CHECK(eval.evaluations() == 3);
    }
}

TEST_CASE("linear wer: false position is exact")
{
    ThresholdOptions opts;
    opts.bootstrap_iters = 200;
    const auto r = find_threshold(synthetic([](double p) { return p; }), opts, 1);
    CHECK(r.p_star == doctest::Approx(0.10).epsilon(1e-9));
    check_invariants(r, opts);

    const auto s = find_threshold(synthetic([](double p) { return p - 0.30; }), opts, 1);
    CHECK(s.p_star == doctest::Approx(0.40).epsilon(1e-9));
    check_invariants(s, opts);

    // refine from a known bracket: one interpolation lands on the root
    CachedEvaluator eval(synthetic([](double p) { return p; }));
    Bracket b{eval(0.06), eval(0.14)};
    const auto ill = illinois_refine(eval, b, opts);
    CHECK(ill.p_star == doctest::Approx(0.10).epsilon(1e-9));
}

TEST_CASE("logistic wer: crossing within tolerance")
{
    const double truth = 0.45 + 0.02 * std::log(0.1 / 0.9);
    ThresholdOptions opts;
    opts.bootstrap_iters = 200;
    opts.max_evals = 30;
    const auto r = find_threshold(synthetic(logistic), opts, 5);
    CHECK(r.reached_tol);
    CHECK(std::abs(r.p_star - truth) < 5e-4);
    check_invariants(r, opts);

    // default budget of 10 also gets there for this curve
    ThresholdOptions dflt;
    dflt.bootstrap_iters = 200;
    const auto d = find_threshold(synthetic(logistic), dflt, 5);
    CHECK(d.evaluations.size() <= 10);
    CHECK(std::abs(d.p_star - truth) < 5e-4);
    check_invariants(d, dflt);
}

TEST_CASE("budget caps the refinement")
{
    ThresholdOptions opts;
    opts.bootstrap_iters = 100;
    opts.tol = 1e-12;
    opts.max_evals = 5;
    const auto r = find_threshold(synthetic([](double p) { return 0.1 + 5 * std::pow(p - 0.37, 3) + 0.5 * (p - 0.37); }),
                                  opts, 3);
    CHECK(r.evaluations.size() == 5);
    CHECK_FALSE(r.reached_tol);
    check_invariants(r, opts);
}

TEST_CASE("bootstrap")
{
    ThresholdOptions opts;
    WerPoint lo, hi;
    lo.p = 0.36;
    lo.shots = 20000;
    lo.failures = 1500;
    lo.wer = 0.075;
    hi.p = 0.38;
    hi.shots = 20000;
    hi.failures = 2600;
    hi.wer = 0.13;

    const auto a = bootstrap_pstar_ci(lo, hi, opts, 42);
    const auto b = bootstrap_pstar_ci(lo, hi, opts, 42);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
    CHECK(a.clamps == b.clamps);
    CHECK(a.lo < a.hi);
    const double point = 0.36 + 0.02 * (0.10 - 0.075) / (0.13 - 0.075);
    CHECK(a.lo < point);
    CHECK(point < a.hi);
    CHECK(a.lo >= 0.36);
    CHECK(a.hi <= 0.38);
    const auto c = bootstrap_pstar_ci(lo, hi, opts, 43);
    CHECK((c.lo != a.lo || c.hi != a.hi));

    // vanishing noise
    lo.shots = hi.shots = 100000000;
    lo.failures = 7500000;
    hi.failures = 13000000;
    const auto sharp = bootstrap_pstar_ci(lo, hi, opts, 42);
    CHECK(sharp.hi - sharp.lo < 2e-4);
    CHECK(sharp.clamps == 0);

    // endpoints hugging the target: some resamples fail to straddle and get clamped
    lo.shots = hi.shots = 1000;
    lo.failures = 99;
    lo.wer = 0.099;
    hi.failures = 101;
    hi.wer = 0.101;
    const auto loose = bootstrap_pstar_ci(lo, hi, opts, 42);
    CHECK(loose.clamps > 0);
    CHECK(loose.lo >= 0.36);
    CHECK(loose.hi <= 0.38);
}

TEST_CASE("find_threshold is deterministic for a fixed seed")
{
    ThresholdOptions opts;
    opts.bootstrap_iters = 500;
    // noisy stub: coarse shot count so the CI is non-trivial
    const auto fn = synthetic([](double p) { return 0.1 + 2.0 * (p - 0.37); }, 20000);
    const auto a = find_threshold(fn, opts, 9);
    const auto b = find_threshold(fn, opts, 9);
    CHECK(a.p_star == b.p_star);
    CHECK(a.ci_lo == b.ci_lo);
    CHECK(a.ci_hi == b.ci_hi);
    CHECK(a.ci_hi > a.ci_lo);
    check_invariants(a, opts);
}
