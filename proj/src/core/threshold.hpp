// Pseudo-threshold search: grid bracketing, Illinois regula falsi on
// g(p) = wer(p) - target, and a parametric bootstrap for the crossing.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "montecarlo.hpp"

namespace bbq {

struct ThresholdOptions {
    double target_wer = 0.10;
    double start = 0.38;
    double step = 0.04;
    double tol = 5e-4;
    std::size_t max_evals = 10;
    double p_min = 0.02;
    double p_max = 0.98;
    std::size_t bootstrap_iters = 5000;
    double confidence = 0.95;

    void validate() const;
};

using WerEvaluator = std::function<WerPoint(double p)>;

/// Memoises evaluations by quantized p and keeps them in call order.
class CachedEvaluator {
public:
    explicit CachedEvaluator(WerEvaluator fn) : fn_(std::move(fn)) {}

    const WerPoint& operator()(double p);
    bool contains(double p) const { return cache_.count(quantize_p(p)) != 0; }
    std::size_t evaluations() const { return trace_.size(); }
    const std::vector<WerPoint>& trace() const { return trace_; }

private:
    WerEvaluator fn_;
    std::map<std::int64_t, std::size_t> cache_;
    std::vector<WerPoint> trace_;
};

struct Bracket {
    WerPoint lo;  ///< wer <= target
    WerPoint hi;  ///< wer > target
};

/// Steps from opts.start by opts.step (downward if the first probe is already
/// above target). Grid points are rounded to 1e-9. Throws Error(NoCrossing)
/// when [p_min, p_max] or the evaluation budget runs out first.
Bracket bracket_upward(CachedEvaluator& eval, const ThresholdOptions& opts);

struct BootstrapCi {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t clamps = 0;  ///< resamples that did not straddle the target
};

/// Redraws Binomial(shots, wer) at both endpoints, interpolates the crossing,
/// and returns percentile bounds. Deterministic for a fixed seed.
BootstrapCi bootstrap_pstar_ci(const WerPoint& lo, const WerPoint& hi, const ThresholdOptions& opts,
                               std::uint64_t seed);

struct ThresholdResult {
    double p_star = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double target_wer = 0.10;
    std::vector<WerPoint> evaluations;
    Bracket bracket;
    bool degenerate = false;       ///< g_lo == g_hi; p_star is the midpoint
    bool reached_tol = false;      ///< stopped on bracket width rather than budget
    std::size_t bootstrap_clamps = 0;
};

/// Illinois false position inside `bracket`. Stops when the bracket is
/// narrower than tol or the evaluator has used max_evals in total. p_star is
/// the linear interpolant of the true WER values at the final bracket. The CI
/// fields are left equal to p_star; find_threshold fills them.
ThresholdResult illinois_refine(CachedEvaluator& eval, Bracket bracket, const ThresholdOptions& opts);

/// Full pipeline: bracket, refine, bootstrap.
ThresholdResult find_threshold(const WerEvaluator& fn, const ThresholdOptions& opts, std::uint64_t bootstrap_seed);

}  // namespace bbq
