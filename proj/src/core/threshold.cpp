#include "threshold.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "error.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace bbq {

void ThresholdOptions::validate() const
{
    if (!(target_wer > 0.0 && target_wer < 1.0))
        throw Error(ErrorCode::Config, "threshold: target WER must lie in (0, 1)");
    if (!(step > 0.0) || !(tol > 0.0))
        throw Error(ErrorCode::Config, "threshold: step and tol must be positive");
    if (!(p_min >= 0.0 && p_min < p_max && p_max <= 1.0 && start >= p_min && start <= p_max))
        throw Error(ErrorCode::Config, "threshold: need 0 <= p_min <= start <= p_max <= 1");
    if (max_evals < 2)
        throw Error(ErrorCode::Config, "threshold: max_evals must be at least 2");
    if (bootstrap_iters < 1)
        throw Error(ErrorCode::Config, "threshold: bootstrap iterations must be at least 1");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw Error(ErrorCode::Config, "threshold: confidence must lie in (0, 1)");
}

const WerPoint& CachedEvaluator::operator()(double p)
{
    const auto key = quantize_p(p);
    if (auto it = cache_.find(key); it != cache_.end())
        return trace_[it->second];
    trace_.push_back(fn_(dequantize_p(key)));
    cache_.emplace(key, trace_.size() - 1);
    return trace_.back();
}

namespace {

double grid_point(double start, double step, long i)
{
    return dequantize_p(quantize_p(start + static_cast<double>(i) * step));
}

double interpolate(double p_lo, double w_lo, double p_hi, double w_hi, double target)
{
    return p_lo + (target - w_lo) * (p_hi - p_lo) / (w_hi - w_lo);
}

}  // namespace

Bracket bracket_upward(CachedEvaluator& eval, const ThresholdOptions& opts)
{
    opts.validate();
    const double target = opts.target_wer;
    const double eps = 1e-12;
    auto in_range = [&](double p) { return p >= opts.p_min - eps && p <= opts.p_max + eps; };
    auto budget_left = [&](double p) { return eval.contains(p) || eval.evaluations() < opts.max_evals; };

    WerPoint prev = eval(grid_point(opts.start, opts.step, 0));
    const long dir = prev.wer <= target ? 1 : -1;
    for (long i = 1;; ++i) {
        const double p = grid_point(opts.start, opts.step, dir * i);
        if (!in_range(p))
            throw Error(ErrorCode::NoCrossing, "no WER crossing of " + std::to_string(target) + " inside [" +
                                                   std::to_string(opts.p_min) + ", " + std::to_string(opts.p_max) +
                                                   "]");
        if (!budget_left(p))
            throw Error(ErrorCode::NoCrossing, "evaluation budget exhausted before the WER crossing was bracketed");
        WerPoint cur = eval(p);
        if (dir > 0 && cur.wer > target)
            return {std::move(prev), std::move(cur)};
        if (dir < 0 && cur.wer <= target)
            return {std::move(cur), std::move(prev)};
        prev = std::move(cur);
    }
}

BootstrapCi bootstrap_pstar_ci(const WerPoint& lo, const WerPoint& hi, const ThresholdOptions& opts,
                               std::uint64_t seed)
{
    opts.validate();
    if (lo.shots == 0 || hi.shots == 0 || !(lo.p < hi.p))
        throw Error(ErrorCode::Config, "bootstrap_pstar_ci: need two evaluated points with p_lo < p_hi");
    const double target = opts.target_wer;
    Rng rng(seed);
    std::vector<double> samples;
    samples.reserve(opts.bootstrap_iters);
    BootstrapCi out;
    for (std::size_t it = 0; it < opts.bootstrap_iters; ++it) {
        const double w_lo = resample_rate(rng, lo.shots, lo.wer);
        const double w_hi = resample_rate(rng, hi.shots, hi.wer);
        double p;
        if (w_lo <= target && target <= w_hi && w_lo < w_hi) {
            p = interpolate(lo.p, w_lo, hi.p, w_hi, target);
        } else {
            ++out.clamps;
            if (target < std::min(w_lo, w_hi))
                p = lo.p;
            else if (target > std::max(w_lo, w_hi))
                p = hi.p;
            else
                p = 0.5 * (lo.p + hi.p);
        }
        samples.push_back(std::clamp(p, lo.p, hi.p));
    }
    const double alpha = 1.0 - opts.confidence;
    out.lo = percentile(samples, alpha / 2.0);
    out.hi = percentile(samples, 1.0 - alpha / 2.0);
    return out;
}

ThresholdResult illinois_refine(CachedEvaluator& eval, Bracket bracket, const ThresholdOptions& opts)
{
    opts.validate();
    const double target = opts.target_wer;
    if (!(bracket.lo.p < bracket.hi.p && bracket.lo.wer <= target && bracket.hi.wer > target))
        throw Error(ErrorCode::Config, "illinois_refine: invalid bracket");

    ThresholdResult out;
    out.target_wer = target;
    double g_lo = bracket.lo.wer - target;
    double g_hi = bracket.hi.wer - target;
    int retained = 0;  // +1: lo endpoint kept last step, -1: hi kept

    while (true) {
        if (bracket.hi.p - bracket.lo.p < opts.tol) {
            out.reached_tol = true;
            break;
        }
        if (bracket.lo.wer == target)
            break;
        if (eval.evaluations() >= opts.max_evals)
            break;
        if (g_hi == g_lo) {
            out.degenerate = true;
            break;
        }
        const double c = dequantize_p(quantize_p(bracket.lo.p - g_lo * (bracket.hi.p - bracket.lo.p) / (g_hi - g_lo)));
        if (!(c > bracket.lo.p && c < bracket.hi.p))
            break;  // no representable interior point left
        WerPoint pc = eval(c);
        const double gc = pc.wer - target;
        if (gc <= 0.0) {
            bracket.lo = std::move(pc);
            g_lo = gc;
            if (retained == -1)
                g_hi /= 2.0;
            retained = -1;
        } else {
            bracket.hi = std::move(pc);
            g_hi = gc;
            if (retained == +1)
                g_lo /= 2.0;
            retained = +1;
        }
    }

    if (out.degenerate || bracket.hi.wer == bracket.lo.wer)
        out.p_star = 0.5 * (bracket.lo.p + bracket.hi.p);
    else
        out.p_star = interpolate(bracket.lo.p, bracket.lo.wer, bracket.hi.p, bracket.hi.wer, target);
    out.p_star = std::clamp(out.p_star, bracket.lo.p, bracket.hi.p);
    out.ci_lo = out.ci_hi = out.p_star;
    out.bracket = std::move(bracket);
    out.evaluations = eval.trace();
    return out;
}

ThresholdResult find_threshold(const WerEvaluator& fn, const ThresholdOptions& opts, std::uint64_t bootstrap_seed)
{
    CachedEvaluator eval(fn);
    const Bracket bracket = bracket_upward(eval, opts);
    ThresholdResult out = illinois_refine(eval, bracket, opts);
    const BootstrapCi ci = bootstrap_pstar_ci(out.bracket.lo, out.bracket.hi, opts, bootstrap_seed);
    // Percentile bounds of a skewed resample can miss the point estimate by a
    // hair; the reported interval always contains it.
    out.ci_lo = std::min(ci.lo, out.p_star);
    out.ci_hi = std::max(ci.hi, out.p_star);
    out.bootstrap_clamps = ci.clamps;
    return out;
}

}  // namespace bbq
