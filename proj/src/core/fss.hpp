// Finite-size scaling: WER(p, n) ~ f((p - p_inf) * n^(1/nu)) with a cubic f,
// plus the linearized p*(n) = p_inf + c * n^(-1/nu) cross-check.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "montecarlo.hpp"

namespace bbq {

struct FssRow {
    std::size_t n = 0;
    double p = 0.0;
    double wer = 0.0;
    std::size_t shots = 0;
    std::size_t failures = 0;
};

using FssDataset = std::vector<FssRow>;
using SizePstar = std::map<std::size_t, double>;

struct FssOptions {
    double window = 0.06;
    double p_inf_lo = 0.40;
    double p_inf_hi = 0.55;
    double p_inf_step = 0.002;
    double nu_lo = 0.6;
    double nu_hi = 2.5;
    double nu_step = 0.02;
    std::size_t min_points_per_size = 4;
    std::size_t bootstrap_iters = 500;
    double confidence = 0.95;
    double max_skip_fraction = 0.10;
    unsigned threads = 1;
};

struct FssResult {
    double p_inf = 0.0;
    double nu = 0.0;
    std::array<double, 4> coeffs{};  ///< f(u) = c0 + c1 u + c2 u^2 + c3 u^3
    double rss = 0.0;
    double grid_rss = 0.0;           ///< best coarse-grid objective before refinement
    double window = 0.0;
    std::size_t points = 0;
    std::size_t sizes = 0;
    Interval ci_p_inf;
    Interval ci_nu;
    std::size_t bootstrap_done = 0;
    std::size_t bootstrap_skipped = 0;
    bool flagged = false;
    std::string flag_reason;
};

/// Rows with |p - p*(n)| < window. Throws Error(Config) when a size lacks a
/// p*, when fewer than two sizes remain, or when a size keeps fewer than
/// min_points_per_size rows.
FssDataset window_dataset(const FssDataset& data, const SizePstar& pstar, double window,
                          std::size_t min_points_per_size);

/// Unweighted RSS of the best cubic in u at fixed (p_inf, nu); coefficients
/// are written to `coeffs` when given.
double collapse_rss(const FssDataset& windowed, double p_inf, double nu, std::array<double, 4>* coeffs = nullptr);

/// Coarse grid over (p_inf, nu), then Nelder-Mead from the best grid point.
FssResult fit_collapse(const FssDataset& data, const SizePstar& pstar, const FssOptions& opts);

/// Parametric bootstrap: each iteration redraws every point's failures from
/// Binomial(shots, wer), refits, and the percentile intervals go into `fit`.
/// Iteration i uses the seed mix(seed, i), so threads do not change results.
void bootstrap_fss(FssResult& fit, const FssDataset& data, const SizePstar& pstar, const FssOptions& opts,
                   std::uint64_t seed);

struct SizeThreshold {
    double p_star = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct LinearFit {
    double p_inf = 0.0;  ///< intercept
    double c = 0.0;      ///< slope against n^(-1/nu)
    double se_p_inf = 0.0;
    double se_c = 0.0;
    Interval ci_p_inf;
    bool weighted = false;
};

/// Weighted least squares of p* against n^(-1/nu); sigma = CI half-width / z.
/// Falls back to equal weights when any half-width is zero. Needs >= 3 sizes.
LinearFit fit_linearized(const std::map<std::size_t, SizeThreshold>& pstars, double nu, double confidence = 0.95);

struct WindowFit {
    double window = 0.0;
    std::optional<FssResult> fit;
    std::string error;
};

struct WindowSensitivity {
    std::vector<WindowFit> fits;
    double spread = 0.0;  ///< max pairwise |delta p_inf| over feasible windows
};

WindowSensitivity window_sensitivity(const FssDataset& data, const SizePstar& pstar, const std::vector<double>& windows,
                                     const FssOptions& opts);

/// Synthetic dataset from a known scaling law. wer is clamped to [0, 1];
/// with shots_for_noise = 0 the rates are exact (shots recorded as 1e9).
FssDataset synthesize_fss(const std::vector<std::size_t>& sizes, const std::vector<double>& p_grid, double p_inf,
                          double nu, const std::array<double, 4>& coeffs, std::size_t shots_for_noise,
                          std::uint64_t seed);

/// p where the synthetic law crosses `target` for size n, by bisection on
/// u in [u_lo, u_hi] (f - target must change sign there).
double synthetic_pstar(std::size_t n, double p_inf, double nu, const std::array<double, 4>& coeffs, double target,
                       double u_lo, double u_hi);

}  // namespace bbq
