#include "fss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "error.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace bbq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double z_value(double confidence)
{
    return boost::math::quantile(boost::math::normal(), 0.5 + confidence / 2.0);
}

double eval_poly(const std::array<double, 4>& c, double u)
{
    return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

struct NelderMeadResult {
    std::array<double, 2> x;
    double f;
};

// Plain Nelder-Mead on two parameters; deterministic for a given start.
template <class F>
NelderMeadResult nelder_mead(F&& objective, std::array<double, 2> start, std::array<double, 2> step)
{
    using Point = std::array<double, 2>;
    std::array<Point, 3> x{start, start, start};
    x[1][0] += step[0];
    x[2][1] += step[1];
    std::array<double, 3> f{};
    for (int i = 0; i < 3; ++i)
        f[i] = objective(x[i]);

    auto order = [&] {
        std::array<int, 3> idx{0, 1, 2};
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return f[a] < f[b]; });
        const auto xs = x;
        const auto fs = f;
        for (int i = 0; i < 3; ++i) {
            x[i] = xs[idx[i]];
            f[i] = fs[idx[i]];
        }
    };
    auto lerp = [](const Point& a, const Point& b, double t) {
        return Point{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    };

    for (int iter = 0; iter < 2000; ++iter) {
        order();
        const double size = std::max({std::abs(x[1][0] - x[0][0]), std::abs(x[2][0] - x[0][0]),
                                      std::abs(x[1][1] - x[0][1]), std::abs(x[2][1] - x[0][1])});
        if (size < 1e-10)
            break;
        const Point centroid{(x[0][0] + x[1][0]) / 2.0, (x[0][1] + x[1][1]) / 2.0};
        const Point xr = lerp(centroid, x[2], -1.0);
        const double fr = objective(xr);
        if (fr < f[0]) {
            const Point xe = lerp(centroid, x[2], -2.0);
            const double fe = objective(xe);
            if (fe < fr) {
                x[2] = xe;
                f[2] = fe;
            } else {
                x[2] = xr;
                f[2] = fr;
            }
        } else if (fr < f[1]) {
            x[2] = xr;
            f[2] = fr;
        } else {
            const bool outside = fr < f[2];
            const Point xc = outside ? lerp(centroid, xr, 0.5) : lerp(centroid, x[2], 0.5);
            const double fc = objective(xc);
            if (fc < (outside ? fr : f[2])) {
                x[2] = xc;
                f[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    x[i] = lerp(x[0], x[i], 0.5);
                    f[i] = objective(x[i]);
                }
            }
        }
    }
    order();
    return {x[0], f[0]};
}

}  // namespace

FssDataset window_dataset(const FssDataset& data, const SizePstar& pstar, double window,
                          std::size_t min_points_per_size)
{
    if (!(window > 0.0))
        throw Error(ErrorCode::Config, "fss: window must be positive");
    std::map<std::size_t, std::size_t> count;
    FssDataset out;
    for (const auto& row : data) {
        const auto it = pstar.find(row.n);
        if (it == pstar.end())
            throw Error(ErrorCode::Config, "fss: no per-size p* for n=" + std::to_string(row.n));
        if (std::abs(row.p - it->second) < window) {
            out.push_back(row);
            ++count[row.n];
        }
    }
    std::set<std::size_t> sizes;
    for (const auto& row : data)
        sizes.insert(row.n);
    if (sizes.size() < 2)
        throw Error(ErrorCode::Config, "fss: collapse needs at least two code sizes");
    for (auto n : sizes) {
        if (count[n] < min_points_per_size)
            throw Error(ErrorCode::Config, "fss: size n=" + std::to_string(n) + " has " + std::to_string(count[n]) +
                                               " points within the window, need " +
                                               std::to_string(min_points_per_size));
    }
    std::stable_sort(out.begin(), out.end(), [](const FssRow& a, const FssRow& b) { return a.n < b.n; });
    return out;
}

double collapse_rss(const FssDataset& windowed, double p_inf, double nu, std::array<double, 4>* coeffs)
{
    if (!(nu > 0.0) || windowed.size() < 4)
        return kInf;
    const std::size_t m = windowed.size();
    std::vector<double> u(m);
    double scale = 0.0;
    std::size_t last_n = 0;
    double factor = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (windowed[i].n != last_n) {
            last_n = windowed[i].n;
            factor = std::pow(static_cast<double>(last_n), 1.0 / nu);
        }
        u[i] = (windowed[i].p - p_inf) * factor;
        scale = std::max(scale, std::abs(u[i]));
    }
    if (!std::isfinite(scale))
        return kInf;
    if (scale == 0.0)
        scale = 1.0;

    // Normal equations in t = u / scale keep the 4x4 system well conditioned.
    Eigen::Matrix4d ata = Eigen::Matrix4d::Zero();
    Eigen::Vector4d atb = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < m; ++i) {
        const double t = u[i] / scale;
        const Eigen::Vector4d row(1.0, t, t * t, t * t * t);
        ata.noalias() += row * row.transpose();
        atb.noalias() += row * windowed[i].wer;
    }
    const Eigen::LDLT<Eigen::Matrix4d> ldlt(ata);
    if (ldlt.info() != Eigen::Success)
        return kInf;
    const Eigen::Vector4d b = ldlt.solve(atb);
    if (!b.allFinite())
        return kInf;

    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double t = u[i] / scale;
        const double r = windowed[i].wer - (b[0] + t * (b[1] + t * (b[2] + t * b[3])));
        rss += r * r;
    }
    if (coeffs != nullptr) {
        double s = 1.0;
        for (int k = 0; k < 4; ++k) {
            (*coeffs)[k] = b[k] / s;
            s *= scale;
        }
    }
    return rss;
}

namespace {

FssResult fit_windowed(const FssDataset& windowed, const FssOptions& opts)
{
    const auto steps = [](double lo, double hi, double step) {
        return static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    };
    const long np = steps(opts.p_inf_lo, opts.p_inf_hi, opts.p_inf_step);
    const long nn = steps(opts.nu_lo, opts.nu_hi, opts.nu_step);
    if (np < 1 || nn < 1)
        throw Error(ErrorCode::Config, "fss: empty search grid");

    double best = kInf;
    std::array<double, 2> best_x{opts.p_inf_lo, opts.nu_lo};
    for (long i = 0; i < np; ++i) {
        const double pi = opts.p_inf_lo + static_cast<double>(i) * opts.p_inf_step;
        for (long j = 0; j < nn; ++j) {
            const double nu = opts.nu_lo + static_cast<double>(j) * opts.nu_step;
            const double r = collapse_rss(windowed, pi, nu);
            if (r < best) {
                best = r;
                best_x = {pi, nu};
            }
        }
    }
    if (!std::isfinite(best))
        throw Error(ErrorCode::Internal, "fss: objective is not finite anywhere on the grid");

    auto objective = [&](const std::array<double, 2>& x) {
        if (!(x[0] > 0.0 && x[0] < 1.0 && x[1] > 0.0))
            return kInf;
        return collapse_rss(windowed, x[0], x[1]);
    };
    const auto nm = nelder_mead(objective, best_x, {opts.p_inf_step, opts.nu_step});

    FssResult out;
    // The simplex only ever keeps improvements, but keep the grid point if it
    // somehow wins so the refined RSS never exceeds the grid RSS.
    const auto x = nm.f <= best ? nm.x : best_x;
    out.p_inf = x[0];
    out.nu = x[1];
    out.rss = collapse_rss(windowed, x[0], x[1], &out.coeffs);
    out.grid_rss = best;
    out.window = opts.window;
    out.points = windowed.size();
    std::set<std::size_t> sizes;
    for (const auto& r : windowed)
        sizes.insert(r.n);
    out.sizes = sizes.size();
    out.ci_p_inf = {out.p_inf, out.p_inf};
    out.ci_nu = {out.nu, out.nu};
    if (!(out.nu > 0.0 && out.p_inf > 0.0 && out.p_inf < 1.0 && std::isfinite(out.rss)))
        throw Error(ErrorCode::Internal, "fss: fit left the admissible region");
    if (out.sizes < 3) {
        out.flagged = true;
        out.flag_reason = "fewer than three code sizes; collapse is weakly constrained";
    }
    return out;
}

}  // namespace

FssResult fit_collapse(const FssDataset& data, const SizePstar& pstar, const FssOptions& opts)
{
    const FssDataset windowed = window_dataset(data, pstar, opts.window, opts.min_points_per_size);
    return fit_windowed(windowed, opts);
}

void bootstrap_fss(FssResult& fit, const FssDataset& data, const SizePstar& pstar, const FssOptions& opts,
                   std::uint64_t seed)
{
    if (opts.bootstrap_iters == 0)
        throw Error(ErrorCode::Config, "fss: bootstrap iterations must be at least 1");
    FssOptions inner = opts;
    inner.window = fit.window;
    const FssDataset windowed = window_dataset(data, pstar, inner.window, inner.min_points_per_size);
    for (const auto& r : windowed)
        if (r.shots == 0)
            throw Error(ErrorCode::Config, "fss: bootstrap needs shot counts on every row");

    const std::size_t iters = opts.bootstrap_iters;
    std::vector<std::optional<std::array<double, 2>>> draws(iters);
    auto work = [&](std::size_t begin, std::size_t end) {
        FssDataset resampled = windowed;
        for (std::size_t it = begin; it < end; ++it) {
            Rng rng(mix64(seed ^ mix64(it)));
            for (std::size_t i = 0; i < windowed.size(); ++i)
                resampled[i].wer = resample_rate(rng, windowed[i].shots, windowed[i].wer);
            try {
                const FssResult r = fit_windowed(resampled, inner);
                draws[it] = std::array<double, 2>{r.p_inf, r.nu};
            } catch (const Error&) {
                draws[it].reset();
            }
        }
    };
    unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, iters));
    if (threads <= 1) {
        work(0, iters);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back(work, iters * w / threads, iters * (w + 1) / threads);
        for (auto& t : pool)
            t.join();
    }

    std::vector<double> ps;
    std::vector<double> nus;
    for (const auto& d : draws) {
        if (d) {
            ps.push_back((*d)[0]);
            nus.push_back((*d)[1]);
        }
    }
    fit.bootstrap_done = ps.size();
    fit.bootstrap_skipped = iters - ps.size();
    if (ps.empty()) {
        fit.flagged = true;
        fit.flag_reason = "every bootstrap refit failed";
        return;
    }
    const double alpha = 1.0 - opts.confidence;
    fit.ci_p_inf = {percentile(ps, alpha / 2.0), percentile(ps, 1.0 - alpha / 2.0)};
    fit.ci_nu = {percentile(nus, alpha / 2.0), percentile(nus, 1.0 - alpha / 2.0)};
    if (static_cast<double>(fit.bootstrap_skipped) > opts.max_skip_fraction * static_cast<double>(iters)) {
        fit.flagged = true;
        fit.flag_reason = "more than " + std::to_string(static_cast<int>(opts.max_skip_fraction * 100)) +
                          "% of bootstrap refits failed";
    }
}

LinearFit fit_linearized(const std::map<std::size_t, SizeThreshold>& pstars, double nu, double confidence)
{
    if (pstars.size() < 3)
        throw Error(ErrorCode::Config, "fss: linearized fit needs at least three sizes");
    if (!(nu > 0.0))
        throw Error(ErrorCode::Config, "fss: nu must be positive");
    const double z = z_value(confidence);

    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    bool weighted = true;
    for (const auto& [n, t] : pstars) {
        x.push_back(std::pow(static_cast<double>(n), -1.0 / nu));
        y.push_back(t.p_star);
        const double sigma = (t.ci_hi - t.ci_lo) / 2.0 / z;
        if (!(sigma > 0.0))
            weighted = false;
        w.push_back(sigma > 0.0 ? 1.0 / (sigma * sigma) : 0.0);
    }
    if (!weighted)
        std::fill(w.begin(), w.end(), 1.0);

    const std::size_t m = x.size();
    double sw = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xbar = sx / sw;
    const double ybar = sy / sw;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    if (!(sxx > 0.0))
        throw Error(ErrorCode::Config, "fss: linearized fit needs distinct sizes");

    LinearFit out;
    out.weighted = weighted;
    out.c = sxy / sxx;
    out.p_inf = ybar - out.c * xbar;
    // Known sigmas give the covariance directly; equal weights scale it by the
    // residual variance instead.
    double s2 = 1.0;
    if (!weighted) {
        double rss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = y[i] - (out.p_inf + out.c * x[i]);
            rss += r * r;
        }
        s2 = rss / static_cast<double>(m - 2);
    }
    out.se_c = std::sqrt(s2 / sxx);
    out.se_p_inf = std::sqrt(s2 * (1.0 / sw + xbar * xbar / sxx));
    out.ci_p_inf = {out.p_inf - z * out.se_p_inf, out.p_inf + z * out.se_p_inf};
    return out;
}

WindowSensitivity window_sensitivity(const FssDataset& data, const SizePstar& pstar, const std::vector<double>& windows,
                                     const FssOptions& opts)
{
    WindowSensitivity out;
    double lo = kInf;
    double hi = -kInf;
    for (double window : windows) {
        WindowFit wf;
        wf.window = window;
        FssOptions o = opts;
        o.window = window;
        try {
            wf.fit = fit_collapse(data, pstar, o);
            lo = std::min(lo, wf.fit->p_inf);
            hi = std::max(hi, wf.fit->p_inf);
        } catch (const Error& e) {
            wf.error = e.what();
        }
        out.fits.push_back(std::move(wf));
    }
    out.spread = hi >= lo ? hi - lo : 0.0;
    return out;
}

FssDataset synthesize_fss(const std::vector<std::size_t>& sizes, const std::vector<double>& p_grid, double p_inf,
                          double nu, const std::array<double, 4>& coeffs, std::size_t shots_for_noise,
                          std::uint64_t seed)
{
    constexpr std::size_t kExactShots = 1000000000;
    Rng rng(seed);
    FssDataset out;
    for (auto n : sizes) {
        const double factor = std::pow(static_cast<double>(n), 1.0 / nu);
        for (double p : p_grid) {
            const double truth = std::clamp(eval_poly(coeffs, (p - p_inf) * factor), 0.0, 1.0);
            FssRow row{n, p, truth, kExactShots, 0};
            if (shots_for_noise > 0) {
                row.shots = shots_for_noise;
                row.wer = resample_rate(rng, shots_for_noise, truth);
            }
            row.failures = static_cast<std::size_t>(std::llround(row.wer * static_cast<double>(row.shots)));
            out.push_back(row);
        }
    }
    return out;
}

double synthetic_pstar(std::size_t n, double p_inf, double nu, const std::array<double, 4>& coeffs, double target,
                       double u_lo, double u_hi)
{
    double g_lo = eval_poly(coeffs, u_lo) - target;
    if ((g_lo > 0.0) == (eval_poly(coeffs, u_hi) - target > 0.0))
        throw Error(ErrorCode::Config, "synthetic_pstar: target is not bracketed");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (u_lo + u_hi);
        const double g = eval_poly(coeffs, mid) - target;
        if ((g > 0.0) == (g_lo > 0.0)) {
            u_lo = mid;
            g_lo = g;
        } else {
            u_hi = mid;
        }
    }
    return p_inf + 0.5 * (u_lo + u_hi) * std::pow(static_cast<double>(n), -1.0 / nu);
}

}  // namespace bbq
