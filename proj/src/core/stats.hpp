// Resampling helpers shared by the bootstrap stages.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace bbq {

/// failures* / shots with failures* ~ Binomial(shots, rate).
inline double resample_rate(Rng& rng, std::size_t shots, double rate)
{
    std::binomial_distribution<std::int64_t> dist(static_cast<std::int64_t>(shots), std::clamp(rate, 0.0, 1.0));
    return static_cast<double>(dist(rng)) / static_cast<double>(shots);
}

/// Linear-interpolated quantile (index q*(n-1)) of an unsorted sample.
inline double percentile(std::vector<double> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("percentile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= values.size())
        return values.back();
    const double frac = pos - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
}

}  // namespace bbq
