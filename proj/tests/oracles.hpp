// Independent reference implementations for tests. Deliberately naive: one
// byte per entry, textbook elimination, exhaustive search.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "gf2.hpp"

namespace oracle {

using Dense = std::vector<std::vector<std::uint8_t>>;

inline Dense to_dense(const bbq::BinaryMatrix& m)
{
    Dense d(m.rows(), std::vector<std::uint8_t>(m.cols(), 0));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            d[r][c] = m.get(r, c) ? 1 : 0;
    return d;
}

inline bbq::BinaryMatrix from_dense(const Dense& d, std::size_t cols)
{
    bbq::BinaryMatrix m(d.size(), cols);
    for (std::size_t r = 0; r < d.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (d[r][c])
                m.set(r, c);
    return m;
}

inline std::size_t rank(Dense a)
{
    std::size_t rank = 0;
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        while (piv < rows && !a[piv][c])
            ++piv;
        if (piv == rows)
            continue;
        std::swap(a[piv], a[rank]);
        for (std::size_t r = 0; r < rows; ++r)
            if (r != rank && a[r][c])
                for (std::size_t k = 0; k < cols; ++k)
                    a[r][k] ^= a[rank][k];
        ++rank;
    }
    return rank;
}

inline Dense multiply(const Dense& a, const Dense& b)
{
    const std::size_t n = a.size();
    const std::size_t inner = b.size();
    const std::size_t m = inner ? b[0].size() : 0;
    Dense out(n, std::vector<std::uint8_t>(m, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            std::uint8_t acc = 0;
            for (std::size_t k = 0; k < inner; ++k)
                acc ^= a[i][k] & b[k][j];
            out[i][j] = acc;
        }
    return out;
}

inline bbq::BinaryMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double density = 0.5)
{
    std::bernoulli_distribution coin(density);
    bbq::BinaryMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (coin(rng))
                m.set(r, c);
    return m;
}

inline bbq::BitVec random_vec(std::mt19937_64& rng, std::size_t n, double density = 0.5)
{
    std::bernoulli_distribution coin(density);
    bbq::BitVec v(n);
    for (std::size_t i = 0; i < n; ++i)
        if (coin(rng))
            v.set(i);
    return v;
}

/// v in rowspace(m) by the rank test on the stacked matrix.
inline bool in_rowspace(const bbq::BinaryMatrix& m, const bbq::BitVec& v)
{
    Dense d = to_dense(m);
    const std::size_t before = rank(d);
    std::vector<std::uint8_t> row(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        row[i] = v.get(i);
    d.push_back(row);
    return rank(d) == before;
}

/// Basis of {x : m x = 0} from the reduced echelon form, one vector per free column.
inline std::vector<bbq::BitVec> nullspace(const bbq::BinaryMatrix& m)
{
    Dense a = to_dense(m);
    const std::size_t rows = a.size();
    const std::size_t cols = m.cols();
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && !a[piv][c])
            ++piv;
        if (piv == rows)
            continue;
        std::swap(a[piv], a[r]);
        for (std::size_t k = 0; k < rows; ++k)
            if (k != r && a[k][c])
                for (std::size_t t = 0; t < cols; ++t)
                    a[k][t] ^= a[r][t];
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivot_col)
        is_pivot[c] = true;
    std::vector<bbq::BitVec> basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f])
            continue;
        bbq::BitVec v(cols);
        v.set(f);
        for (std::size_t i = 0; i < pivot_col.size(); ++i)
            if (a[i][f])
                v.set(pivot_col[i]);
        basis.push_back(v);
    }
    return basis;
}

/// A vector of ker(h_other) outside rowspace(h), or the zero vector if none.
inline bbq::BitVec nontrivial_logical(const bbq::BinaryMatrix& h, const bbq::BinaryMatrix& h_other)
{
    for (const auto& v : nullspace(h_other))
        if (!oracle::in_rowspace(h, v))
            return v;
    return bbq::BitVec(h.cols());
}

/// Minimum-cost perfect matching of a complete graph by subset DP.
inline std::int64_t matching_optimum(std::size_t n, const std::vector<std::int64_t>& cost)
{
    const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> dp(std::size_t{1} << n, inf);
    dp[0] = 0;
    for (std::size_t mask = 0; mask < dp.size(); ++mask) {
        if (dp[mask] >= inf)
            continue;
        std::size_t i = 0;
        while (i < n && ((mask >> i) & 1))
            ++i;
        if (i == n)
            continue;
        for (std::size_t j = i + 1; j < n; ++j)
            if (!((mask >> j) & 1)) {
                const std::size_t next = mask | (std::size_t{1} << i) | (std::size_t{1} << j);
                dp[next] = std::min(dp[next], dp[mask] + cost[i * n + j]);
            }
    }
    return dp.back();
}

}  // namespace oracle
