#include "gf2.hpp"

#include <numeric>
#include <stdexcept>

namespace bbq {

namespace {

void xor_words(std::span<Word> dst, std::span<const Word> src)
{
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] ^= src[i];
}

bool parity_and(std::span<const Word> a, std::span<const Word> b)
{
    Word acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc ^= a[i] & b[i];
    return std::popcount(acc) & 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// BitVec

BitVec BitVec::from_string(std::string_view bits)
{
    std::size_t n = 0;
    for (char ch : bits)
        n += (ch == '0' || ch == '1');
    BitVec v(n);
    std::size_t i = 0;
    for (char ch : bits) {
        if (ch == '1')
            v.set(i++);
        else if (ch == '0')
            ++i;
    }
    return v;
}

BitVec BitVec::from_support(std::size_t size, std::span<const std::size_t> support)
{
    BitVec v(size);
    for (auto i : support) {
        if (i >= size)
            throw std::out_of_range("BitVec::from_support: index out of range");
        v.set(i);
    }
    return v;
}

std::size_t BitVec::count() const
{
    std::size_t c = 0;
    for (Word w : words_)
        c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

bool BitVec::none() const
{
    return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
}

std::vector<std::size_t> BitVec::support() const
{
    std::vector<std::size_t> out;
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
        Word w = words_[wi];
        while (w) {
            out.push_back(wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w)));
            w &= w - 1;
        }
    }
    return out;
}

BitVec& BitVec::operator^=(const BitVec& other)
{
    if (other.size_ != size_)
        throw std::invalid_argument("BitVec: size mismatch");
    xor_words(words_, other.words_);
    return *this;
}

BitVec& BitVec::operator&=(const BitVec& other)
{
    if (other.size_ != size_)
        throw std::invalid_argument("BitVec: size mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i)
        words_[i] &= other.words_[i];
    return *this;
}

BitVec& BitVec::operator|=(const BitVec& other)
{
    if (other.size_ != size_)
        throw std::invalid_argument("BitVec: size mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i)
        words_[i] |= other.words_[i];
    return *this;
}

bool BitVec::lex_less(const BitVec& other) const
{
    for (std::size_t i = 0; i < words_.size(); ++i) {
        const Word diff = words_[i] ^ other.words_[i];
        if (diff) {
            const Word lowest = diff & (~diff + 1);
            return (words_[i] & lowest) == 0;
        }
    }
    return false;
}

std::string BitVec::to_string() const
{
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
        if (get(i))
            s[i] = '1';
    return s;
}

// ---------------------------------------------------------------------------
// BinaryMatrix

BinaryMatrix BinaryMatrix::identity(std::size_t n)
{
    BinaryMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m.set(i, i);
    return m;
}

BinaryMatrix BinaryMatrix::from_rows(std::initializer_list<std::string_view> rows)
{
    std::vector<BitVec> parsed;
    for (auto r : rows)
        parsed.push_back(BitVec::from_string(r));
    const std::size_t cols = parsed.empty() ? 0 : parsed.front().size();
    return from_rows(parsed, cols);
}

BinaryMatrix BinaryMatrix::from_rows(std::span<const BitVec> rows, std::size_t cols)
{
    BinaryMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols)
            throw std::invalid_argument("BinaryMatrix::from_rows: ragged rows");
        std::copy(rows[r].words().begin(), rows[r].words().end(), m.row_words(r).begin());
    }
    return m;
}

BinaryMatrix BinaryMatrix::hstack(const BinaryMatrix& left, const BinaryMatrix& right)
{
    if (left.rows() != right.rows())
        throw std::invalid_argument("BinaryMatrix::hstack: row count mismatch");
    BinaryMatrix m(left.rows(), left.cols() + right.cols());
    for (std::size_t r = 0; r < left.rows(); ++r) {
        for (std::size_t c = 0; c < left.cols(); ++c)
            if (left.get(r, c))
                m.set(r, c);
        for (std::size_t c = 0; c < right.cols(); ++c)
            if (right.get(r, c))
                m.set(r, left.cols() + c);
    }
    return m;
}

BitVec BinaryMatrix::row(std::size_t r) const
{
    BitVec v(cols_);
    auto src = row_words(r);
    std::copy(src.begin(), src.end(), v.words().begin());
    return v;
}

std::vector<std::size_t> BinaryMatrix::row_support(std::size_t r) const { return row(r).support(); }

std::vector<std::size_t> BinaryMatrix::column_support(std::size_t c) const
{
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rows_; ++r)
        if (get(r, c))
            out.push_back(r);
    return out;
}

void BinaryMatrix::add_row(std::size_t dst, std::size_t src) { xor_words(row_words(dst), row_words(src)); }

void BinaryMatrix::swap_rows(std::size_t a, std::size_t b)
{
    if (a == b)
        return;
    std::swap_ranges(row_words(a).begin(), row_words(a).end(), row_words(b).begin());
}

BinaryMatrix BinaryMatrix::transpose() const
{
    BinaryMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        auto words = row_words(r);
        for (std::size_t wi = 0; wi < stride_; ++wi) {
            Word w = words[wi];
            while (w) {
                t.set(wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w)), r);
                w &= w - 1;
            }
        }
    }
    return t;
}

BinaryMatrix BinaryMatrix::operator*(const BinaryMatrix& rhs) const
{
    if (cols_ != rhs.rows_)
        throw std::invalid_argument("BinaryMatrix::operator*: dimension mismatch");
    BinaryMatrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        auto dst = out.row_words(r);
        auto words = row_words(r);
        for (std::size_t wi = 0; wi < stride_; ++wi) {
            Word w = words[wi];
            while (w) {
                const std::size_t k = wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w));
                xor_words(dst, rhs.row_words(k));
                w &= w - 1;
            }
        }
    }
    return out;
}

BitVec BinaryMatrix::operator*(const BitVec& v) const
{
    if (v.size() != cols_)
        throw std::invalid_argument("BinaryMatrix * BitVec: dimension mismatch");
    BitVec out(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        if (parity_and(row_words(r), v.words()))
            out.set(r);
    return out;
}

BinaryMatrix& BinaryMatrix::operator^=(const BinaryMatrix& rhs)
{
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("BinaryMatrix::operator^=: dimension mismatch");
    xor_words(bits_, rhs.bits_);
    return *this;
}

bool BinaryMatrix::is_zero() const
{
    return std::all_of(bits_.begin(), bits_.end(), [](Word w) { return w == 0; });
}

std::size_t BinaryMatrix::count() const
{
    std::size_t c = 0;
    for (Word w : bits_)
        c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

// ---------------------------------------------------------------------------
// Elimination

RowReduction row_reduce(const BinaryMatrix& m, std::span<const std::size_t> column_order, std::size_t max_pivots)
{
    if (column_order.size() != m.cols())
        throw std::invalid_argument("row_reduce: column_order must be a permutation of the columns");
    {
        std::vector<bool> seen(m.cols(), false);
        for (auto c : column_order) {
            if (c >= m.cols() || seen[c])
                throw std::invalid_argument("row_reduce: column_order must be a permutation of the columns");
            seen[c] = true;
        }
    }

    RowReduction out{m, {}, BinaryMatrix::identity(m.rows())};
    BinaryMatrix& a = out.reduced;
    BinaryMatrix& t = out.row_transform;
    const std::size_t rows = m.rows();
    const std::size_t limit = std::min({max_pivots, rows, m.cols()});

    std::size_t r = 0;
    for (std::size_t col : column_order) {
        if (r >= limit)
            break;
        std::size_t pivot = rows;
        for (std::size_t i = r; i < rows; ++i) {
            if (a.get(i, col)) {
                pivot = i;
                break;
            }
        }
        if (pivot == rows)
            continue;
        a.swap_rows(pivot, r);
        t.swap_rows(pivot, r);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i != r && a.get(i, col)) {
                a.add_row(i, r);
                t.add_row(i, r);
            }
        }
        out.pivots.push_back(col);
        ++r;
    }
    return out;
}

RowReduction row_reduce(const BinaryMatrix& m)
{
    std::vector<std::size_t> order(m.cols());
    std::iota(order.begin(), order.end(), std::size_t{0});
    return row_reduce(m, order);
}

std::size_t rank(const BinaryMatrix& m)
{
    // Forward elimination only; no transform needed.
    BinaryMatrix a = m;
    std::size_t r = 0;
    for (std::size_t col = 0; col < a.cols() && r < a.rows(); ++col) {
        std::size_t pivot = a.rows();
        for (std::size_t i = r; i < a.rows(); ++i) {
            if (a.get(i, col)) {
                pivot = i;
                break;
            }
        }
        if (pivot == a.rows())
            continue;
        a.swap_rows(pivot, r);
        for (std::size_t i = r + 1; i < a.rows(); ++i)
            if (a.get(i, col))
                a.add_row(i, r);
        ++r;
    }
    return r;
}

std::optional<BitVec> solve(const BinaryMatrix& m, const BitVec& s)
{
    if (s.size() != m.rows())
        throw std::invalid_argument("solve: syndrome length must equal row count");
    const RowReduction red = row_reduce(m);
    const BitVec ts = red.row_transform * s;
    for (std::size_t r = red.pivots.size(); r < m.rows(); ++r)
        if (ts.get(r))
            return std::nullopt;
    BitVec e(m.cols());
    for (std::size_t r = 0; r < red.pivots.size(); ++r)
        if (ts.get(r))
            e.set(red.pivots[r]);
    return e;
}

bool in_rowspace(const BinaryMatrix& m, const BitVec& v)
{
    if (v.size() != m.cols())
        throw std::invalid_argument("in_rowspace: vector length must equal column count");
    return RowspaceBasis(m).contains(v);
}

RowspaceBasis::RowspaceBasis(const BinaryMatrix& m)
{
    RowReduction red = row_reduce(m);
    pivots_ = std::move(red.pivots);
    basis_ = BinaryMatrix(pivots_.size(), m.cols());
    for (std::size_t r = 0; r < pivots_.size(); ++r) {
        auto src = red.reduced.row_words(r);
        std::copy(src.begin(), src.end(), basis_.row_words(r).begin());
    }
}

void RowspaceBasis::reduce(BitVec& v) const
{
    if (v.size() != basis_.cols())
        throw std::invalid_argument("RowspaceBasis: vector length mismatch");
    for (std::size_t r = 0; r < pivots_.size(); ++r)
        if (v.get(pivots_[r]))
            xor_words(v.words(), basis_.row_words(r));
}

bool RowspaceBasis::contains(BitVec v) const
{
    reduce(v);
    return v.none();
}

}  // namespace bbq
