// Dense bit-packed linear algebra over GF(2).
//
// Rows are stored as contiguous 64-bit words, least significant bit first.
// Addition is XOR, multiplication is AND followed by parity.

#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bbq {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t size) : size_(size), words_(words_for(size), 0) {}

    /// Parses a string of '0'/'1' characters; other characters are ignored.
    static BitVec from_string(std::string_view bits);
    static BitVec from_support(std::size_t size, std::span<const std::size_t> support);

    std::size_t size() const { return size_; }

    bool get(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1u; }
    void set(std::size_t i, bool value = true)
    {
        const Word mask = Word{1} << (i % kWordBits);
        if (value)
            words_[i / kWordBits] |= mask;
        else
            words_[i / kWordBits] &= ~mask;
    }
    void flip(std::size_t i) { words_[i / kWordBits] ^= Word{1} << (i % kWordBits); }
    void clear() { std::fill(words_.begin(), words_.end(), Word{0}); }

    std::size_t count() const;
    bool none() const;
    bool any() const { return !none(); }
    std::vector<std::size_t> support() const;

    BitVec& operator^=(const BitVec& other);
    BitVec& operator&=(const BitVec& other);
    BitVec& operator|=(const BitVec& other);
    friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
    friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }
    friend BitVec operator|(BitVec a, const BitVec& b) { return a |= b; }
    bool operator==(const BitVec& other) const = default;

    /// True if the first differing index holds 0 in *this.
    bool lex_less(const BitVec& other) const;

    std::span<Word> words() { return words_; }
    std::span<const Word> words() const { return words_; }

    std::string to_string() const;

private:
    std::size_t size_ = 0;
    std::vector<Word> words_;
};

class BinaryMatrix {
public:
    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_(words_for(cols)), bits_(rows * stride_, 0)
    {
    }

    static BinaryMatrix identity(std::size_t n);
    /// Rows given as '0'/'1' strings of equal length.
    static BinaryMatrix from_rows(std::initializer_list<std::string_view> rows);
    static BinaryMatrix from_rows(std::span<const BitVec> rows, std::size_t cols);
    static BinaryMatrix hstack(const BinaryMatrix& left, const BinaryMatrix& right);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t stride() const { return stride_; }

    bool get(std::size_t r, std::size_t c) const
    {
        return (bits_[r * stride_ + c / kWordBits] >> (c % kWordBits)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool value = true)
    {
        Word& w = bits_[r * stride_ + c / kWordBits];
        const Word mask = Word{1} << (c % kWordBits);
        w = value ? (w | mask) : (w & ~mask);
    }
    void flip(std::size_t r, std::size_t c) { bits_[r * stride_ + c / kWordBits] ^= Word{1} << (c % kWordBits); }

    std::span<Word> row_words(std::size_t r) { return {bits_.data() + r * stride_, stride_}; }
    std::span<const Word> row_words(std::size_t r) const { return {bits_.data() + r * stride_, stride_}; }

    BitVec row(std::size_t r) const;
    std::vector<std::size_t> row_support(std::size_t r) const;
    std::vector<std::size_t> column_support(std::size_t c) const;

    /// row[dst] ^= row[src]
    void add_row(std::size_t dst, std::size_t src);
    void swap_rows(std::size_t a, std::size_t b);

    BinaryMatrix transpose() const;
    BinaryMatrix operator*(const BinaryMatrix& rhs) const;
    BitVec operator*(const BitVec& v) const;
    BinaryMatrix& operator^=(const BinaryMatrix& rhs);
    bool operator==(const BinaryMatrix& other) const = default;

    bool is_zero() const;
    std::size_t count() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
    std::vector<Word> bits_;
};

std::size_t rank(const BinaryMatrix& m);

struct RowReduction {
    BinaryMatrix reduced;             ///< row_transform * m, reduced row echelon in visit order
    std::vector<std::size_t> pivots;  ///< pivot column of reduced row i, in visit order
    BinaryMatrix row_transform;       ///< invertible rows x rows
};

inline constexpr std::size_t kNoLimit = static_cast<std::size_t>(-1);

/// Gauss-Jordan elimination visiting columns in `column_order`. Among rows
/// able to supply a pivot the lowest current row index wins. Elimination stops
/// early once `max_pivots` pivots are found (callers that know the rank pass it
/// to skip the tail of the order).
RowReduction row_reduce(const BinaryMatrix& m, std::span<const std::size_t> column_order,
                        std::size_t max_pivots = kNoLimit);
RowReduction row_reduce(const BinaryMatrix& m);

/// Some e with m*e = s, supported on the pivot columns of the natural-order
/// reduction; nullopt if the system is inconsistent.
std::optional<BitVec> solve(const BinaryMatrix& m, const BitVec& s);

bool in_rowspace(const BinaryMatrix& m, const BitVec& v);

/// Cached reduced basis of a row space for repeated membership queries.
class RowspaceBasis {
public:
    RowspaceBasis() = default;
    explicit RowspaceBasis(const BinaryMatrix& m);

    std::size_t rank() const { return pivots_.size(); }
    /// Reduces v against the basis in place; the remainder is zero iff v was in the span.
    void reduce(BitVec& v) const;
    bool contains(BitVec v) const;

private:
    BinaryMatrix basis_;
    std::vector<std::size_t> pivots_;
};

}  // namespace bbq
