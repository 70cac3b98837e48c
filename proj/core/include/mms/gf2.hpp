#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mms {

/// Fixed-length GF(2) vector packed into one machine word.
/// Bit q holds the coefficient of basis element q; bits at positions
/// >= length are always zero. Supported lengths are 1..64.
class BitVector {
public:
    BitVector() = default;
    BitVector(int length, std::uint64_t bits);

    static BitVector zeros(int length) { return BitVector(length, 0); }
    static BitVector unit(int length, int pos);

    /// Parses a 0/1 string; character at position q becomes bit q.
    static BitVector from_string(const std::string& s);

    int length() const { return len_; }
    std::uint64_t bits() const { return bits_; }
    std::uint64_t mask() const { return len_ == 64 ? ~0ull : (1ull << len_) - 1; }

    bool test(int q) const { return (bits_ >> q) & 1u; }
    bool is_zero() const { return bits_ == 0; }
    int popcount() const { return std::popcount(bits_); }

    BitVector& operator^=(const BitVector& other);
    friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

    bool operator==(const BitVector&) const = default;

    std::string to_string() const;

private:
    std::uint64_t bits_ = 0;
    int len_ = 1;
};

/// GF(2) inner product: parity of the AND of the two words.
inline bool dot(const BitVector& a, const BitVector& b) {
    return std::popcount(a.bits() & b.bits()) & 1u;
}

/// Row-major GF(2) matrix: any number of rows, at most 64 columns.
struct GF2Matrix {
    int cols = 0;
    std::vector<BitVector> rows;

    GF2Matrix() = default;
    explicit GF2Matrix(int cols) : cols(cols) {}
    GF2Matrix(int cols, std::vector<BitVector> rows);

    int row_count() const { return static_cast<int>(rows.size()); }
    void append_row(const BitVector& r);
};

/// Dimension of the GF(2) row span (Gaussian elimination, column pivots
/// left to right). The input is not modified.
int gf2_rank(const GF2Matrix& m);

/// If target lies in the row span of basis, returns the coefficient mask c
/// (length = number of rows, bit q selects row q) with XOR of the selected
/// rows equal to target. When several solutions exist the one whose
/// coefficient string c_0 c_1 ... is lexicographically smallest is returned,
/// i.e. earlier rows are left out whenever possible. Requires
/// target.length() == basis.cols and at most 64 rows.
std::optional<BitVector> gf2_solve(const GF2Matrix& basis, const BitVector& target);

/// Writes m as an XOR of rank(m) outer products col * row^T. Neither factor
/// of any pair is zero, and pairs are emitted by ascending pivot column.
std::vector<std::pair<BitVector, BitVector>> gf2_rank_one_factorization(const GF2Matrix& m);

/// outer(u, v)[i][j] = u[i] & v[j]; result has u.length() rows.
GF2Matrix outer_product(const BitVector& col, const BitVector& row);

}  // namespace mms
