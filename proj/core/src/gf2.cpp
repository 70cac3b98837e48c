#include "mms/gf2.hpp"

#include <algorithm>
#include <stdexcept>

namespace mms {

BitVector::BitVector(int length, std::uint64_t bits) : bits_(bits), len_(length) {
    if (length < 1 || length > 64)
        throw std::invalid_argument("BitVector length must be in 1..64");
    if (bits & ~mask())
        throw std::invalid_argument("BitVector has bits set beyond its length");
}

BitVector BitVector::unit(int length, int pos) {
    if (pos < 0 || pos >= length)
        throw std::invalid_argument("BitVector unit position out of range");
    return BitVector(length, 1ull << pos);
}

BitVector BitVector::from_string(const std::string& s) {
    if (s.empty() || s.size() > 64)
        throw std::invalid_argument("bit string must have 1..64 characters");
    std::uint64_t bits = 0;
    for (std::size_t q = 0; q < s.size(); ++q) {
        if (s[q] == '1')
            bits |= 1ull << q;
        else if (s[q] != '0')
            throw std::invalid_argument("bit string may only contain 0 and 1");
    }
    return BitVector(static_cast<int>(s.size()), bits);
}

BitVector& BitVector::operator^=(const BitVector& other) {
    if (len_ != other.len_)
        throw std::invalid_argument("BitVector XOR requires equal lengths");
    bits_ ^= other.bits_;
    return *this;
}

std::string BitVector::to_string() const {
    std::string s(static_cast<std::size_t>(len_), '0');
    for (int q = 0; q < len_; ++q)
        if (test(q)) s[q] = '1';
    return s;
}

GF2Matrix::GF2Matrix(int cols, std::vector<BitVector> rows) : cols(cols), rows(std::move(rows)) {
    for (const BitVector& r : this->rows)
        if (r.length() != cols)
            throw std::invalid_argument("GF2Matrix row length differs from cols");
}

void GF2Matrix::append_row(const BitVector& r) {
    if (r.length() != cols)
        throw std::invalid_argument("GF2Matrix row length differs from cols");
    rows.push_back(r);
}

namespace {

// Echelon basis keyed by pivot position: basis[p] has its lowest set bit at p.
struct Echelon {
    std::uint64_t basis[64] = {0};

    // Reduces w against the basis; returns the residue.
    std::uint64_t reduce(std::uint64_t w) const {
        while (w) {
            int p = std::countr_zero(w);
            if (!basis[p]) break;
            w ^= basis[p];
        }
        return w;
    }

    // Inserts w if independent; returns true when the rank grew.
    bool insert(std::uint64_t w) {
        w = reduce(w);
        if (!w) return false;
        basis[std::countr_zero(w)] = w;
        return true;
    }

    bool contains(std::uint64_t w) const { return reduce(w) == 0; }
};

}  // namespace

int gf2_rank(const GF2Matrix& m) {
    Echelon ech;
    int rank = 0;
    for (const BitVector& r : m.rows)
        if (ech.insert(r.bits())) ++rank;
    return rank;
}

std::optional<BitVector> gf2_solve(const GF2Matrix& basis, const BitVector& target) {
    if (target.length() != basis.cols)
        throw std::invalid_argument("gf2_solve: target length differs from basis cols");
    const int r = basis.row_count();
    if (r < 1 || r > 64)
        throw std::invalid_argument("gf2_solve: row count must be in 1..64");

    // Suffix echelon bases: suffix[q] spans rows q..r-1.
    std::vector<Echelon> suffix(static_cast<std::size_t>(r) + 1);
    for (int q = r - 1; q >= 0; --q) {
        suffix[q] = suffix[q + 1];
        suffix[q].insert(basis.rows[q].bits());
    }
    if (!suffix[0].contains(target.bits())) return std::nullopt;

    // Greedy lexicographic minimisation: keep coefficient q at zero whenever
    // the residue is still reachable from the later rows alone.
    std::uint64_t residue = target.bits();
    std::uint64_t coeff = 0;
    for (int q = 0; q < r; ++q) {
        if (!suffix[q + 1].contains(residue)) {
            coeff |= 1ull << q;
            residue ^= basis.rows[q].bits();
        }
    }
    return BitVector(r, coeff);
}

std::vector<std::pair<BitVector, BitVector>> gf2_rank_one_factorization(const GF2Matrix& m) {
    std::vector<std::pair<BitVector, BitVector>> pairs;
    const int nrows = m.row_count();
    if (nrows == 0 || m.cols == 0) return pairs;
    if (nrows > 64)
        throw std::invalid_argument("gf2_rank_one_factorization: more than 64 rows");

    std::vector<std::uint64_t> work(nrows);
    for (int i = 0; i < nrows; ++i) work[i] = m.rows[i].bits();

    for (int c = 0; c < m.cols; ++c) {
        const std::uint64_t cbit = 1ull << c;
        int pivot = -1;
        for (int i = 0; i < nrows; ++i)
            if (work[i] & cbit) { pivot = i; break; }
        if (pivot < 0) continue;

        const std::uint64_t vrow = work[pivot];
        std::uint64_t ucol = 0;
        for (int i = 0; i < nrows; ++i) {
            if (work[i] & cbit) {
                ucol |= 1ull << i;
                work[i] ^= vrow;
            }
        }
        pairs.emplace_back(BitVector(nrows, ucol), BitVector(m.cols, vrow));
    }
    return pairs;
}

GF2Matrix outer_product(const BitVector& col, const BitVector& row) {
    GF2Matrix m(row.length());
    m.rows.reserve(static_cast<std::size_t>(col.length()));
    for (int i = 0; i < col.length(); ++i)
        m.rows.push_back(col.test(i) ? row : BitVector::zeros(row.length()));
    return m;
}

}  // namespace mms
