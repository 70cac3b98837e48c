#include "mms/scheme.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace mms {

void Dims::validate() const {
    if (n < 2 || m < 2 || p < 2)
        throw std::invalid_argument("dimensions must be at least 2");
    if (nm() > 64 || mp() > 64 || pn() > 64)
        throw std::invalid_argument("flattened factor exceeds 64 bits");
}

const char* to_string(Slot s) {
    switch (s) {
        case Slot::Alpha: return "alpha";
        case Slot::Beta: return "beta";
        default: return "gamma";
    }
}

bool mul_tensor_entry(const Dims& d, int x, int y, int z) {
    if (x < 0 || x >= d.nm() || y < 0 || y >= d.mp() || z < 0 || z >= d.pn())
        throw std::out_of_range("mul_tensor_entry: index out of range");
    const int i = x / d.m, j = x % d.m;
    const int j2 = y / d.p, k = y % d.p;
    const int k2 = z / d.n, i2 = z % d.n;
    return j == j2 && k == k2 && i == i2;
}

Scheme::Scheme(Dims dims, std::vector<Term> terms) : dims_(dims), terms_(std::move(terms)) {
    dims_.validate();
    for (const Term& t : terms_) check_term(t);
}

void Scheme::check_term(const Term& t) const {
    if (t.alpha.length() != dims_.nm() || t.beta.length() != dims_.mp() ||
        t.gamma.length() != dims_.pn())
        throw std::invalid_argument("term component length does not match dimensions");
    if (t.has_zero_component())
        throw std::invalid_argument("term has a zero component");
}

void Scheme::set_component(int i, Slot s, const BitVector& v) {
    Term& t = terms_.at(static_cast<std::size_t>(i));
    if (v.length() != t.component(s).length())
        throw std::invalid_argument("component length mismatch");
    if (v.is_zero())
        throw std::invalid_argument("refusing to set a zero component");
    t.component(s) = v;
}

void Scheme::append_term(const Term& t) {
    check_term(t);
    terms_.push_back(t);
}

void Scheme::remove_term_swap(int i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    if (idx >= terms_.size())
        throw std::out_of_range("remove_term_swap: index out of range");
    terms_[idx] = terms_.back();
    terms_.pop_back();
}

bool Scheme::operator==(const Scheme& other) const {
    if (dims_ != other.dims_ || terms_.size() != other.terms_.size()) return false;
    auto key = [](const Term& t) {
        return std::make_tuple(t.alpha.bits(), t.beta.bits(), t.gamma.bits());
    };
    std::vector<Term> a = terms_, b = other.terms_;
    auto lt = [&](const Term& x, const Term& y) { return key(x) < key(y); };
    std::sort(a.begin(), a.end(), lt);
    std::sort(b.begin(), b.end(), lt);
    return a == b;
}

Scheme standard_scheme(int n, int m, int p) {
    Dims d{n, m, p};
    d.validate();
    std::vector<Term> terms;
    terms.reserve(static_cast<std::size_t>(n) * m * p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < p; ++k)
                terms.push_back({BitVector::unit(d.nm(), i * m + j),
                                 BitVector::unit(d.mp(), j * p + k),
                                 BitVector::unit(d.pn(), k * n + i)});
    return Scheme(d, std::move(terms));
}

Scheme strassen_scheme() {
    // Bit q of each word follows the flattening layout; e.g. alpha bits
    // 0..3 are a11, a12, a21, a22.
    auto t = [](std::uint64_t a, std::uint64_t b, std::uint64_t c) {
        return Term{BitVector(4, a), BitVector(4, b), BitVector(4, c)};
    };
    std::vector<Term> terms = {
        t(0b1001, 0b1001, 0b1001),  // (a11+a22)(b11+b22)(c11+c22)
        t(0b1100, 0b0001, 0b1010),  // (a21+a22)(b11)(c12+c22)
        t(0b0001, 0b1010, 0b1100),  // (a11)(b12+b22)(c21+c22)
        t(0b1000, 0b0101, 0b0011),  // (a22)(b21+b11)(c11+c12)
        t(0b0011, 0b1000, 0b0101),  // (a11+a12)(b22)(c21+c11)
        t(0b0101, 0b0011, 0b1000),  // (a21+a11)(b11+b12)(c22)
        t(0b1010, 0b1100, 0b0001),  // (a12+a22)(b21+b22)(c11)
    };
    return Scheme(Dims{2, 2, 2}, std::move(terms));
}

bool verify(const Scheme& s) {
    const Dims& d = s.dims();
    const int nm = d.nm(), mp = d.mp();

    // Parity accumulation over terms into a dense (x, y) -> gamma-word table.
    std::vector<std::uint64_t> table(static_cast<std::size_t>(nm) * mp, 0);
    for (const Term& t : s.terms()) {
        std::uint64_t abits = t.alpha.bits();
        while (abits) {
            const int x = std::countr_zero(abits);
            abits &= abits - 1;
            std::uint64_t* row = table.data() + static_cast<std::size_t>(x) * mp;
            std::uint64_t bbits = t.beta.bits();
            while (bbits) {
                const int y = std::countr_zero(bbits);
                bbits &= bbits - 1;
                row[y] ^= t.gamma.bits();
            }
        }
    }

    for (int x = 0; x < nm; ++x) {
        const int i = x / d.m, j = x % d.m;
        for (int y = 0; y < mp; ++y) {
            const int j2 = y / d.p, k = y % d.p;
            const std::uint64_t expected = (j == j2) ? (1ull << (k * d.n + i)) : 0;
            if (table[static_cast<std::size_t>(x) * mp + y] != expected) return false;
        }
    }
    return true;
}

std::array<int, 3> component_ranks(const Scheme& s) {
    const Dims& d = s.dims();
    GF2Matrix a(d.nm()), b(d.mp()), c(d.pn());
    for (const Term& t : s.terms()) {
        a.append_row(t.alpha);
        b.append_row(t.beta);
        c.append_row(t.gamma);
    }
    return {gf2_rank(a), gf2_rank(b), gf2_rank(c)};
}

}  // namespace mms
