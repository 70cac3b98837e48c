#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mms/gf2.hpp"

namespace mms {

/// Matrix dimensions of a product C = A * B with A n-by-m and B m-by-p.
/// Every flattened factor must fit into one machine word, so the products
/// n*m, m*p and p*n are each limited to 64.
struct Dims {
    int n = 0, m = 0, p = 0;

    int nm() const { return n * m; }
    int mp() const { return m * p; }
    int pn() const { return p * n; }

    bool operator==(const Dims&) const = default;

    /// Throws unless 2 <= n,m,p and all three flattened sizes fit in a word.
    void validate() const;
};

/// Selects one of the three components of a rank-one term.
enum class Slot : std::uint8_t { Alpha = 0, Beta = 1, Gamma = 2 };

/// Cyclic successor in the fixed order alpha -> beta -> gamma -> alpha.
constexpr Slot next(Slot s) { return static_cast<Slot>((static_cast<int>(s) + 1) % 3); }

const char* to_string(Slot s);

/// One rank-one tensor alpha (x) beta (x) gamma. The flattening layout is
/// fixed: alpha bit (i-1)*m+(j-1) is the matrix unit at row i, column j of A;
/// beta bit (j-1)*p+(k-1) addresses B; gamma bit (k-1)*n+(i-1) addresses the
/// output entry C[i][k]. No component of a live term is ever zero.
struct Term {
    BitVector alpha, beta, gamma;

    const BitVector& component(Slot s) const {
        switch (s) {
            case Slot::Alpha: return alpha;
            case Slot::Beta: return beta;
            default: return gamma;
        }
    }
    BitVector& component(Slot s) {
        switch (s) {
            case Slot::Alpha: return alpha;
            case Slot::Beta: return beta;
            default: return gamma;
        }
    }

    bool has_zero_component() const {
        return alpha.is_zero() || beta.is_zero() || gamma.is_zero();
    }

    bool operator==(const Term&) const = default;
};

/// Entry of the order-three multiplication tensor for the given dimensions.
/// x indexes the alpha axis, y the beta axis, z the gamma axis (flattening
/// layout above). Indices out of range raise std::out_of_range.
bool mul_tensor_entry(const Dims& d, int x, int y, int z);

/// An ordered list of rank-one terms whose sum is the multiplication tensor.
/// The list order is kept for stable serialization; equality between schemes
/// ignores it (multiset semantics). Removal swaps with the last term.
class Scheme {
public:
    Scheme(Dims dims, std::vector<Term> terms);

    const Dims& dims() const { return dims_; }
    int rank() const { return static_cast<int>(terms_.size()); }

    const Term& term(int i) const { return terms_[static_cast<std::size_t>(i)]; }
    const std::vector<Term>& terms() const { return terms_; }

    /// Replaces one component; the new value must be nonzero and of the
    /// correct length.
    void set_component(int i, Slot s, const BitVector& v);

    void append_term(const Term& t);

    /// O(1) removal: the last term takes the freed index.
    void remove_term_swap(int i);

    /// Multiset equality over terms (term order ignored).
    bool operator==(const Scheme& other) const;

private:
    void check_term(const Term& t) const;

    Dims dims_;
    std::vector<Term> terms_;
};

/// The standard classical algorithm: one basis triple per scalar product,
/// n*m*p terms, enumerated with i outermost and k innermost.
Scheme standard_scheme(int n, int m, int p);

/// The rank-7 (2,2,2) scheme with signs collapsed to XOR.
Scheme strassen_scheme();

/// True iff the terms sum to the multiplication tensor: for every index
/// triple the parity of alpha[x]*beta[y]*gamma[z] over all terms equals
/// mul_tensor_entry. Exact and exhaustive; fine up to dimension 5.
bool verify(const Scheme& s);

/// GF(2) ranks of the stacked alpha, beta and gamma families. For any valid
/// scheme these are n*m, m*p and p*n.
std::array<int, 3> component_ranks(const Scheme& s);

}  // namespace mms
