#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mms/scheme.hpp"

namespace mms {

/// A flip between terms i and j sharing their `slot` component. Writing
/// n = next(slot) and t = next(n): term i receives the sum in component n,
/// term j receives the difference in component t. Over GF(2) both are XOR.
/// Applying the same move twice restores the scheme.
struct FlipMove {
    Slot slot;
    int i, j;

    bool operator==(const FlipMove&) const = default;
};

/// A plus transition between terms i and j differing in all three
/// components; `slot` selects which component plays the leading role (the
/// other two follow cyclically). Raises the rank by one.
struct PlusMove {
    int i, j;
    Slot slot;

    bool operator==(const PlusMove&) const = default;
};

/// A pair of terms agreeing on at least two components; bit s of
/// shared_mask is set when the components at Slot(s) are equal.
struct ReduciblePair {
    int i, j;
    std::uint8_t shared_mask;

    bool shares(Slot s) const { return (shared_mask >> static_cast<int>(s)) & 1u; }
};

/// Every legal flip among the active terms, ordered by (slot, i, j); both
/// orientations of a pair are listed. Pairs whose moving components
/// coincide would create a zero component and are excluded here: they are
/// exactly the pairwise-reducible pairs.
std::vector<FlipMove> enumerate_flips(const Scheme& s, const std::vector<int>& active);
std::vector<FlipMove> enumerate_flips(const Scheme& s);

/// Applies a flip; the move must be legal for s. Only terms i and j change.
Scheme apply_flip(const Scheme& s, const FlipMove& mv);

/// All unordered active pairs agreeing on two or more components, ordered
/// by ascending (i, j).
std::vector<ReduciblePair> find_pairwise_reductions(const Scheme& s,
                                                    const std::vector<int>& active);
std::vector<ReduciblePair> find_pairwise_reductions(const Scheme& s);

/// Merges terms i and j (which must agree on at least two components) into
/// one term carrying the XOR of the disagreeing component, or removes both
/// when they are identical. The merged term keeps the smaller index; freed
/// slots are filled by swapping in the last term.
Scheme apply_pairwise_reduction(const Scheme& s, int i, int j);

/// Scans, for each slot in alpha/beta/gamma order and for groups of active
/// terms with identical slot component in order of their smallest member,
/// for the first group whose summed outer products of the remaining two
/// components have GF(2) rank below the group size. That group is replaced
/// by the terms of the rank-one factorization; the rank drops by
/// |group| - rank. Returns nothing when no group qualifies.
std::optional<Scheme> general_reduction(const Scheme& s, const std::vector<int>& active);
std::optional<Scheme> general_reduction(const Scheme& s);

/// The scan behind general_reduction: the first qualifying (slot, group)
/// among the active terms, or nothing.
std::optional<std::pair<Slot, std::vector<int>>> find_general_reduction(
    const Scheme& s, const std::vector<int>& active);

/// Applies the reduction to one explicit group (all sharing the slot
/// component); throws unless the rank condition holds.
Scheme apply_general_reduction(const Scheme& s, Slot slot, const std::vector<int>& group);

/// Every ordered active pair differing in all three components, for each of
/// the three slots, ordered by (slot, i, j).
std::vector<PlusMove> enumerate_plus_pairs(const Scheme& s, const std::vector<int>& active);
std::vector<PlusMove> enumerate_plus_pairs(const Scheme& s);

/// Applies a plus transition: with s = mv.slot, n = next(s), t = next(n) and
/// (i, j) = (mv.i, mv.j), term i gets component n XORed with term j's, term
/// j gets term i's s component and component t XORed with term i's, and a
/// third term (s_i ^ s_j, n_j, t_j) is appended. Rank grows by one.
Scheme apply_plus(const Scheme& s, const PlusMove& mv);

/// Splits term idx at the given slot: its component x becomes donor and a
/// copy with component x ^ donor is appended. The donor must be nonzero,
/// differ from x, and occur as the slot component of some term of s.
Scheme apply_split(const Scheme& s, int idx, Slot slot, const BitVector& donor);

}  // namespace mms
