#include "mms/moves.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace mms {

namespace {

// Debug builds re-verify the tensor sum after every move: a move applied to
// a valid scheme must yield a valid scheme.
Scheme checked(const Scheme& in, Scheme out) {
    assert(!verify(in) || verify(out));
    (void)in;
    return out;
}

std::vector<int> all_indices(const Scheme& s) {
    std::vector<int> idx(static_cast<std::size_t>(s.rank()));
    for (int i = 0; i < s.rank(); ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
}

std::vector<int> normalized(const Scheme& s, const std::vector<int>& active) {
    std::vector<int> idx = active;
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    if (!idx.empty() && (idx.front() < 0 || idx.back() >= s.rank()))
        throw std::out_of_range("active index out of range");
    return idx;
}

std::uint8_t shared_mask_of(const Term& a, const Term& b) {
    std::uint8_t mask = 0;
    if (a.alpha == b.alpha) mask |= 1u << static_cast<int>(Slot::Alpha);
    if (a.beta == b.beta) mask |= 1u << static_cast<int>(Slot::Beta);
    if (a.gamma == b.gamma) mask |= 1u << static_cast<int>(Slot::Gamma);
    return mask;
}

constexpr Slot kSlots[3] = {Slot::Alpha, Slot::Beta, Slot::Gamma};

}  // namespace

std::vector<FlipMove> enumerate_flips(const Scheme& s, const std::vector<int>& active) {
    const std::vector<int> idx = normalized(s, active);
    std::vector<FlipMove> moves;
    for (Slot slot : kSlots) {
        const Slot n = next(slot), t = next(n);
        for (int i : idx) {
            for (int j : idx) {
                if (i == j) continue;
                const Term& a = s.term(i);
                const Term& b = s.term(j);
                if (a.component(slot) == b.component(slot) &&
                    a.component(n) != b.component(n) && a.component(t) != b.component(t))
                    moves.push_back({slot, i, j});
            }
        }
    }
    return moves;
}

std::vector<FlipMove> enumerate_flips(const Scheme& s) {
    return enumerate_flips(s, all_indices(s));
}

Scheme apply_flip(const Scheme& s, const FlipMove& mv) {
    if (mv.i == mv.j || mv.i < 0 || mv.j < 0 || mv.i >= s.rank() || mv.j >= s.rank())
        throw std::invalid_argument("apply_flip: bad term indices");
    const Slot n = next(mv.slot), t = next(n);
    const Term& a = s.term(mv.i);
    const Term& b = s.term(mv.j);
    if (a.component(mv.slot) != b.component(mv.slot))
        throw std::invalid_argument("apply_flip: terms do not share the flip slot");
    if (a.component(n) == b.component(n) || a.component(t) == b.component(t))
        throw std::invalid_argument("apply_flip: move would create a zero component");

    Scheme out = s;
    out.set_component(mv.i, n, a.component(n) ^ b.component(n));
    out.set_component(mv.j, t, b.component(t) ^ a.component(t));
    return checked(s, std::move(out));
}

std::vector<ReduciblePair> find_pairwise_reductions(const Scheme& s,
                                                    const std::vector<int>& active) {
    const std::vector<int> idx = normalized(s, active);
    std::vector<ReduciblePair> pairs;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const std::uint8_t mask = shared_mask_of(s.term(idx[a]), s.term(idx[b]));
            if (std::popcount(mask) >= 2) pairs.push_back({idx[a], idx[b], mask});
        }
    }
    return pairs;
}

std::vector<ReduciblePair> find_pairwise_reductions(const Scheme& s) {
    return find_pairwise_reductions(s, all_indices(s));
}

Scheme apply_pairwise_reduction(const Scheme& s, int i, int j) {
    if (i == j || i < 0 || j < 0 || i >= s.rank() || j >= s.rank())
        throw std::invalid_argument("apply_pairwise_reduction: bad term indices");
    const std::uint8_t mask = shared_mask_of(s.term(i), s.term(j));
    if (std::popcount(mask) < 2)
        throw std::invalid_argument("apply_pairwise_reduction: terms share fewer than two components");

    const int lo = std::min(i, j), hi = std::max(i, j);
    Scheme out = s;
    if (mask == 0b111) {
        // Exact duplicates cancel.
        out.remove_term_swap(hi);
        out.remove_term_swap(lo);
        return checked(s, std::move(out));
    }
    Slot d = Slot::Alpha;
    for (Slot slot : kSlots)
        if (!((mask >> static_cast<int>(slot)) & 1u)) d = slot;
    out.set_component(lo, d, s.term(i).component(d) ^ s.term(j).component(d));
    out.remove_term_swap(hi);
    return checked(s, std::move(out));
}

Scheme apply_general_reduction(const Scheme& s, Slot slot, const std::vector<int>& group) {
    if (group.size() < 2)
        throw std::invalid_argument("apply_general_reduction: group needs at least two terms");
    const Slot n = next(slot), t = next(n);
    const BitVector shared = s.term(group.front()).component(slot);
    for (int g : group)
        if (s.term(g).component(slot) != shared)
            throw std::invalid_argument("apply_general_reduction: group does not share the slot component");

    // Sum of outer products of the two remaining components.
    const int rows = s.term(group.front()).component(n).length();
    const int cols = s.term(group.front()).component(t).length();
    std::vector<std::uint64_t> acc(static_cast<std::size_t>(rows), 0);
    for (int g : group) {
        std::uint64_t nb = s.term(g).component(n).bits();
        const std::uint64_t tb = s.term(g).component(t).bits();
        while (nb) {
            acc[static_cast<std::size_t>(std::countr_zero(nb))] ^= tb;
            nb &= nb - 1;
        }
    }
    GF2Matrix m(cols);
    m.rows.reserve(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) m.rows.push_back(BitVector(cols, acc[static_cast<std::size_t>(r)]));

    const auto factors = gf2_rank_one_factorization(m);
    if (factors.size() >= group.size())
        throw std::invalid_argument("apply_general_reduction: group is not rank deficient");

    Scheme out = s;
    std::vector<int> doomed = group;
    std::sort(doomed.begin(), doomed.end(), std::greater<int>());
    for (int g : doomed) out.remove_term_swap(g);
    for (const auto& [col, row] : factors) {
        Term nt;
        nt.component(slot) = shared;
        nt.component(n) = col;
        nt.component(t) = row;
        out.append_term(nt);
    }
    return checked(s, std::move(out));
}

std::optional<std::pair<Slot, std::vector<int>>> find_general_reduction(
    const Scheme& s, const std::vector<int>& active) {
    const std::vector<int> idx = normalized(s, active);
    for (Slot slot : kSlots) {
        std::vector<bool> visited(idx.size(), false);
        for (std::size_t a = 0; a < idx.size(); ++a) {
            if (visited[a]) continue;
            std::vector<int> group{idx[a]};
            for (std::size_t b = a + 1; b < idx.size(); ++b) {
                if (visited[b]) continue;
                if (s.term(idx[a]).component(slot) == s.term(idx[b]).component(slot)) {
                    visited[b] = true;
                    group.push_back(idx[b]);
                }
            }
            if (group.size() < 2) continue;

            const Slot n = next(slot), t = next(n);
            const int rows = s.term(group.front()).component(n).length();
            std::vector<std::uint64_t> acc(static_cast<std::size_t>(rows), 0);
            for (int g : group) {
                std::uint64_t nb = s.term(g).component(n).bits();
                const std::uint64_t tb = s.term(g).component(t).bits();
                while (nb) {
                    acc[static_cast<std::size_t>(std::countr_zero(nb))] ^= tb;
                    nb &= nb - 1;
                }
            }
            const int cols = s.term(group.front()).component(t).length();
            GF2Matrix m(cols);
            for (int r = 0; r < rows; ++r)
                m.rows.push_back(BitVector(cols, acc[static_cast<std::size_t>(r)]));
            if (gf2_rank(m) < static_cast<int>(group.size()))
                return std::make_pair(slot, group);
        }
    }
    return std::nullopt;
}

std::optional<Scheme> general_reduction(const Scheme& s, const std::vector<int>& active) {
    const auto found = find_general_reduction(s, active);
    if (!found) return std::nullopt;
    return apply_general_reduction(s, found->first, found->second);
}

std::optional<Scheme> general_reduction(const Scheme& s) {
    return general_reduction(s, all_indices(s));
}

std::vector<PlusMove> enumerate_plus_pairs(const Scheme& s, const std::vector<int>& active) {
    const std::vector<int> idx = normalized(s, active);
    std::vector<PlusMove> moves;
    for (Slot slot : kSlots) {
        for (int i : idx) {
            for (int j : idx) {
                if (i == j) continue;
                if (shared_mask_of(s.term(i), s.term(j)) == 0) moves.push_back({i, j, slot});
            }
        }
    }
    return moves;
}

std::vector<PlusMove> enumerate_plus_pairs(const Scheme& s) {
    return enumerate_plus_pairs(s, all_indices(s));
}

Scheme apply_plus(const Scheme& s, const PlusMove& mv) {
    if (mv.i == mv.j || mv.i < 0 || mv.j < 0 || mv.i >= s.rank() || mv.j >= s.rank())
        throw std::invalid_argument("apply_plus: bad term indices");
    if (shared_mask_of(s.term(mv.i), s.term(mv.j)) != 0)
        throw std::invalid_argument("apply_plus: terms must differ in all three components");

    const Slot sl = mv.slot, n = next(sl), t = next(n);
    const Term a = s.term(mv.i);
    const Term b = s.term(mv.j);

    Scheme out = s;
    out.set_component(mv.i, n, a.component(n) ^ b.component(n));
    out.set_component(mv.j, sl, a.component(sl));
    out.set_component(mv.j, t, b.component(t) ^ a.component(t));
    Term fresh;
    fresh.component(sl) = a.component(sl) ^ b.component(sl);
    fresh.component(n) = b.component(n);
    fresh.component(t) = b.component(t);
    out.append_term(fresh);
    return checked(s, std::move(out));
}

Scheme apply_split(const Scheme& s, int idx, Slot slot, const BitVector& donor) {
    if (idx < 0 || idx >= s.rank())
        throw std::invalid_argument("apply_split: bad term index");
    if (donor.is_zero())
        throw std::invalid_argument("apply_split: donor is zero");
    const BitVector old = s.term(idx).component(slot);
    if (donor == old)
        throw std::invalid_argument("apply_split: donor equals the component being split");
    bool present = false;
    for (const Term& t : s.terms())
        if (t.component(slot) == donor) { present = true; break; }
    if (!present)
        throw std::invalid_argument("apply_split: donor does not occur in the scheme");

    Scheme out = s;
    out.set_component(idx, slot, donor);
    Term rest = s.term(idx);
    rest.component(slot) = old ^ donor;
    out.append_term(rest);
    return checked(s, std::move(out));
}

}  // namespace mms
