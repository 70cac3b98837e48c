#include "mms/witness.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <stdexcept>

#include "mms/gf2.hpp"

namespace mms {

Scheme apply_move(const Scheme& s, const Move& mv) {
    return std::visit(
        [&](const auto& m) -> Scheme {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FlipMove>) return apply_flip(s, m);
            else if constexpr (std::is_same_v<T, PairwiseReduceMove>)
                return apply_pairwise_reduction(s, m.i, m.j);
            else if constexpr (std::is_same_v<T, GeneralReduceMove>)
                return apply_general_reduction(s, m.slot, m.group);
            else if constexpr (std::is_same_v<T, PlusMove>) return apply_plus(s, m);
            else return apply_split(s, m.idx, m.slot, m.donor);
        },
        mv);
}

Scheme replay(const Scheme& start, const MoveScript& script, bool check_prefixes) {
    if (start.dims() != script.dims)
        throw std::invalid_argument("replay: scheme dimensions differ from script dimensions");
    Scheme cur = start;
    std::size_t step = 0;
    for (const Move& mv : script.moves) {
        cur = apply_move(cur, mv);
        ++step;
        if (check_prefixes && !verify(cur))
            throw std::runtime_error("replay: invalid scheme after move " + std::to_string(step));
    }
    return cur;
}

bool brute_force_feasible(const Dims& d) { return d.nm() + d.mp() <= 20; }

bool brute_force_verify(const Scheme& s) {
    const Dims& d = s.dims();
    if (!brute_force_feasible(d))
        throw std::invalid_argument(
            "brute_force_verify: more than 2^20 matrix pairs; use verify instead");

    const std::uint64_t a_count = 1ull << d.nm();
    const std::uint64_t b_count = 1ull << d.mp();
    for (std::uint64_t a = 0; a < a_count; ++a) {
        for (std::uint64_t b = 0; b < b_count; ++b) {
            // Evaluate the scheme bilinearly: each term contributes its gamma
            // word when both of its linear forms are odd on (A, B).
            std::uint64_t cbits = 0;
            for (const Term& t : s.terms()) {
                const bool left = std::popcount(t.alpha.bits() & a) & 1;
                const bool right = std::popcount(t.beta.bits() & b) & 1;
                if (left && right) cbits ^= t.gamma.bits();
            }
            // Direct product over GF(2).
            for (int i = 0; i < d.n; ++i) {
                for (int k = 0; k < d.p; ++k) {
                    unsigned direct = 0;
                    for (int j = 0; j < d.m; ++j)
                        direct ^= ((a >> (i * d.m + j)) & 1u) & ((b >> (j * d.p + k)) & 1u);
                    if (((cbits >> (k * d.n + i)) & 1u) != direct) return false;
                }
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Connectivity path construction.
//
// Phase 1 pads the source rank with plus transitions. Phase 2 turns one
// spare term after another into the next target element, rewriting its
// alpha, beta and gamma through split chains whose donors come from a
// gf2_solve certificate over the other terms' components. Phase 3 splits
// the remaining zero-sum tail until every tail alpha is a basis vector and
// wipes the resulting groups with general reductions.
// ---------------------------------------------------------------------------

namespace {

class PathBuilder {
public:
    PathBuilder(const Scheme& src, const Scheme& dst)
        : cur_(src), dst_(dst), matched_(static_cast<std::size_t>(src.rank()), 0) {}

    MoveScript build() {
        pad_rank();
        for (int k = 0; k < dst_.rank(); ++k) {
            match_element(k);
            cleanup_unmatched();
        }
        eliminate_tail();
        if (!(cur_ == dst_))
            throw std::runtime_error("connectivity_path: construction did not reach the target");
        return MoveScript{dst_.dims(), std::move(moves_)};
    }

private:
    // --- recording wrappers keeping matched_ aligned with term indices ---

    void do_flip(const FlipMove& mv) {
        cur_ = apply_flip(cur_, mv);
        moves_.emplace_back(mv);
    }

    void do_plus(const PlusMove& mv) {
        cur_ = apply_plus(cur_, mv);
        matched_.push_back(0);
        moves_.emplace_back(mv);
    }

    void do_split(int idx, Slot slot, const BitVector& donor) {
        if (cur_.rank() >= 64)
            throw std::runtime_error("connectivity_path: guard exceeded, rank grew past 64");
        cur_ = apply_split(cur_, idx, slot, donor);
        matched_.push_back(0);
        moves_.emplace_back(SplitMove{idx, slot, donor});
    }

    void do_pairwise(int i, int j) {
        const Term& a = cur_.term(i);
        const Term& b = cur_.term(j);
        const bool duplicates = a == b;
        cur_ = apply_pairwise_reduction(cur_, i, j);
        const int lo = std::min(i, j), hi = std::max(i, j);
        matched_swap_remove(hi);
        if (duplicates) matched_swap_remove(lo);
        moves_.emplace_back(PairwiseReduceMove{i, j});
    }

    void do_general(Slot slot, const std::vector<int>& group) {
        const int old_rank = cur_.rank();
        cur_ = apply_general_reduction(cur_, slot, group);
        const auto factor_count = static_cast<std::size_t>(
            cur_.rank() - (old_rank - static_cast<int>(group.size())));
        std::vector<int> doomed = group;
        std::sort(doomed.begin(), doomed.end(), std::greater<int>());
        for (int g : doomed) matched_swap_remove(g);
        matched_.insert(matched_.end(), factor_count, 0);
        moves_.emplace_back(GeneralReduceMove{slot, group});
    }

    void matched_swap_remove(int idx) {
        matched_[static_cast<std::size_t>(idx)] = matched_.back();
        matched_.pop_back();
    }

    // --- phase 1: rank padding ---

    void pad_rank() {
        while (cur_.rank() < dst_.rank()) {
            const auto pluses = enumerate_plus_pairs(cur_);
            if (!pluses.empty()) {
                do_plus(pluses.front());
                continue;
            }
            // Degenerate fallback: split the first term by the first foreign
            // alpha value (one exists, the alphas span the full space).
            const BitVector& own = cur_.term(0).alpha;
            bool done = false;
            for (int t = 1; t < cur_.rank() && !done; ++t) {
                if (cur_.term(t).alpha != own) {
                    do_split(0, Slot::Alpha, cur_.term(t).alpha);
                    done = true;
                }
            }
            if (!done)
                throw std::runtime_error("connectivity_path: cannot raise the rank");
        }
    }

    // --- phase 2: element matching ---

    void match_element(int k) {
        const Term& target = dst_.term(k);

        // Start from the spare term agreeing with the target in the most
        // components; fewer components need rewriting.
        int w = -1, best_score = -1;
        for (int i = 0; i < cur_.rank(); ++i) {
            if (matched_[static_cast<std::size_t>(i)]) continue;
            const Term& t = cur_.term(i);
            const int score = (t.alpha == target.alpha) + (t.beta == target.beta) +
                              (t.gamma == target.gamma);
            if (score > best_score) {
                best_score = score;
                w = i;
            }
        }
        if (w < 0) throw std::runtime_error("connectivity_path: no spare term left");

        w = morph_component(w, Slot::Alpha, target.alpha);
        w = morph_component(w, Slot::Beta, target.beta);
        w = morph_component(w, Slot::Gamma, target.gamma);
        matched_[static_cast<std::size_t>(w)] = 1;
    }

    // Rewrites the slot component of term u into the target value through a
    // chain of splits and returns the index now carrying it. Donor values
    // come from a linear-combination certificate over the other terms, so
    // they all exist in the scheme for the whole chain.
    int morph_component(int u, Slot slot, const BitVector& target) {
        for (int round = 0;; ++round) {
            BitVector value = cur_.term(u).component(slot);
            if (value == target) return u;
            if (round > 2)
                throw std::runtime_error("connectivity_path: component rewrite did not settle");

            // A row basis of the other terms' components keeps the donor
            // certificate short (at most the space dimension).
            GF2Matrix basis(value.length());
            for (int t = 0; t < cur_.rank(); ++t) {
                if (t == u) continue;
                basis.append_row(cur_.term(t).component(slot));
                if (gf2_rank(basis) < basis.row_count()) basis.rows.pop_back();
            }

            const auto sol = gf2_solve(basis, value ^ target);
            if (!sol) {
                // The remaining rows miss the difference; one preliminary
                // split by any foreign value makes them span the full space.
                for (int t = 0; t < cur_.rank(); ++t) {
                    if (cur_.term(t).component(slot) != value) {
                        do_split(u, slot, cur_.term(t).component(slot));
                        break;
                    }
                }
                continue;
            }

            std::vector<BitVector> remaining;
            for (int q = 0; q < sol->length(); ++q)
                if (sol->test(q)) remaining.push_back(basis.rows[static_cast<std::size_t>(q)]);

            int widx = u;
            while (value != target) {
                // A donor differing from the current value always exists:
                // otherwise the leftover XOR would force a zero target.
                std::size_t pick = remaining.size();
                for (std::size_t q = 0; q < remaining.size(); ++q)
                    if (remaining[q] != value) {
                        pick = q;
                        break;
                    }
                if (pick == remaining.size())
                    throw std::runtime_error("connectivity_path: donor scheduling failed");
                const BitVector donor = remaining[pick];
                remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
                do_split(widx, slot, donor);
                widx = cur_.rank() - 1;
                value ^= donor;
            }
            return widx;
        }
    }

    // --- cleanup between elements: merge and reduce coincident spares ---

    void cleanup_unmatched() {
        bool again = true;
        while (again) {
            again = false;
            for (int i = 0; i < cur_.rank() && !again; ++i) {
                if (matched_[static_cast<std::size_t>(i)]) continue;
                for (int j = i + 1; j < cur_.rank() && !again; ++j) {
                    if (matched_[static_cast<std::size_t>(j)]) continue;
                    const Term& a = cur_.term(i);
                    const Term& b = cur_.term(j);
                    const int shared = (a.alpha == b.alpha) + (a.beta == b.beta) +
                                       (a.gamma == b.gamma);
                    if (shared >= 2) {
                        do_pairwise(i, j);
                        again = true;
                    }
                }
            }
            if (!again) {
                const auto found = find_general_reduction(cur_, unmatched_indices());
                if (found) {
                    do_general(found->first, found->second);
                    again = true;
                }
            }
        }
    }

    // --- phase 3: tail elimination ---

    std::vector<int> unmatched_indices() const {
        std::vector<int> idx;
        for (int i = 0; i < cur_.rank(); ++i)
            if (!matched_[static_cast<std::size_t>(i)]) idx.push_back(i);
        return idx;
    }

    void reduce_unmatched_groups() {
        for (;;) {
            const auto found = find_general_reduction(cur_, unmatched_indices());
            if (!found) return;
            do_general(found->first, found->second);
        }
    }

    void eliminate_tail() {
        const int nm = cur_.dims().nm();

        // Split every spare term down to unit alpha support, manufacturing a
        // missing unit donor by a component rewrite when needed. Opportunistic
        // group reductions keep the rank in check along the way.
        for (;;) {
            reduce_unmatched_groups();
            int t = -1;
            for (int i = 0; i < cur_.rank(); ++i)
                if (!matched_[static_cast<std::size_t>(i)] &&
                    cur_.term(i).alpha.popcount() >= 2) {
                    t = i;
                    break;
                }
            if (t < 0) break;

            const int bit = std::countr_zero(cur_.term(t).alpha.bits());
            const BitVector unit = BitVector::unit(nm, bit);
            bool present = false;
            for (int i = 0; i < cur_.rank() && !present; ++i)
                present = cur_.term(i).alpha == unit;
            if (present)
                do_split(t, Slot::Alpha, unit);
            else
                morph_component(t, Slot::Alpha, unit);
        }

        // Every spare alpha is now a unit vector, so the zero-sum tail falls
        // apart into per-unit groups with vanishing beta-gamma sums; group
        // reductions remove them entirely.
        reduce_unmatched_groups();

        if (!unmatched_indices().empty())
            throw std::runtime_error("connectivity_path: tail elimination left spare terms");
    }

    Scheme cur_;
    const Scheme& dst_;
    std::vector<std::uint8_t> matched_;
    std::vector<Move> moves_;
};

}  // namespace

MoveScript connectivity_path(const Scheme& src, const Scheme& dst) {
    if (src.dims() != dst.dims())
        throw std::invalid_argument("connectivity_path: schemes have different dimensions");
    const Dims& d = src.dims();
    if (d.n > 2 || d.m > 2 || d.p > 3)
        throw std::invalid_argument(
            "connectivity_path: guard exceeded, dimensions are limited to (2,2,3)");
    if (!verify(src) || !verify(dst))
        throw std::invalid_argument("connectivity_path: both endpoints must be valid schemes");

    return PathBuilder(src, dst).build();
}

}  // namespace mms
