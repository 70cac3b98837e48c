#pragma once

#include <cstdint>
#include <vector>

#include "mms/moves.hpp"
#include "mms/rng.hpp"
#include "mms/scheme.hpp"

namespace mms::test {

// Dense tensor of parities, computed straight from the definition of the
// term sum. Independent of verify()'s table layout; used as the
// recomposition oracle in move tests.
inline std::vector<std::uint8_t> tensor_table(const Scheme& s) {
    const Dims& d = s.dims();
    std::vector<std::uint8_t> table(
        static_cast<std::size_t>(d.nm()) * d.mp() * d.pn(), 0);
    for (const Term& t : s.terms())
        for (int x = 0; x < d.nm(); ++x)
            for (int y = 0; y < d.mp(); ++y)
                for (int z = 0; z < d.pn(); ++z)
                    if (t.alpha.test(x) && t.beta.test(y) && t.gamma.test(z))
                        table[(static_cast<std::size_t>(x) * d.mp() + y) *
                                  static_cast<std::size_t>(d.pn()) +
                              z] ^= 1;
    return table;
}

inline bool same_tensor(const Scheme& a, const Scheme& b) {
    return a.dims() == b.dims() && tensor_table(a) == tensor_table(b);
}

// Straight double-loop oracle for the flip edge set, written independently
// from enumerate_flips: ordered pairs sharing the slot component whose two
// moving components both differ.
inline std::vector<FlipMove> flip_oracle(const Scheme& s) {
    std::vector<FlipMove> out;
    for (Slot slot : {Slot::Alpha, Slot::Beta, Slot::Gamma}) {
        const Slot n = next(slot), t = next(next(slot));
        for (int i = 0; i < s.rank(); ++i)
            for (int j = 0; j < s.rank(); ++j)
                if (i != j && s.term(i).component(slot) == s.term(j).component(slot) &&
                    s.term(i).component(n) != s.term(j).component(n) &&
                    s.term(i).component(t) != s.term(j).component(t))
                    out.push_back({slot, i, j});
    }
    return out;
}

inline std::vector<PlusMove> plus_oracle(const Scheme& s) {
    std::vector<PlusMove> out;
    for (Slot slot : {Slot::Alpha, Slot::Beta, Slot::Gamma})
        for (int i = 0; i < s.rank(); ++i)
            for (int j = 0; j < s.rank(); ++j)
                if (i != j && s.term(i).alpha != s.term(j).alpha &&
                    s.term(i).beta != s.term(j).beta && s.term(i).gamma != s.term(j).gamma)
                    out.push_back({i, j, slot});
    return out;
}

// Random walk over legal moves (flips, plus, splits and the reductions that
// show up), used to fabricate valid schemes away from the standard ones.
inline Scheme random_walk(Scheme s, int steps, std::uint64_t seed, bool allow_rank_changes = true) {
    Xoshiro256ss rng(seed);
    for (int step = 0; step < steps; ++step) {
        const std::uint64_t kind = rng.bounded(allow_rank_changes ? 4 : 1);
        if (kind == 0) {
            const auto flips = enumerate_flips(s);
            if (!flips.empty())
                s = apply_flip(s, flips[static_cast<std::size_t>(rng.bounded(flips.size()))]);
        } else if (kind == 1) {
            const auto pluses = enumerate_plus_pairs(s);
            if (!pluses.empty() && s.rank() < 2 * s.dims().n * s.dims().m * s.dims().p)
                s = apply_plus(s, pluses[static_cast<std::size_t>(rng.bounded(pluses.size()))]);
        } else if (kind == 2) {
            const auto pairs = find_pairwise_reductions(s);
            if (!pairs.empty()) {
                const auto& pr = pairs[static_cast<std::size_t>(rng.bounded(pairs.size()))];
                s = apply_pairwise_reduction(s, pr.i, pr.j);
            }
        } else {
            const int idx = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(s.rank())));
            const Slot slot = static_cast<Slot>(rng.bounded(3));
            const int dt = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(s.rank())));
            const BitVector donor = s.term(dt).component(slot);
            if (donor != s.term(idx).component(slot) &&
                s.rank() < 2 * s.dims().n * s.dims().m * s.dims().p)
                s = apply_split(s, idx, slot, donor);
        }
    }
    return s;
}

}  // namespace mms::test
