#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "mms/moves.hpp"

using namespace mms;
using test::flip_oracle;
using test::plus_oracle;
using test::random_walk;
using test::same_tensor;

namespace {

Scheme toy(std::initializer_list<std::array<const char*, 3>> rows) {
    std::vector<Term> terms;
    for (const auto& r : rows)
        terms.push_back({BitVector::from_string(r[0]), BitVector::from_string(r[1]),
                         BitVector::from_string(r[2])});
    return Scheme(Dims{2, 2, 2}, std::move(terms));
}

bool same_moves(std::vector<FlipMove> a, std::vector<FlipMove> b) {
    auto key = [](const FlipMove& m) {
        return std::make_tuple(static_cast<int>(m.slot), m.i, m.j);
    };
    auto lt = [&](const FlipMove& x, const FlipMove& y) { return key(x) < key(y); };
    std::sort(a.begin(), a.end(), lt);
    std::sort(b.begin(), b.end(), lt);
    return a == b;
}

}  // namespace

TEST_CASE("enumerate_flips matches the double-loop oracle") {
    const Scheme std222 = standard_scheme(2, 2, 2);
    const auto flips = enumerate_flips(std222);
    CHECK(flips.size() == 24);  // 4 two-term groups per slot, both orientations
    CHECK(same_moves(flips, flip_oracle(std222)));

    // Strassen's seven terms are pairwise distinct in every component, so the
    // flip set is empty; the oracle agrees.
    const Scheme str = strassen_scheme();
    CHECK(enumerate_flips(str).empty());
    CHECK(flip_oracle(str).empty());

    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Scheme s = random_walk(standard_scheme(2, 2, 2), 60, 200 + seed);
        CHECK(same_moves(enumerate_flips(s), flip_oracle(s)));
    }
}

TEST_CASE("enumerate_flips honours the active set") {
    const Scheme s = standard_scheme(2, 2, 2);
    CHECK(enumerate_flips(s, {}).empty());
    // Terms 0 and 1 are a11 b11 c11 and a11 b12 c21: one shared alpha pair.
    const auto flips = enumerate_flips(s, {0, 1});
    CHECK(flips.size() == 2);
    for (const auto& f : flips) CHECK(f.slot == Slot::Alpha);
    CHECK_THROWS(enumerate_flips(s, {0, 99}));
}

TEST_CASE("apply_flip follows the definition") {
    const Scheme s = standard_scheme(2, 2, 2);
    // Terms 0 and 1 share alpha = a11; beta moves on term 0, gamma on term 1.
    const Scheme t = apply_flip(s, {Slot::Alpha, 0, 1});
    CHECK(t.rank() == s.rank());
    CHECK(verify(t));
    CHECK(t.term(0).alpha == s.term(0).alpha);
    CHECK(t.term(0).beta == (s.term(0).beta ^ s.term(1).beta));   // b11 + b12
    CHECK(t.term(0).gamma == s.term(0).gamma);
    CHECK(t.term(1).beta == s.term(1).beta);
    CHECK(t.term(1).gamma == (s.term(1).gamma ^ s.term(0).gamma));  // c21 + c11
    // All other terms are bit-identical.
    for (int i = 2; i < s.rank(); ++i) CHECK(t.term(i) == s.term(i));

    CHECK_THROWS(apply_flip(s, {Slot::Alpha, 0, 0}));
    CHECK_THROWS(apply_flip(s, {Slot::Alpha, 0, 2}));  // alphas differ
}

TEST_CASE("a flip applied twice is the identity") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Scheme s = random_walk(standard_scheme(2, 2, 3), 40, 300 + seed);
        const auto flips = enumerate_flips(s);
        if (flips.empty()) continue;
        Xoshiro256ss rng(seed);
        const FlipMove mv = flips[static_cast<std::size_t>(rng.bounded(flips.size()))];
        const Scheme once = apply_flip(s, mv);
        CHECK(verify(once));
        const Scheme twice = apply_flip(once, mv);
        CHECK(twice.terms() == s.terms());
    }
}

TEST_CASE("rank is unchanged across many random flips") {
    Scheme s = standard_scheme(3, 3, 3);
    Xoshiro256ss rng(17);
    for (int step = 0; step < 1000; ++step) {
        const auto flips = enumerate_flips(s);
        REQUIRE(!flips.empty());
        s = apply_flip(s, flips[static_cast<std::size_t>(rng.bounded(flips.size()))]);
        CHECK(s.rank() == 27);
    }
    CHECK(verify(s));
}

TEST_CASE("pairwise reduction discovery") {
    // Basis terms never share two components.
    CHECK(find_pairwise_reductions(standard_scheme(2, 2, 2)).empty());

    const Scheme two_shared = toy({{"1000", "1000", "1000"}, {"1000", "1000", "0100"}});
    const auto pairs = find_pairwise_reductions(two_shared);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].i == 0);
    CHECK(pairs[0].j == 1);
    CHECK(pairs[0].shares(Slot::Alpha));
    CHECK(pairs[0].shares(Slot::Beta));
    CHECK(!pairs[0].shares(Slot::Gamma));

    const Scheme dup = toy({{"1000", "1000", "1000"}, {"1000", "1000", "1000"}});
    REQUIRE(find_pairwise_reductions(dup).size() == 1);
    CHECK(find_pairwise_reductions(dup)[0].shared_mask == 0b111);
}

TEST_CASE("apply_pairwise_reduction merges or cancels") {
    const Scheme two_shared = toy({{"1000", "1000", "1000"}, {"1000", "1000", "0100"}});
    const Scheme merged = apply_pairwise_reduction(two_shared, 0, 1);
    REQUIRE(merged.rank() == 1);
    CHECK(merged.term(0).gamma == BitVector::from_string("1100"));
    CHECK(same_tensor(two_shared, merged));

    const Scheme dup = toy({{"1000", "1000", "1000"}, {"0100", "0100", "0100"},
                            {"1000", "1000", "1000"}});
    const Scheme cancelled = apply_pairwise_reduction(dup, 0, 2);
    REQUIRE(cancelled.rank() == 1);
    CHECK(cancelled.term(0).alpha == BitVector::from_string("0100"));
    CHECK(same_tensor(dup, cancelled));

    CHECK_THROWS(apply_pairwise_reduction(standard_scheme(2, 2, 2), 0, 1));
}

TEST_CASE("pairwise reduction after a split restores the scheme") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Scheme s = random_walk(standard_scheme(2, 2, 2), 50, 400 + seed);
        Xoshiro256ss rng(seed);
        const int idx = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(s.rank())));
        const Slot slot = static_cast<Slot>(rng.bounded(3));
        const BitVector own = s.term(idx).component(slot);
        BitVector donor = own;
        for (int t = 0; t < s.rank(); ++t)
            if (s.term(t).component(slot) != own) donor = s.term(t).component(slot);
        if (donor == own) continue;

        const Scheme split = apply_split(s, idx, slot, donor);
        CHECK(split.rank() == s.rank() + 1);
        CHECK(verify(split));
        const Scheme back = apply_pairwise_reduction(split, idx, split.rank() - 1);
        CHECK(back == s);
    }
}

TEST_CASE("general reduction replaces a rank-deficient group") {
    // Group sharing alpha whose beta (x) gamma sum has rank 2 < 3.
    const Scheme s = toy({{"1000", "1000", "1000"},
                          {"1000", "0100", "0100"},
                          {"1000", "1100", "0010"},
                          {"0110", "0011", "1111"}});
    {
        // The oracle behind the expectation: gf2_rank of the summed outer
        // product is 2.
        GF2Matrix sum(4);
        std::vector<std::uint64_t> acc(4, 0);
        for (int g = 0; g < 3; ++g) {
            const Term& t = s.term(g);
            for (int r = 0; r < 4; ++r)
                if (t.beta.test(r)) acc[static_cast<std::size_t>(r)] ^= t.gamma.bits();
        }
        for (int r = 0; r < 4; ++r) sum.append_row(BitVector(4, acc[static_cast<std::size_t>(r)]));
        REQUIRE(gf2_rank(sum) == 2);
    }

    const auto reduced = general_reduction(s);
    REQUIRE(reduced.has_value());
    CHECK(reduced->rank() == 3);  // 4 - (3 - 2)
    CHECK(same_tensor(s, *reduced));
    for (const Term& t : reduced->terms()) CHECK(!t.has_zero_component());

    CHECK(!general_reduction(standard_scheme(2, 2, 2)).has_value());

    // A pairwise-reducible pair also qualifies as a group.
    const Scheme pairable = toy({{"1000", "1000", "1000"}, {"1000", "1000", "0100"}});
    const auto via_general = general_reduction(pairable);
    REQUIRE(via_general.has_value());
    CHECK(via_general->rank() == 1);
    CHECK(same_tensor(pairable, *via_general));
}

TEST_CASE("general reduction can erase a zero-sum group") {
    // (b1+b2)(g1+g2) cancels the four pure products, so the five
    // alpha-sharing terms sum to the zero tensor and the group vanishes.
    const Scheme s = toy({{"1000", "1100", "1100"},
                          {"1000", "1000", "1000"},
                          {"1000", "1000", "0100"},
                          {"1000", "0100", "1000"},
                          {"1000", "0100", "0100"},
                          {"0110", "0011", "1111"}});
    std::vector<std::uint64_t> acc(4, 0);
    for (int g = 0; g < 5; ++g) {
        const Term& t = s.term(g);
        for (int r = 0; r < 4; ++r)
            if (t.beta.test(r)) acc[static_cast<std::size_t>(r)] ^= t.gamma.bits();
    }
    bool all_zero = true;
    for (auto w : acc) all_zero = all_zero && w == 0;
    REQUIRE(all_zero);

    const auto reduced = general_reduction(s);
    REQUIRE(reduced.has_value());
    CHECK(reduced->rank() == 1);
    CHECK(same_tensor(s, *reduced));
}

TEST_CASE("plus pair enumeration") {
    const Scheme dup = toy({{"1000", "1000", "1000"}, {"1000", "1000", "1000"}});
    CHECK(enumerate_plus_pairs(dup).empty());

    const Scheme std222 = standard_scheme(2, 2, 2);
    const auto pluses = enumerate_plus_pairs(std222);
    const auto oracle = plus_oracle(std222);
    CHECK(pluses.size() == oracle.size());

    const Scheme str = strassen_scheme();
    CHECK(enumerate_plus_pairs(str).size() == plus_oracle(str).size());
    CHECK(enumerate_plus_pairs(str).size() == 3u * 7u * 6u);  // all pairs differ everywhere
}

TEST_CASE("apply_plus raises the rank by one and keeps the sum") {
    const Scheme s = standard_scheme(2, 2, 2);
    // a11 b11 c11 and a22 b22 c22 differ in all three components.
    int i = -1, j = -1;
    for (int t = 0; t < s.rank(); ++t) {
        if (s.term(t).alpha == BitVector::from_string("1000") &&
            s.term(t).beta == BitVector::from_string("1000"))
            i = t;
        if (s.term(t).alpha == BitVector::from_string("0001") &&
            s.term(t).beta == BitVector::from_string("0001"))
            j = t;
    }
    REQUIRE(i >= 0);
    REQUIRE(j >= 0);
    const Scheme t = apply_plus(s, {i, j, Slot::Alpha});
    CHECK(t.rank() == s.rank() + 1);
    CHECK(verify(t));

    for (Slot slot : {Slot::Alpha, Slot::Beta, Slot::Gamma}) {
        const Scheme u = apply_plus(s, {i, j, slot});
        CHECK(u.rank() == 9);
        CHECK(verify(u));
    }
    CHECK_THROWS(apply_plus(s, {0, 1, Slot::Alpha}));  // shares alpha
}

TEST_CASE("a plus can be undone within one flip") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Scheme s = random_walk(standard_scheme(2, 2, 2), 30, 500 + seed);
        for (;;) {  // settle to a reduction-free state first
            const auto pairs = find_pairwise_reductions(s);
            if (pairs.empty()) break;
            s = apply_pairwise_reduction(s, pairs.front().i, pairs.front().j);
        }
        const auto pluses = enumerate_plus_pairs(s);
        if (pluses.empty()) continue;
        Xoshiro256ss rng(seed);
        const Scheme plussed =
            apply_plus(s, pluses[static_cast<std::size_t>(rng.bounded(pluses.size()))]);

        // A pairwise reduction is reachable in at most one flip.
        bool undoable = !find_pairwise_reductions(plussed).empty();
        for (const FlipMove& f : enumerate_flips(plussed)) {
            if (undoable) break;
            if (!find_pairwise_reductions(apply_flip(plussed, f)).empty()) undoable = true;
        }
        CHECK(undoable);
    }
}

TEST_CASE("apply_split contract") {
    const Scheme s = standard_scheme(2, 2, 2);
    const BitVector donor = BitVector::from_string("0001");  // a22, present
    const Scheme t = apply_split(s, 0, Slot::Alpha, donor);
    CHECK(t.rank() == 9);
    CHECK(verify(t));
    CHECK(t.term(0).alpha == donor);
    CHECK(t.term(8).alpha == (BitVector::from_string("1000") ^ donor));
    CHECK(t.term(8).beta == s.term(0).beta);
    CHECK(t.term(8).gamma == s.term(0).gamma);

    CHECK_THROWS(apply_split(s, 0, Slot::Alpha, s.term(0).alpha));           // donor == component
    CHECK_THROWS(apply_split(s, 0, Slot::Alpha, BitVector::from_string("1010")));  // absent
}

TEST_CASE("long random move sequences preserve every invariant") {
    for (const Dims d : {Dims{2, 2, 2}, Dims{2, 3, 2}, Dims{3, 3, 3}}) {
        Scheme s = standard_scheme(d.n, d.m, d.p);
        Xoshiro256ss rng(42);
        const auto base = test::tensor_table(s);
        for (int step = 0; step < 1000; ++step) {
            const int before = s.rank();
            const std::uint64_t kind = rng.bounded(4);
            int expected_delta = 0;
            if (kind == 0) {
                const auto flips = enumerate_flips(s);
                if (flips.empty()) continue;
                s = apply_flip(s, flips[static_cast<std::size_t>(rng.bounded(flips.size()))]);
            } else if (kind == 1) {
                const auto pairs = find_pairwise_reductions(s);
                if (pairs.empty()) continue;
                const auto& pr = pairs[static_cast<std::size_t>(rng.bounded(pairs.size()))];
                expected_delta = pr.shared_mask == 0b111 ? -2 : -1;
                s = apply_pairwise_reduction(s, pr.i, pr.j);
            } else if (kind == 2) {
                if (s.rank() >= 2 * d.n * d.m * d.p) continue;
                const auto pluses = enumerate_plus_pairs(s);
                if (pluses.empty()) continue;
                expected_delta = 1;
                s = apply_plus(s, pluses[static_cast<std::size_t>(rng.bounded(pluses.size()))]);
            } else {
                if (s.rank() >= 2 * d.n * d.m * d.p) continue;
                const int idx = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(s.rank())));
                const Slot slot = static_cast<Slot>(rng.bounded(3));
                const int dt = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(s.rank())));
                const BitVector donor = s.term(dt).component(slot);
                if (donor == s.term(idx).component(slot)) continue;
                expected_delta = 1;
                s = apply_split(s, idx, slot, donor);
            }
            REQUIRE(s.rank() == before + expected_delta);
            for (const Term& t : s.terms()) REQUIRE(!t.has_zero_component());
            if (step % 50 == 0) {
                REQUIRE(verify(s));
                REQUIRE(test::tensor_table(s) == base);
                const auto ranks = component_ranks(s);
                REQUIRE(ranks == std::array<int, 3>{d.nm(), d.mp(), d.pn()});
            }
        }
        CHECK(verify(s));
    }
}
