#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "mms/search.hpp"
#include "mms/witness.hpp"

using namespace mms;
using test::random_walk;

namespace {

// Random structural mutation that keeps the scheme well formed but usually
// breaks the tensor sum.
Scheme mutate(const Scheme& s, Xoshiro256ss& rng) {
    std::vector<Term> terms = s.terms();
    const std::uint64_t kind = rng.bounded(3);
    if (kind == 0 && terms.size() > 1) {
        terms.erase(terms.begin() +
                    static_cast<std::ptrdiff_t>(rng.bounded(terms.size())));
    } else if (kind == 1) {
        terms.push_back(terms[static_cast<std::size_t>(rng.bounded(terms.size()))]);
    } else {
        Term& t = terms[static_cast<std::size_t>(rng.bounded(terms.size()))];
        const Slot slot = static_cast<Slot>(rng.bounded(3));
        BitVector& c = t.component(slot);
        const int bit = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(c.length())));
        c ^= BitVector::unit(c.length(), bit);
        if (c.is_zero()) c = BitVector::unit(c.length(), bit);
    }
    return Scheme(s.dims(), std::move(terms));
}

void check_path(const Scheme& src, const Scheme& dst) {
    const MoveScript script = connectivity_path(src, dst);
    const Dims& d = src.dims();
    const int bound = dst.rank() + d.nm() + d.mp() + d.pn() + src.rank();

    Scheme cur = src;
    int peak = cur.rank();
    for (const Move& mv : script.moves) {
        cur = apply_move(cur, mv);
        peak = std::max(peak, cur.rank());
        REQUIRE(verify(cur));
        const auto ranks = component_ranks(cur);
        REQUIRE(ranks == std::array<int, 3>{d.nm(), d.mp(), d.pn()});
    }
    CHECK(cur == dst);
    CHECK(peak <= bound);
}

}  // namespace

TEST_CASE("brute force verification agrees with the examples") {
    CHECK(brute_force_verify(strassen_scheme()));
    CHECK(brute_force_verify(standard_scheme(2, 2, 3)));

    std::vector<Term> corrupted = strassen_scheme().terms();
    corrupted[3].beta ^= BitVector::unit(4, 2);
    if (corrupted[3].beta.is_zero()) corrupted[3].beta = BitVector::unit(4, 2);
    CHECK(!brute_force_verify(Scheme(Dims{2, 2, 2}, corrupted)));

    CHECK(brute_force_feasible(Dims{3, 3, 3}));       // 2^18 pairs
    CHECK(!brute_force_feasible(Dims{3, 3, 4}));      // 2^21 pairs
    CHECK_THROWS(brute_force_verify(standard_scheme(3, 3, 4)));
}

TEST_CASE("verify and brute force agree on mutated schemes") {
    Xoshiro256ss rng(77);
    int disagreements = 0, valid_seen = 0, invalid_seen = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Dims d = (trial % 2 == 0) ? Dims{2, 2, 2} : Dims{2, 2, 3};
        Scheme s = random_walk(standard_scheme(d.n, d.m, d.p), 25, 7000 + trial);
        if (rng.bounded(2) == 0) s = mutate(s, rng);
        const bool a = verify(s);
        const bool b = brute_force_verify(s);
        if (a != b) ++disagreements;
        (a ? valid_seen : invalid_seen)++;
    }
    CHECK(disagreements == 0);
    CHECK(valid_seen > 0);
    CHECK(invalid_seen > 0);
}

TEST_CASE("apply_move dispatches every move kind") {
    const Scheme s = standard_scheme(2, 2, 2);
    CHECK(apply_move(s, Move{FlipMove{Slot::Alpha, 0, 1}}).rank() == 8);
    CHECK(apply_move(s, Move{SplitMove{0, Slot::Alpha, BitVector::from_string("0001")}}).rank() ==
          9);
    const Scheme split = apply_split(s, 0, Slot::Alpha, BitVector::from_string("0001"));
    CHECK(apply_move(split, Move{PairwiseReduceMove{0, 8}}).rank() == 8);
}

TEST_CASE("identical endpoints give an empty script") {
    const Scheme a = standard_scheme(2, 2, 2);
    CHECK(connectivity_path(a, a).moves.empty());
    const Scheme b = strassen_scheme();
    CHECK(connectivity_path(b, b).moves.empty());
}

TEST_CASE("path from the standard scheme to Strassen and back") {
    check_path(standard_scheme(2, 2, 2), strassen_scheme());
    check_path(strassen_scheme(), standard_scheme(2, 2, 2));
}

TEST_CASE("paths between walked (2,2,2) and (2,2,3) schemes") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Scheme a = random_walk(standard_scheme(2, 2, 2), 40, 900 + seed);
        const Scheme b = random_walk(standard_scheme(2, 2, 2), 40, 950 + seed);
        check_path(a, b);
    }
    const Scheme a = random_walk(standard_scheme(2, 2, 3), 40, 990);
    check_path(a, standard_scheme(2, 2, 3));

    // A lower-rank endpoint forces phase-1 padding.
    Xoshiro256ss rng(31);
    Scheme reduced = standard_scheme(2, 2, 2);
    for (int it = 0; it < 50000 && reduced.rank() > 7; ++it)
        reduced = random_search_step(reduced, rng);
    REQUIRE(reduced.rank() == 7);
    check_path(reduced, standard_scheme(2, 2, 2));
    check_path(standard_scheme(2, 2, 2), reduced);
}

TEST_CASE("connectivity_path guards") {
    CHECK_THROWS(connectivity_path(standard_scheme(2, 2, 2), standard_scheme(2, 2, 3)));
    CHECK_THROWS(connectivity_path(standard_scheme(3, 3, 3), standard_scheme(3, 3, 3)));

    std::vector<Term> broken(standard_scheme(2, 2, 2).terms());
    broken.pop_back();
    CHECK_THROWS(
        connectivity_path(Scheme(Dims{2, 2, 2}, broken), standard_scheme(2, 2, 2)));
}

TEST_CASE("replay validates prefixes") {
    const Scheme src = standard_scheme(2, 2, 2);
    const MoveScript script = connectivity_path(src, strassen_scheme());
    const Scheme end = replay(src, script, true);
    CHECK(end == strassen_scheme());

    MoveScript bad = script;
    bad.dims = Dims{2, 2, 3};
    CHECK_THROWS(replay(src, bad, true));
}

TEST_CASE("paths pad larger rank gaps") {
    Xoshiro256ss rng(71);
    Scheme reduced = standard_scheme(2, 2, 3);
    for (int it = 0; it < 200000 && reduced.rank() > 11; ++it)
        reduced = random_search_step(reduced, rng);
    REQUIRE(reduced.rank() == 11);
    check_path(reduced, standard_scheme(2, 2, 3));
    check_path(standard_scheme(2, 2, 3), reduced);
}
