#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "mms/moves.hpp"
#include "mms/scheme.hpp"

namespace mms {

/// One move of a replayable script. Indices refer to the term order of the
/// scheme at the moment the move is applied (removals swap the last term
/// into the freed index, appends go to the back).
struct PairwiseReduceMove {
    int i, j;
};
struct GeneralReduceMove {
    Slot slot;
    std::vector<int> group;
};
struct SplitMove {
    int idx;
    Slot slot;
    BitVector donor;
};

using Move = std::variant<FlipMove, PairwiseReduceMove, GeneralReduceMove, PlusMove, SplitMove>;

/// An executable path between two schemes of equal dimensions.
struct MoveScript {
    Dims dims;
    std::vector<Move> moves;
};

/// Applies one scripted move.
Scheme apply_move(const Scheme& s, const Move& mv);

/// Replays a script; with check_prefixes set every intermediate scheme is
/// verified and the walk aborts on the first invalid prefix.
Scheme replay(const Scheme& start, const MoveScript& script, bool check_prefixes = false);

/// Exhaustive bilinear check: evaluates the scheme on every 0/1 matrix pair
/// (A, B) over GF(2) and compares against the directly computed product.
/// Deliberately shares no tensor code with verify(). Only dimensions with
/// at most 2^20 pairs (n*m + m*p <= 20) are accepted.
bool brute_force_verify(const Scheme& s);

/// Whether brute_force_verify accepts these dimensions.
bool brute_force_feasible(const Dims& d);

/// Builds a move script transforming src into dst (as a multiset), executing
/// the constructive connectivity argument: rank padding, element-by-element
/// component rewrites driven by gf2_solve, and tail elimination through
/// basis-aligned general reductions. Every prefix of the script is a valid
/// scheme. Desk-scale guard: dimensions at most (2,2,3) componentwise.
MoveScript connectivity_path(const Scheme& src, const Scheme& dst);

}  // namespace mms
