#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mms/moves.hpp"
#include "mms/rng.hpp"
#include "mms/scheme.hpp"

namespace mms {

/// Active sub-box of the search: a term may be touched by moves only when
/// its alpha support lies in the top-left n1 x m1 block, its beta support in
/// the m1 x p1 block and its gamma support in the p1 x n1 block.
struct Constraint {
    int n1 = 2, m1 = 2, p1 = 2;

    bool operator==(const Constraint&) const = default;

    struct Masks {
        std::uint64_t alpha = 0, beta = 0, gamma = 0;
    };
    Masks masks(const Dims& d) const;

    bool is_unconstrained(const Dims& d) const { return n1 == d.n && m1 == d.m && p1 == d.p; }
    void validate(const Dims& d) const;
};

inline bool term_in_box(const Term& t, const Constraint::Masks& mk) {
    return (t.alpha.bits() & ~mk.alpha) == 0 && (t.beta.bits() & ~mk.beta) == 0 &&
           (t.gamma.bits() & ~mk.gamma) == 0;
}

struct ScheduleStage {
    Constraint box;
    std::uint64_t iterations = 0;

    bool operator==(const ScheduleStage&) const = default;
};

/// The staged constraint schedule: n+m+p-5 stages starting at (2,2,2); after
/// each stage the smallest box dimension still below its target grows by one
/// (ties resolved in n, m, p order), ending unconstrained. Stage budgets
/// carve total_budget at split points equally spaced on a logarithmic scale
/// spanning two decades, so the first stage receives about total/100.
std::vector<ScheduleStage> default_schedule(int n, int m, int p, std::uint64_t total_budget);

struct SearchParams {
    Dims dims;
    std::uint64_t seed = 0;
    std::vector<ScheduleStage> schedule;

    std::uint64_t plus_flag = 5000;           // L: stall length triggering a plus
    bool plus_enabled = true;
    bool plus_in_constrained_stages = false;  // default: plus only in the final stage
    std::uint32_t restarts = 1;               // R: chained passes over the schedule
    std::uint64_t gr_period = 1000;           // G: general-reduction attempt period
    std::uint64_t checkpoint_every = 0;       // 0 disables checkpointing
    std::string checkpoint_path;
    std::uint64_t trace_stride = 1000;

    std::uint64_t iterations_per_pass() const;
    void validate() const;
};

struct TraceRow {
    std::uint64_t iteration = 0;
    int current_rank = 0;
    int best_rank = 0;
};

struct SearchStats {
    std::vector<TraceRow> trace;

    std::uint64_t iterations = 0;
    std::uint64_t flips = 0;
    std::uint64_t stalled_steps = 0;  // iterations with an empty flip set
    std::uint64_t pairwise_reductions = 0;
    std::uint64_t general_reductions = 0;
    std::uint64_t plus_transitions = 0;
    double seconds = 0.0;

    // Sampled validity accounting (every trace point re-verifies the scheme
    // and its component ranks) plus always-on rank-delta bookkeeping.
    std::uint64_t samples_checked = 0;
    std::uint64_t verify_failures = 0;
    std::uint64_t component_rank_failures = 0;
    std::uint64_t delta_violations = 0;

    /// Best rank recorded at or before the given iteration.
    int best_rank_at(std::uint64_t iteration) const;
};

struct RunResult {
    Scheme best;
    SearchStats stats;
};

/// One step of the random walk: applies one uniformly random flip among the
/// active terms (unchanged scheme when none exists), then exhaustively
/// applies pairwise reductions among active terms, each chosen first-found
/// in ascending (i, j) order. Without a constraint every term is active.
Scheme random_search_step(const Scheme& s, Xoshiro256ss& rng,
                          const std::optional<Constraint>& box = std::nullopt);

/// Full search state between iterations; checkpoints serialize exactly this.
struct RunState {
    Scheme current;
    Scheme best;
    Xoshiro256ss rng;
    std::uint32_t pass = 0;
    std::uint32_t stage = 0;
    std::uint64_t iter_in_stage = 0;
    std::uint64_t global_iteration = 0;
    std::uint64_t plus_counter = 0;
    std::vector<int> pending_reduction_checks;
    SearchStats stats;
};

/// Runs the full adaptive search: restarts-many passes over the schedule,
/// warm-starting each pass after the first from the best scheme found so
/// far. Identical params and initial scheme give bit-identical results.
RunResult run(const SearchParams& params, const Scheme& initial);

/// Continues a checkpointed run; the combined trajectory is bit-identical
/// to an uninterrupted run with the same parameters.
RunResult resume(const SearchParams& params, RunState state);

/// Atomic (write-temp-then-rename) checkpoint of a consistent state. The
/// schemes are verified before writing; invalid state is refused.
void write_checkpoint(const RunState& state, const std::string& path);

/// Loads and integrity-checks a snapshot; failures name the offending check.
RunState read_checkpoint(const std::string& path);

}  // namespace mms
