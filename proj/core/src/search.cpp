#include "mms/search.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "mms/io.hpp"

namespace mms {

using u64 = std::uint64_t;
using u32 = std::uint32_t;

Constraint::Masks Constraint::masks(const Dims& d) const {
    Masks mk;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < m1; ++j) mk.alpha |= 1ull << (i * d.m + j);
    for (int j = 0; j < m1; ++j)
        for (int k = 0; k < p1; ++k) mk.beta |= 1ull << (j * d.p + k);
    for (int k = 0; k < p1; ++k)
        for (int i = 0; i < n1; ++i) mk.gamma |= 1ull << (k * d.n + i);
    return mk;
}

void Constraint::validate(const Dims& d) const {
    if (n1 < 2 || m1 < 2 || p1 < 2 || n1 > d.n || m1 > d.m || p1 > d.p)
        throw std::invalid_argument("constraint box must satisfy 2 <= box <= dims");
}

std::vector<ScheduleStage> default_schedule(int n, int m, int p, u64 total_budget) {
    Dims d{n, m, p};
    d.validate();
    const int k = n + m + p - 5;

    std::vector<Constraint> boxes;
    boxes.reserve(static_cast<std::size_t>(k));
    Constraint box{2, 2, 2};
    boxes.push_back(box);
    for (int s = 1; s < k; ++s) {
        int* vals[3] = {&box.n1, &box.m1, &box.p1};
        const int targets[3] = {n, m, p};
        int pick = -1;
        for (int a = 0; a < 3; ++a) {
            if (*vals[a] >= targets[a]) continue;
            if (pick < 0 || *vals[a] < *vals[pick]) pick = a;
        }
        ++*vals[pick];
        boxes.push_back(box);
    }

    // Cumulative split points equally spaced on a log scale over two decades:
    // c_i = total * 100^(-(k-i)/(k-1)), so the first stage gets ~total/100.
    std::vector<ScheduleStage> sched(static_cast<std::size_t>(k));
    u64 prev = 0;
    for (int s = 1; s <= k; ++s) {
        u64 c = total_budget;
        if (s < k) {
            const double frac = static_cast<double>(k - s) / (k - 1);
            c = static_cast<u64>(std::llround(static_cast<double>(total_budget) *
                                              std::pow(100.0, -frac)));
        }
        c = std::min(std::max(c, prev), total_budget);
        sched[static_cast<std::size_t>(s - 1)] = {boxes[static_cast<std::size_t>(s - 1)], c - prev};
        prev = c;
    }
    return sched;
}

u64 SearchParams::iterations_per_pass() const {
    u64 sum = 0;
    for (const ScheduleStage& st : schedule) sum += st.iterations;
    return sum;
}

void SearchParams::validate() const {
    dims.validate();
    if (schedule.empty()) throw std::invalid_argument("schedule must not be empty");
    for (const ScheduleStage& st : schedule) st.box.validate(dims);
    if (!schedule.back().box.is_unconstrained(dims))
        throw std::invalid_argument("last schedule stage must be unconstrained");
    if (plus_flag < 1) throw std::invalid_argument("plus_flag must be at least 1");
    if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (gr_period < 1) throw std::invalid_argument("gr_period must be at least 1");
    if (trace_stride < 1) throw std::invalid_argument("trace_stride must be at least 1");
}

int SearchStats::best_rank_at(u64 iteration) const {
    int rank = trace.empty() ? 0 : trace.front().best_rank;
    for (const TraceRow& row : trace) {
        if (row.iteration > iteration) break;
        rank = row.best_rank;
    }
    return rank;
}

namespace {

std::vector<int> active_indices(const Scheme& s, const std::optional<Constraint>& box) {
    std::vector<int> idx;
    if (!box) {
        idx.resize(static_cast<std::size_t>(s.rank()));
        for (int i = 0; i < s.rank(); ++i) idx[static_cast<std::size_t>(i)] = i;
        return idx;
    }
    const Constraint::Masks mk = box->masks(s.dims());
    for (int i = 0; i < s.rank(); ++i)
        if (term_in_box(s.term(i), mk)) idx.push_back(i);
    return idx;
}

}  // namespace

Scheme random_search_step(const Scheme& s, Xoshiro256ss& rng,
                          const std::optional<Constraint>& box) {
    const std::vector<FlipMove> flips = enumerate_flips(s, active_indices(s, box));
    if (flips.empty()) return s;
    Scheme cur = apply_flip(s, flips[rng.bounded(flips.size())]);
    for (;;) {
        const auto pairs = find_pairwise_reductions(cur, active_indices(cur, box));
        if (pairs.empty()) break;
        cur = apply_pairwise_reduction(cur, pairs.front().i, pairs.front().j);
    }
    return cur;
}

// ---------------------------------------------------------------------------
// In-place engine for the hot loop. Terms live in three parallel word
// arrays; per-slot lists of equal-component active pairs make flip sampling
// O(1)-ish. Lists are updated incrementally after flips and rebuilt after
// the rare rank-changing events.
// ---------------------------------------------------------------------------

namespace {

struct Engine {
    Dims d{};
    std::vector<u64> comp[3];
    std::vector<std::uint8_t> active;
    int active_count = 0;
    Constraint::Masks mk;
    std::vector<std::pair<int, int>> pairs[3];  // i < j, both active, equal slot words
    SearchStats* stats = nullptr;

    int size() const { return static_cast<int>(comp[0].size()); }

    int slot_len(int sl) const { return sl == 0 ? d.nm() : sl == 1 ? d.mp() : d.pn(); }

    void load(const Dims& dims, const std::vector<u64> (&src)[3]) {
        d = dims;
        for (int sl = 0; sl < 3; ++sl) comp[sl] = src[sl];
        active.assign(static_cast<std::size_t>(size()), 0);
        active_count = 0;
    }

    void load(const Scheme& s) {
        d = s.dims();
        for (int sl = 0; sl < 3; ++sl) {
            comp[sl].clear();
            comp[sl].reserve(static_cast<std::size_t>(s.rank()));
        }
        for (const Term& t : s.terms()) {
            comp[0].push_back(t.alpha.bits());
            comp[1].push_back(t.beta.bits());
            comp[2].push_back(t.gamma.bits());
        }
        active.assign(static_cast<std::size_t>(size()), 0);
        active_count = 0;
    }

    Scheme to_scheme() const {
        std::vector<Term> terms;
        terms.reserve(static_cast<std::size_t>(size()));
        for (int i = 0; i < size(); ++i)
            terms.push_back({BitVector(d.nm(), comp[0][static_cast<std::size_t>(i)]),
                             BitVector(d.mp(), comp[1][static_cast<std::size_t>(i)]),
                             BitVector(d.pn(), comp[2][static_cast<std::size_t>(i)])});
        return Scheme(d, std::move(terms));
    }

    bool in_box(int i) const {
        const auto idx = static_cast<std::size_t>(i);
        return (comp[0][idx] & ~mk.alpha) == 0 && (comp[1][idx] & ~mk.beta) == 0 &&
               (comp[2][idx] & ~mk.gamma) == 0;
    }

    void set_box(const Constraint& c) {
        mk = c.masks(d);
        active_count = 0;
        for (int i = 0; i < size(); ++i) {
            active[static_cast<std::size_t>(i)] = in_box(i) ? 1 : 0;
            active_count += active[static_cast<std::size_t>(i)];
        }
        rebuild_pairs();
    }

    void rebuild_pairs() {
        for (auto& v : pairs) v.clear();
        const int n = size();
        for (int sl = 0; sl < 3; ++sl) {
            const auto& c = comp[sl];
            for (int i = 0; i < n; ++i) {
                if (!active[static_cast<std::size_t>(i)]) continue;
                for (int j = i + 1; j < n; ++j)
                    if (active[static_cast<std::size_t>(j)] && c[static_cast<std::size_t>(i)] ==
                        c[static_cast<std::size_t>(j)])
                        pairs[sl].emplace_back(i, j);
            }
        }
    }

    // Pair-list refresh after the slot component of term t changed. Lists
    // stay sorted by (i, j): the sampled flip for a given draw then depends
    // only on the scheme state, which keeps resumed runs on the original
    // trajectory.
    void refresh_term_in_slot(int sl, int t) {
        auto& vec = pairs[sl];
        std::erase_if(vec, [t](const std::pair<int, int>& e) {
            return e.first == t || e.second == t;
        });
        const auto& c = comp[sl];
        const u64 value = c[static_cast<std::size_t>(t)];
        const std::size_t old_size = vec.size();
        for (int u = 0; u < size(); ++u)
            if (u != t && active[static_cast<std::size_t>(u)] &&
                c[static_cast<std::size_t>(u)] == value)
                vec.emplace_back(std::min(u, t), std::max(u, t));
        std::inplace_merge(vec.begin(), vec.begin() + static_cast<std::ptrdiff_t>(old_size),
                           vec.end());
    }

    int shared_count(int i, int j) const {
        const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
        return (comp[0][a] == comp[0][b]) + (comp[1][a] == comp[1][b]) +
               (comp[2][a] == comp[2][b]);
    }

    // Removes term idx, swapping in the last term; renames the moved index
    // inside the given worklists.
    void remove_term(int idx, std::vector<int>* wl_a, std::vector<int>* wl_b) {
        const int last = size() - 1;
        const auto ui = static_cast<std::size_t>(idx);
        active_count -= active[ui];
        if (idx != last) {
            for (int sl = 0; sl < 3; ++sl) comp[sl][ui] = comp[sl][static_cast<std::size_t>(last)];
            active[ui] = active[static_cast<std::size_t>(last)];
            if (wl_a)
                for (int& w : *wl_a)
                    if (w == last) w = idx;
            if (wl_b)
                for (int& w : *wl_b)
                    if (w == last) w = idx;
        }
        for (int sl = 0; sl < 3; ++sl) comp[sl].pop_back();
        active.pop_back();
    }

    // Uniformly random eligible flip; returns false when the flip set is
    // empty. Pairs sharing a second slot sit transiently in the lists after
    // a plus or a stage change; they are rejected and resampled, which keeps
    // the conditional distribution uniform over the eligible set.
    bool try_flip(Xoshiro256ss& rng, int& out_i, int& out_j, int& out_slot) {
        const u64 sizes[3] = {pairs[0].size(), pairs[1].size(), pairs[2].size()};
        const u64 total = sizes[0] + sizes[1] + sizes[2];
        if (total == 0) return false;

        for (int attempt = 0; attempt < 32; ++attempt) {
            u64 k = rng.bounded(2 * total);
            const bool swap_orient = k & 1u;
            k >>= 1;
            int sl = 0;
            while (k >= sizes[sl]) k -= sizes[sl++];
            auto [i, j] = pairs[sl][static_cast<std::size_t>(k)];
            if (swap_orient) std::swap(i, j);
            const int n = (sl + 1) % 3, t = (sl + 2) % 3;
            if (comp[n][static_cast<std::size_t>(i)] != comp[n][static_cast<std::size_t>(j)] &&
                comp[t][static_cast<std::size_t>(i)] != comp[t][static_cast<std::size_t>(j)]) {
                apply_flip_inplace(sl, i, j);
                out_i = i;
                out_j = j;
                out_slot = sl;
                return true;
            }
        }

        // Dense fallback: enumerate the eligible oriented moves explicitly.
        std::vector<std::array<int, 3>> elig;
        for (int sl = 0; sl < 3; ++sl) {
            const int n = (sl + 1) % 3, t = (sl + 2) % 3;
            for (const auto& [i, j] : pairs[sl]) {
                if (comp[n][static_cast<std::size_t>(i)] != comp[n][static_cast<std::size_t>(j)] &&
                    comp[t][static_cast<std::size_t>(i)] != comp[t][static_cast<std::size_t>(j)]) {
                    elig.push_back({sl, i, j});
                    elig.push_back({sl, j, i});
                }
            }
        }
        if (elig.empty()) return false;
        const auto& [sl, i, j] = elig[static_cast<std::size_t>(rng.bounded(elig.size()))];
        apply_flip_inplace(sl, i, j);
        out_i = i;
        out_j = j;
        out_slot = sl;
        return true;
    }

    void apply_flip_inplace(int sl, int i, int j) {
        const int n = (sl + 1) % 3, t = (sl + 2) % 3;
        comp[n][static_cast<std::size_t>(i)] ^= comp[n][static_cast<std::size_t>(j)];
        comp[t][static_cast<std::size_t>(j)] ^= comp[t][static_cast<std::size_t>(i)];
        refresh_term_in_slot(n, i);
        refresh_term_in_slot(t, j);
        ++stats->flips;
    }

    // Exhaustively merges pairs of active terms sharing two or more
    // components, starting from the worklist of recently changed terms and
    // cascading as merges create new coincidences. Scan order (worklist
    // back-to-front, partners ascending) is deterministic. Returns true when
    // any merge happened; pair lists must then be rebuilt by the caller.
    bool reduce_pass(std::vector<int>& worklist, std::vector<int>* pending) {
        bool any = false;
        while (!worklist.empty()) {
            const int t0 = worklist.back();
            worklist.pop_back();
            if (t0 >= size() || !active[static_cast<std::size_t>(t0)]) continue;

            bool rescan = true;
            while (rescan) {
                rescan = false;
                for (int u = 0; u < size(); ++u) {
                    if (u == t0 || !active[static_cast<std::size_t>(u)]) continue;
                    const int shared = shared_count(t0, u);
                    if (shared < 2) continue;

                    any = true;
                    ++stats->pairwise_reductions;
                    const int rank_before = size();
                    const int lo = std::min(t0, u), hi = std::max(t0, u);
                    if (shared == 3) {
                        remove_term(hi, &worklist, pending);
                        remove_term(lo, &worklist, pending);
                        if (size() != rank_before - 2) ++stats->delta_violations;
                        rescan = false;
                        break;  // t0 is gone
                    }
                    int dslot = 0;
                    for (int sl = 0; sl < 3; ++sl)
                        if (comp[sl][static_cast<std::size_t>(t0)] !=
                            comp[sl][static_cast<std::size_t>(u)])
                            dslot = sl;
                    comp[dslot][static_cast<std::size_t>(lo)] ^=
                        comp[dslot][static_cast<std::size_t>(hi)];
                    assert(comp[dslot][static_cast<std::size_t>(lo)] != 0);
                    remove_term(hi, &worklist, pending);
                    if (size() != rank_before - 1) ++stats->delta_violations;
                    if (lo == t0) {
                        rescan = true;  // t0 changed; scan it again
                    } else {
                        worklist.push_back(lo);
                    }
                    break;
                }
            }
        }
        return any;
    }

    std::vector<int> active_list() const {
        std::vector<int> idx;
        idx.reserve(static_cast<std::size_t>(active_count));
        for (int i = 0; i < size(); ++i)
            if (active[static_cast<std::size_t>(i)]) idx.push_back(i);
        return idx;
    }

    // One uniformly random plus among eligible ordered active pairs and
    // slots. Returns false when no pair differs in all three components.
    bool try_plus(Xoshiro256ss& rng, std::vector<int>& pending) {
        const std::vector<int> act = active_list();
        std::vector<std::pair<int, int>> elig;
        for (int i : act)
            for (int j : act)
                if (i != j && shared_count(i, j) == 0) elig.emplace_back(i, j);
        if (elig.empty()) return false;

        const u64 k = rng.bounded(elig.size() * 3);
        const auto [i, j] = elig[static_cast<std::size_t>(k / 3)];
        const int sl = static_cast<int>(k % 3);
        const int n = (sl + 1) % 3, t = (sl + 2) % 3;
        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);

        const int rank_before = size();
        const u64 si = comp[sl][ui], sj = comp[sl][uj];
        const u64 nj = comp[n][uj];
        const u64 ti_ = comp[t][ui], tj_ = comp[t][uj];
        comp[n][ui] ^= nj;
        comp[sl][uj] = si;
        comp[t][uj] = tj_ ^ ti_;
        comp[sl].push_back(si ^ sj);
        comp[n].push_back(nj);
        comp[t].push_back(tj_);
        active.push_back(1);
        ++active_count;
        assert(in_box(size() - 1));
        if (size() != rank_before + 1) ++stats->delta_violations;

        pending.push_back(i);
        pending.push_back(j);
        pending.push_back(size() - 1);
        rebuild_pairs();
        ++stats->plus_transitions;
        return true;
    }

    // First qualifying rank-deficient group (slots in alpha/beta/gamma
    // order, groups by their smallest member), replaced by its rank-one
    // factorization. Returns false when nothing qualifies.
    bool try_general_reduction(std::vector<int>& pending) {
        const std::vector<int> act = active_list();
        for (int sl = 0; sl < 3; ++sl) {
            const int n = (sl + 1) % 3, t = (sl + 2) % 3;
            std::vector<bool> visited(act.size(), false);
            for (std::size_t a = 0; a < act.size(); ++a) {
                if (visited[a]) continue;
                std::vector<int> group{act[a]};
                const u64 value = comp[sl][static_cast<std::size_t>(act[a])];
                for (std::size_t b = a + 1; b < act.size(); ++b) {
                    if (!visited[b] && comp[sl][static_cast<std::size_t>(act[b])] == value) {
                        visited[b] = true;
                        group.push_back(act[b]);
                    }
                }
                if (group.size() < 2) continue;

                const int rows = slot_len(n), cols = slot_len(t);
                GF2Matrix m(cols);
                {
                    std::array<u64, 64> acc{};
                    for (int g : group) {
                        u64 nb = comp[n][static_cast<std::size_t>(g)];
                        const u64 tb = comp[t][static_cast<std::size_t>(g)];
                        while (nb) {
                            acc[static_cast<std::size_t>(std::countr_zero(nb))] ^= tb;
                            nb &= nb - 1;
                        }
                    }
                    for (int r = 0; r < rows; ++r)
                        m.rows.push_back(BitVector(cols, acc[static_cast<std::size_t>(r)]));
                }
                const auto factors = gf2_rank_one_factorization(m);
                if (factors.size() >= group.size()) continue;

                const int rank_before = size();
                std::vector<int> doomed = group;
                std::sort(doomed.begin(), doomed.end(), std::greater<int>());
                for (int g : doomed) remove_term(g, &pending, nullptr);
                for (const auto& [col, row] : factors) {
                    comp[sl].push_back(value);
                    comp[n].push_back(col.bits());
                    comp[t].push_back(row.bits());
                    active.push_back(1);
                    ++active_count;
                    assert(in_box(size() - 1));
                    pending.push_back(size() - 1);
                }
                const int expected_drop =
                    static_cast<int>(group.size()) - static_cast<int>(factors.size());
                if (size() != rank_before - expected_drop) ++stats->delta_violations;
                rebuild_pairs();
                ++stats->general_reductions;
                return true;
            }
        }
        return false;
    }
};

// Orchestrates passes, stages and iterations around the engine.
class Runner {
public:
    Runner(const SearchParams& params, RunState st)
        : P_(params), st_(std::move(st)), rng_(st_.rng), stats_(st_.stats) {}

    RunResult execute() {
        const auto t_start = std::chrono::steady_clock::now();

        eng_.stats = &stats_;
        eng_.load(st_.current);
        best_rank_ = st_.best.rank();
        for (int sl = 0; sl < 3; ++sl) best_comp_[sl].clear();
        {
            Engine tmp;
            tmp.load(st_.best);
            for (int sl = 0; sl < 3; ++sl) best_comp_[sl] = tmp.comp[sl];
        }
        pending_ = st_.pending_reduction_checks;
        plus_counter_ = st_.plus_counter;
        global_iter_ = st_.global_iteration;

        bool at_resume_point = true;
        const std::size_t n_stages = P_.schedule.size();

        for (pass_ = st_.pass; pass_ < P_.restarts; ++pass_) {
            std::size_t stage_begin = 0;
            if (at_resume_point) {
                stage_begin = st_.stage;
            } else {
                // Warm start from the best scheme; enter the first stage whose
                // box already contains its whole support.
                eng_.load(d(), best_comp_);
                pending_.clear();
                plus_counter_ = 0;
                stage_begin = entry_stage();
            }
            for (stage_ = static_cast<u32>(stage_begin); stage_ < n_stages; ++stage_) {
                const ScheduleStage& stg = P_.schedule[stage_];
                u64 iter_begin = 0;

                std::vector<std::uint8_t> prev_active = eng_.active;
                eng_.set_box(stg.box);
                if (at_resume_point) {
                    iter_begin = st_.iter_in_stage;
                    at_resume_point = false;
                } else {
                    for (int i = 0; i < eng_.size(); ++i) {
                        const auto ui = static_cast<std::size_t>(i);
                        if (eng_.active[ui] && (ui >= prev_active.size() || !prev_active[ui]))
                            pending_.push_back(i);
                    }
                }

                const bool plus_allowed =
                    P_.plus_enabled &&
                    (P_.plus_in_constrained_stages || stage_ + 1 == n_stages);

                for (it_ = iter_begin; it_ < stg.iterations; ++it_) iteration(plus_allowed);
            }
        }

        if (stats_.trace.empty() || stats_.trace.back().iteration != global_iter_)
            record_trace();

        stats_.seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return RunResult{best_scheme(), std::move(stats_)};
    }

private:
    const Dims& d() const { return P_.dims; }

    std::size_t entry_stage() const {
        for (std::size_t s = 0; s < P_.schedule.size(); ++s) {
            const Constraint::Masks mk = P_.schedule[s].box.masks(d());
            bool all_in = true;
            for (std::size_t i = 0; i < best_comp_[0].size() && all_in; ++i)
                all_in = (best_comp_[0][i] & ~mk.alpha) == 0 &&
                         (best_comp_[1][i] & ~mk.beta) == 0 &&
                         (best_comp_[2][i] & ~mk.gamma) == 0;
            if (all_in) return s;
        }
        return P_.schedule.size() - 1;
    }

    Scheme best_scheme() const {
        std::vector<Term> terms;
        terms.reserve(best_comp_[0].size());
        for (std::size_t i = 0; i < best_comp_[0].size(); ++i)
            terms.push_back({BitVector(d().nm(), best_comp_[0][i]),
                             BitVector(d().mp(), best_comp_[1][i]),
                             BitVector(d().pn(), best_comp_[2][i])});
        return Scheme(d(), std::move(terms));
    }

    void update_best() {
        if (eng_.size() < best_rank_) {
            best_rank_ = eng_.size();
            for (int sl = 0; sl < 3; ++sl) best_comp_[sl] = eng_.comp[sl];
        }
    }

    bool trace_due(u64 it) const {
        if (it % P_.trace_stride == 0) return true;
        if (it < 10000) {
            u64 p = 1;
            while (p * 10 <= it) p *= 10;
            return it % p == 0;
        }
        return false;
    }

    void record_trace() {
        stats_.trace.push_back({global_iter_, eng_.size(), best_rank_});
        {
            ++stats_.samples_checked;
            const Scheme snapshot = eng_.to_scheme();
            if (!verify(snapshot)) ++stats_.verify_failures;
            const auto ranks = component_ranks(snapshot);
            if (ranks[0] != d().nm() || ranks[1] != d().mp() || ranks[2] != d().pn())
                ++stats_.component_rank_failures;
        }
    }

    void iteration(bool plus_allowed) {
        ++global_iter_;
        ++stats_.iterations;
        const int rank_before = eng_.size();

        int ti = -1, tj = -1, tslot = -1;
        const bool flipped = eng_.try_flip(rng_, ti, tj, tslot);
        if (flipped) {
            worklist_ = std::move(pending_);
            pending_.clear();
            worklist_.push_back(ti);
            worklist_.push_back(tj);
            if (eng_.reduce_pass(worklist_, &pending_)) eng_.rebuild_pairs();
        } else {
            ++stats_.stalled_steps;
        }
        // A flip keeps the rank and merges only lower it.
        if (flipped && eng_.size() > rank_before) ++stats_.delta_violations;
        update_best();

        if (global_iter_ % P_.gr_period == 0) {
            if (eng_.try_general_reduction(pending_)) update_best();
        }

        if (eng_.size() < rank_before)
            plus_counter_ = 0;
        else
            ++plus_counter_;

        if (plus_allowed && plus_counter_ > P_.plus_flag) {
            eng_.try_plus(rng_, pending_);
            plus_counter_ = 0;
        }

#ifndef NDEBUG
        assert(verify(eng_.to_scheme()));
#endif

        if (trace_due(global_iter_)) record_trace();

        if (P_.checkpoint_every && global_iter_ % P_.checkpoint_every == 0 &&
            !P_.checkpoint_path.empty())
            write_checkpoint(snapshot_state(), P_.checkpoint_path);
    }

    RunState snapshot_state() const {
        RunState out{eng_.to_scheme(), best_scheme(), rng_,      pass_,
                     stage_,           it_ + 1,       global_iter_, plus_counter_,
                     pending_,         stats_};
        return out;
    }

    const SearchParams& P_;
    RunState st_;
    Engine eng_;
    Xoshiro256ss rng_;
    SearchStats stats_;

    std::vector<u64> best_comp_[3];
    int best_rank_ = 0;
    std::vector<int> pending_;
    std::vector<int> worklist_;
    u64 plus_counter_ = 0;
    u64 global_iter_ = 0;
    u32 pass_ = 0;
    u32 stage_ = 0;
    u64 it_ = 0;
};

}  // namespace

RunResult run(const SearchParams& params, const Scheme& initial) {
    params.validate();
    if (initial.dims() != params.dims)
        throw std::invalid_argument("initial scheme dimensions differ from search dimensions");
    if (!verify(initial))
        throw std::invalid_argument("initial scheme failed verification");

    RunState st{initial, initial, Xoshiro256ss(params.seed), 0, 0, 0, 0, 0, {}, {}};
    st.pending_reduction_checks.resize(static_cast<std::size_t>(initial.rank()));
    for (int i = 0; i < initial.rank(); ++i)
        st.pending_reduction_checks[static_cast<std::size_t>(i)] = i;
    st.stats.trace.push_back({0, initial.rank(), initial.rank()});
    return Runner(params, std::move(st)).execute();
}

RunResult resume(const SearchParams& params, RunState state) {
    params.validate();
    if (state.current.dims() != params.dims || state.best.dims() != params.dims)
        throw std::invalid_argument("checkpoint dimensions differ from search dimensions");
    if (state.stage >= params.schedule.size())
        throw std::invalid_argument("checkpoint stage is outside the schedule");
    return Runner(params, std::move(state)).execute();
}

// --------------------------- checkpoint format -----------------------------

namespace {

void require(bool ok, const std::string& check) {
    if (!ok) throw std::runtime_error("checkpoint integrity: " + check);
}

Scheme read_embedded_scheme(std::istringstream& in, const std::string& label) {
    std::string text, line;
    int remaining = -1, seen = 0;
    while (remaining != 0 && std::getline(in, line)) {
        text += line;
        text += '\n';
        ++seen;
        if (seen == 3) {
            std::istringstream hdr(line);
            std::string tag;
            long long r = -1;
            hdr >> tag >> r;
            require(tag == "rank" && r >= 0, label + " scheme rank header");
            remaining = static_cast<int>(r);
        } else if (seen > 3) {
            --remaining;
        }
    }
    require(remaining == 0, label + " scheme is truncated");
    try {
        return parse_scheme(text);
    } catch (const std::exception& e) {
        throw std::runtime_error("checkpoint integrity: " + label + " scheme: " + e.what());
    }
}

}  // namespace

void write_checkpoint(const RunState& state, const std::string& path) {
    if (!verify(state.current))
        throw std::runtime_error("refusing to checkpoint: current scheme failed verification");
    if (!verify(state.best))
        throw std::runtime_error("refusing to checkpoint: best scheme failed verification");

    std::ostringstream out;
    out << "mmscheckpoint 1\n";
    const auto& s = state.rng.state();
    out << "rng " << s[0] << ' ' << s[1] << ' ' << s[2] << ' ' << s[3] << '\n';
    out << "pass " << state.pass << '\n';
    out << "stage " << state.stage << '\n';
    out << "iter_in_stage " << state.iter_in_stage << '\n';
    out << "global_iteration " << state.global_iteration << '\n';
    out << "plus_counter " << state.plus_counter << '\n';
    out << "pending " << state.pending_reduction_checks.size();
    for (int i : state.pending_reduction_checks) out << ' ' << i;
    out << '\n';
    const SearchStats& st = state.stats;
    out << "counters " << st.iterations << ' ' << st.flips << ' ' << st.stalled_steps << ' '
        << st.pairwise_reductions << ' ' << st.general_reductions << ' ' << st.plus_transitions
        << '\n';
    out << "checks " << st.samples_checked << ' ' << st.verify_failures << ' '
        << st.component_rank_failures << ' ' << st.delta_violations << '\n';
    out << "trace " << st.trace.size() << '\n';
    for (const TraceRow& row : st.trace)
        out << row.iteration << ' ' << row.current_rank << ' ' << row.best_rank << '\n';
    out << "current\n" << serialize_scheme(state.current);
    out << "best\n" << serialize_scheme(state.best);

    write_text_file_atomic(path, out.str());
}

RunState read_checkpoint(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line, tag;

    require(static_cast<bool>(std::getline(in, line)), "missing header");
    require(line == "mmscheckpoint 1", "bad magic");

    std::array<u64, 4> rng_state{};
    require(static_cast<bool>(std::getline(in, line)), "missing rng state");
    {
        std::istringstream ls(line);
        ls >> tag >> rng_state[0] >> rng_state[1] >> rng_state[2] >> rng_state[3];
        require(tag == "rng" && !ls.fail(), "rng state");
    }

    auto read_u64_field = [&](const char* name) -> u64 {
        require(static_cast<bool>(std::getline(in, line)), std::string(name) + " missing");
        std::istringstream ls(line);
        u64 value = 0;
        ls >> tag >> value;
        require(tag == name && !ls.fail(), name);
        return value;
    };

    const u64 pass = read_u64_field("pass");
    const u64 stage = read_u64_field("stage");
    const u64 iter_in_stage = read_u64_field("iter_in_stage");
    const u64 global_iteration = read_u64_field("global_iteration");
    const u64 plus_counter = read_u64_field("plus_counter");

    std::vector<int> pending;
    {
        require(static_cast<bool>(std::getline(in, line)), "pending missing");
        std::istringstream ls(line);
        std::size_t count = 0;
        ls >> tag >> count;
        require(tag == "pending" && !ls.fail(), "pending");
        pending.resize(count);
        for (std::size_t i = 0; i < count; ++i) ls >> pending[i];
        require(!ls.fail(), "pending indices");
    }

    SearchStats stats;
    {
        require(static_cast<bool>(std::getline(in, line)), "counters missing");
        std::istringstream ls(line);
        ls >> tag >> stats.iterations >> stats.flips >> stats.stalled_steps >>
            stats.pairwise_reductions >> stats.general_reductions >> stats.plus_transitions;
        require(tag == "counters" && !ls.fail(), "counters");
    }
    {
        require(static_cast<bool>(std::getline(in, line)), "checks missing");
        std::istringstream ls(line);
        ls >> tag >> stats.samples_checked >> stats.verify_failures >>
            stats.component_rank_failures >> stats.delta_violations;
        require(tag == "checks" && !ls.fail(), "checks");
    }
    {
        require(static_cast<bool>(std::getline(in, line)), "trace missing");
        std::istringstream ls(line);
        std::size_t count = 0;
        ls >> tag >> count;
        require(tag == "trace" && !ls.fail(), "trace");
        stats.trace.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            require(static_cast<bool>(std::getline(in, line)), "trace row missing");
            std::istringstream rs(line);
            rs >> stats.trace[i].iteration >> stats.trace[i].current_rank >>
                stats.trace[i].best_rank;
            require(!rs.fail(), "trace row");
        }
    }

    require(static_cast<bool>(std::getline(in, line)) && line == "current", "current marker");
    Scheme current = read_embedded_scheme(in, "current");
    require(static_cast<bool>(std::getline(in, line)) && line == "best", "best marker");
    Scheme best = read_embedded_scheme(in, "best");

    require(verify(current), "current scheme verification");
    require(verify(best), "best scheme verification");

    RunState out{std::move(current),
                 std::move(best),
                 Xoshiro256ss::from_state(rng_state),
                 static_cast<u32>(pass),
                 static_cast<u32>(stage),
                 iter_in_stage,
                 global_iteration,
                 plus_counter,
                 std::move(pending),
                 std::move(stats)};
    return out;
}

}  // namespace mms
