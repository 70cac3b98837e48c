#include <benchmark/benchmark.h>

#include "mms/gf2.hpp"
#include "mms/io.hpp"
#include "mms/rng.hpp"
#include "mms/scheme.hpp"
#include "mms/search.hpp"

namespace {

mms::GF2Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
    mms::Xoshiro256ss rng(seed);
    mms::GF2Matrix m(cols);
    for (int r = 0; r < rows; ++r)
        m.append_row(mms::BitVector(cols, rng.next() & mms::BitVector::zeros(cols).mask()));
    return m;
}

void BM_gf2_rank(benchmark::State& state) {
    const auto m = random_matrix(static_cast<int>(state.range(0)), 64, 7);
    for (auto _ : state) benchmark::DoNotOptimize(mms::gf2_rank(m));
}
BENCHMARK(BM_gf2_rank)->Arg(32)->Arg(64)->Arg(128);

void BM_rank_one_factorization(benchmark::State& state) {
    const auto m = random_matrix(25, 25, 11);
    for (auto _ : state) benchmark::DoNotOptimize(mms::gf2_rank_one_factorization(m));
}
BENCHMARK(BM_rank_one_factorization);

void BM_verify(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const mms::Scheme s = mms::standard_scheme(n, n, n);
    for (auto _ : state) benchmark::DoNotOptimize(mms::verify(s));
}
BENCHMARK(BM_verify)->Arg(3)->Arg(4)->Arg(5);

void BM_enumerate_flips(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const mms::Scheme s = mms::standard_scheme(n, n, n);
    for (auto _ : state) benchmark::DoNotOptimize(mms::enumerate_flips(s));
}
BENCHMARK(BM_enumerate_flips)->Arg(3)->Arg(4)->Arg(5);

// Whole search iterations per second, the figure that bounds every long run.
void BM_search_steps(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const std::uint64_t iters = 200000;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        mms::SearchParams p;
        p.dims = {n, n, n};
        p.seed = seed++;
        p.schedule = {{mms::Constraint{n, n, n}, iters}};
        benchmark::DoNotOptimize(mms::run(p, mms::standard_scheme(n, n, n)));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(iters));
}
BENCHMARK(BM_search_steps)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_scheme_round_trip(benchmark::State& state) {
    const mms::Scheme s = mms::standard_scheme(5, 5, 5);
    for (auto _ : state) benchmark::DoNotOptimize(mms::parse_scheme(mms::serialize_scheme(s)));
}
BENCHMARK(BM_scheme_round_trip);

}  // namespace

BENCHMARK_MAIN();
