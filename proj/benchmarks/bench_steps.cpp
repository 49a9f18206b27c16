#include <benchmark/benchmark.h>

#include "demlab/balls_bins.hpp"
#include "demlab/er_components.hpp"
#include "demlab/matching.hpp"

namespace {

void BM_BallsBinsStep(benchmark::State& state) {
    demlab::bb::BallsBinsState s = demlab::bb::init(100000, 7);
    for (auto _ : state) {
        if (s.i >= 10LL * s.n) {
            state.PauseTiming();
            s = demlab::bb::init(100000, s.rng.next());
            state.ResumeTiming();
        }
        demlab::bb::step(s);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BallsBinsStep);

void BM_ErComponentsStep(benchmark::State& state) {
    demlab::er::ComponentState s = demlab::er::init(20000, 7);
    std::int64_t limit = s.n * (s.n - 1) / 4;
    for (auto _ : state) {
        if (s.i >= limit) {
            state.PauseTiming();
            s = demlab::er::init(20000, s.rng.next());
            state.ResumeTiming();
        }
        demlab::er::step(s);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ErComponentsStep);

void BM_MatchStep(benchmark::State& state) {
    demlab::gm::RegularGraph g = demlab::gm::gen_circulant(20000, 8);
    demlab::gm::MatchingState s(g, 7);
    for (auto _ : state) {
        if (s.alive.empty()) {
            state.PauseTiming();
            s = demlab::gm::MatchingState(g, s.rng.next());
            state.ResumeTiming();
        }
        demlab::gm::match_step(s);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MatchStep);

}  // namespace

BENCHMARK_MAIN();
