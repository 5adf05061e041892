// Serial reference fill against the parallel engine.
//
//   cns_bench --benchmark_filter='Fill/400'

#include "cns/reduction_engine.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace cns;

struct Setup {
    PrecisionCtx ctx;
    LorenzParams params;
    LorenzState state;

    explicit Setup(int digits)
        : ctx(make_ctx(digits)), params(LorenzParams::saltzman(ctx)), state(benchmark_state(ctx)) {}
};

void set_counters(benchmark::State& st, int order) {
    st.counters["mults"] = benchmark::Counter(static_cast<double>(fill_mul_count(order)),
                                              benchmark::Counter::kIsIterationInvariantRate);
}

void BM_SerialFill(benchmark::State& st) {
    const int order = static_cast<int>(st.range(0));
    const Setup s(static_cast<int>(st.range(1)));
    for (auto _ : st) {
        CoeffTable t = serial::fill_table(s.state, s.params, order);
        benchmark::DoNotOptimize(t.z.back());
    }
    set_counters(st, order);
}

void BM_ParallelFill(benchmark::State& st) {
    const int order = static_cast<int>(st.range(0));
    const Setup s(static_cast<int>(st.range(1)));
    const int workers = static_cast<int>(st.range(2));
    ReductionEngine engine(s.ctx, make_layout(workers, workers, kDefaultBlockSize));
    CoeffTable t(s.ctx, order);
    for (auto _ : st) {
        t.set_origin(s.state);
        benchmark::DoNotOptimize(engine.fill_levels(t, s.params));
    }
    set_counters(st, order);
}

// {order, digits}
const std::vector<std::vector<std::int64_t>> kSizes{{100, 400, 1000}, {200, 1000}};

}  // namespace

BENCHMARK(BM_SerialFill)->ArgsProduct(kSizes)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ParallelFill)
    ->ArgsProduct({{100, 400, 1000}, {200, 1000}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
