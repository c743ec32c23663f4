// Serial reference versus OpenMP kernels. Arg: worker threads (0 = serial).
// Wall-clock timing; on a single core the parallel rows only show overhead.

#include "fairbias/kernels.hpp"
#include "fairbias/synth.hpp"

#include <benchmark/benchmark.h>

using namespace fairbias;

namespace {

const Dataset& population()
{
    static const Dataset ds = [] {
        SynthSpec s;
        s.n = 5000;
        s.seed = 1;
        return synth_dataset(s);
    }();
    return ds;
}

void BM_TrainReplicates(benchmark::State& state)
{
    const auto& ds = population();
    const int threads = static_cast<int>(state.range(0));
    SamplingPlan plan = SamplingPlan::at_ratio(500, population_ratio(ds), 16, 3);
    LearnerSpec lr;
    for (auto _ : state) {
        auto out = threads == 0 ? kernels::train_replicates_serial(ds, plan, lr, ds.X)
                                : kernels::train_replicates_parallel(ds, plan, lr, ds.X, threads);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plan.replicates));
}

void BM_PointTerms(benchmark::State& state)
{
    const auto& ds = population();
    const int threads = static_cast<int>(state.range(0));
    SamplingPlan plan = SamplingPlan::at_ratio(300, population_ratio(ds), 30, 4);
    static const auto ens = [&] {
        auto preds = kernels::train_replicates_serial(ds, plan, LearnerSpec{}, ds.X);
        return make_ensemble(preds, ds, LossKind::zero_one);
    }();
    for (auto _ : state) {
        auto out = threads == 0 ? kernels::point_terms_serial(ens) : kernels::point_terms_parallel(ens, threads);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ens.points()));
}

} // namespace

BENCHMARK(BM_TrainReplicates)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PointTerms)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
