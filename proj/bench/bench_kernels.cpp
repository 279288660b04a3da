// Serial reference vs OpenMP kernels on the batch operations.

#include <benchmark/benchmark.h>

#include "hmmclass/classifier.hpp"
#include "hmmclass/inference.hpp"
#include "hmmclass/synthetic.hpp"
#include "hmmclass/training.hpp"

using namespace hmmclass;

namespace {

struct Workload {
  SyntheticBank generators;
  LabelledData data;
  std::vector<ObservationSequence> flat;
  HmmModel model;
};

const Workload& workload() {
  static const Workload w = [] {
    SyntheticSpec spec;
    spec.seed = 1;
    Workload out{make_separated_bank(spec), {}, {}, {}};
    out.data = sample_dataset(out.generators, spec, {32, 1000, false, 1});
    for (const auto& [label, seqs] : out.data) out.flat.insert(out.flat.end(), seqs.begin(), seqs.end());
    TrainingConfig cfg;
    out.model = initialize_model(cfg, EmissionKind::Gaussian, out.flat);
    return out;
  }();
  return w;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::Parallel : Execution::Serial;
}

void BM_Expectation(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(expectation(w.model, w.flat, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.flat.size()));
}

void BM_LogLikelihoods(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(log_likelihoods(w.model, w.flat, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.flat.size()));
}

void BM_Evaluate(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(w.generators.bank, w.data, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(w.flat.size()));
}

}  // namespace

BENCHMARK(BM_Expectation)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LogLikelihoods)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Evaluate)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
