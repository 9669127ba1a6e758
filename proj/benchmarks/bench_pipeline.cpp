#include <random>

#include <benchmark/benchmark.h>

#include "ctrex/contrast_graph.hpp"
#include "ctrex/experiment.hpp"
#include "ctrex/recourse.hpp"
#include "ctrex/surrogate.hpp"
#include "ctrex/synthetic.hpp"

using namespace ctrex;

namespace {

const Experiment& moons() {
  static const Experiment ex = [] {
    ExperimentOptions o;
    o.seed = 1;
    return prepare_experiment(make_moons(3000, 1), o);
  }();
  return ex;
}

}  // namespace

// Whole explain call for one anchor at neighborhood size k.
static void BM_Explain(benchmark::State& state) {
  const auto& ex = moons();
  PoolIndex index(ex.train, *ex.model, *ex.vae);
  RecourseConfig config;
  config.k = static_cast<std::size_t>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    ExplainSession session(*ex.model, index, *ex.vae, config);
    try {
      benchmark::DoNotOptimize(session.explain(ex.test.row(i++ % ex.test.size())));
    } catch (const NoPathError&) {
      // a constrained anchor with no admissible leaf still costs the pipeline
    }
  }
}
BENCHMARK(BM_Explain)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

// Tree growth on a k-point neighborhood at a given depth limit.
static void BM_FitTree(benchmark::State& state) {
  const auto& ex = moons();
  PoolIndex index(ex.train, *ex.model, *ex.vae);
  const auto& x = ex.test.row(0);
  const int fact = ex.model->predict_label(x);
  const auto set = sample_neighbors(x, index, *ex.vae, 1000, fact, 1 - fact);
  TreeConfig config;
  config.max_depth = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_tree(set, ex.train.schema(), config));
}
BENCHMARK(BM_FitTree)->DenseRange(2, 10, 4)->Unit(benchmark::kMicrosecond);

// Graph build plus shortest paths against tree size.
static void BM_GraphSearch(benchmark::State& state) {
  const auto& ex = moons();
  PoolIndex index(ex.train, *ex.model, *ex.vae);
  const auto& x = ex.test.row(0);
  const int fact = ex.model->predict_label(x);
  const auto set = sample_neighbors(x, index, *ex.vae, 1000, fact, 1 - fact);
  TreeConfig config;
  config.max_depth = static_cast<int>(state.range(0));
  config.min_samples_leaf = 1;
  const auto tree = fit_tree(set, ex.train.schema(), config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(shortest_paths(build_graph(tree, x, ex.train.schema(), fact, 1 - fact)));
  }
  state.counters["nodes"] = static_cast<double>(tree.node_count());
}
BENCHMARK(BM_GraphSearch)->DenseRange(2, 14, 4)->Unit(benchmark::kMicrosecond);

// Latent encoding of the pool, the up-front cost of a PoolIndex.
static void BM_PoolIndex(benchmark::State& state) {
  const auto& ex = moons();
  for (auto _ : state) benchmark::DoNotOptimize(PoolIndex(ex.train, *ex.model, *ex.vae));
}
BENCHMARK(BM_PoolIndex)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
