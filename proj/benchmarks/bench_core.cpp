#include <benchmark/benchmark.h>

#include <memory>

#include "cubefuzz/attack.hpp"
#include "cubefuzz/fixtures.hpp"
#include "cubefuzz/model.hpp"
#include "cubefuzz/rng.hpp"
#include "cubefuzz/search.hpp"

using namespace cubefuzz;

namespace {

std::shared_ptr<const FeedForwardModel> bench_model(std::size_t side, std::size_t classes) {
  FixtureSpec spec;
  spec.seed = 17;
  spec.shape = Shape{side, side, 1};
  spec.hidden = 32;
  spec.classes = classes;
  return std::make_shared<const FeedForwardModel>(generate_fixture_model(spec));
}

Image bench_image(std::size_t side) {
  SplitMix64 rng(29);
  Image x;
  x.shape = Shape{side, side, 1};
  for (std::size_t i = 0; i < side * side; ++i) x.data.push_back(255.0 * rng.uniform());
  return x;
}

void BM_ForwardPass(benchmark::State& state) {
  std::size_t side = static_cast<std::size_t>(state.range(0));
  auto model = bench_model(side, 10);
  Image x = bench_image(side);
  for (auto _ : state) benchmark::DoNotOptimize(model->evaluate(x));
}
BENCHMARK(BM_ForwardPass)->Arg(8)->Arg(16)->Arg(32);

void BM_VertexSweep(benchmark::State& state) {
  std::size_t side = static_cast<std::size_t>(state.range(0));
  auto model = bench_model(side, 10);
  Image x = bench_image(side);
  SearchRegion region = make_region(x, 8.0);
  Objective obj = Objective::class_score(0);
  for (auto _ : state) {
    QueryLedger ledger(1u << 24);
    ScoreOracle oracle(model_backend(model), ledger);
    benchmark::DoNotOptimize(approx_min(region.lower_vertex(), obj, oracle, region));
  }
}
BENCHMARK(BM_VertexSweep)->Arg(8)->Arg(16)->Arg(32);

void BM_GroupedPass(benchmark::State& state) {
  std::size_t side = 32;
  std::size_t k = static_cast<std::size_t>(state.range(0));
  auto model = bench_model(side, 10);
  Image x = bench_image(side);
  SearchRegion region = make_region(x, 8.0);
  Objective obj = Objective::class_score(0);
  Grouping grouping = initial_grouping(x.shape, k);
  for (auto _ : state) {
    QueryLedger ledger(1u << 24);
    ScoreOracle oracle(model_backend(model), ledger);
    SplitMix64 rng(7);
    Image v = region.lower_vertex();
    ScoreVector base = oracle.evaluate(v);
    benchmark::DoNotOptimize(
        approx_min_grouped(v, obj, oracle, region, grouping, rng, 64, base));
  }
}
BENCHMARK(BM_GroupedPass)->Arg(4)->Arg(8)->Arg(16);

void BM_FullAttack(benchmark::State& state) {
  auto model = bench_model(8, 10);
  Image x = bench_image(8);
  Label original = argmax_label(model->evaluate(x));
  AttackConfig cfg;
  cfg.budget = 20000;
  cfg.refine = false;
  for (auto _ : state) {
    QueryLedger ledger(cfg.budget);
    ScoreOracle oracle(model_backend(model), ledger);
    benchmark::DoNotOptimize(run_attack(x, original, oracle, cfg));
  }
}
BENCHMARK(BM_FullAttack);

}  // namespace

BENCHMARK_MAIN();
