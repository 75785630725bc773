#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "proq/answer.hpp"
#include "proq/engine.hpp"
#include "proq/harness.hpp"
#include "proq/probability.hpp"

namespace {

std::vector<double> random_probs(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  for (auto& x : p) x = u(rng);
  return p;
}

void BM_SelectAnswerSet(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto probs = random_probs(n, 42);
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = "o" + std::to_string(i);
  for (auto _ : state) {
    auto sel = proq::select_answer_set(ids, probs, 1.0);
    benchmark::DoNotOptimize(sel.expected);
  }
}
BENCHMARK(BM_SelectAnswerSet)->Arg(200)->Arg(2000)->Arg(20000);

void BM_EspEval(benchmark::State& state) {
  proq::Config cfg = proq::standard_config();
  proq::Expression expr = proq::parse_expression(cfg.expression, cfg.schema);
  std::vector<double> leaves = {0.7, 0.4};
  for (auto _ : state) {
    double v = proq::esp(expr, leaves);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_EspEval);

void BM_PlanBuild(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  proq::Config cfg = proq::standard_config();
  cfg.engine.epoch = 1e-9;  // stop after the plan-building epoch
  proq::Dataset ds = proq::standard_dataset(n, 7);
  for (auto _ : state) {
    proq::Engine e(cfg, ds);
    e.run_epoch(std::nullopt);
    benchmark::DoNotOptimize(e.queue().size());
  }
}
BENCHMARK(BM_PlanBuild)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_EpochThroughput(benchmark::State& state) {
  proq::Config cfg = proq::standard_config();
  cfg.engine.epoch = 5.0;
  proq::Dataset ds = proq::standard_dataset(500, 11);
  for (auto _ : state) {
    proq::Engine e(cfg, ds);
    for (int i = 0; i < 10; ++i) e.run_epoch(std::nullopt);
    benchmark::DoNotOptimize(e.expected());
  }
}
BENCHMARK(BM_EpochThroughput)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
