#include <benchmark/benchmark.h>

#include "support.hpp"
#include "triadkit/analytics.hpp"
#include "triadkit/census.hpp"
#include "triadkit/infopass.hpp"

namespace {

using namespace triadkit;

TemporalMultigraph graph_of(std::int64_t nodes) {
  testing::RandomGraphShape shape;
  shape.nodes = static_cast<std::size_t>(nodes);
  shape.events = shape.nodes * 10;
  shape.contacts = shape.nodes * 2;
  shape.span = 58 * kSecondsPerDay;
  shape.tick = 1;
  return testing::random_graph(shape, 42);
}

void BM_Census(benchmark::State& state) {
  const auto g = graph_of(state.range(0));
  const census::CensusOptions opt{.threads = static_cast<unsigned>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(census::config_census(g, opt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.events().size()));
}
BENCHMARK(BM_Census)->Args({1000, 1})->Args({10000, 1})->Args({10000, 4})->Unit(benchmark::kMillisecond);

void BM_PageRank(benchmark::State& state) {
  const auto g = graph_of(state.range(0));
  const GraphView view(g, g.window().end);
  for (auto _ : state) benchmark::DoNotOptimize(pagerank(view, EdgeKind::Message));
}
BENCHMARK(BM_PageRank)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_InfoPassRate(benchmark::State& state) {
  const auto g = graph_of(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(infopass::ip_success_rate(g));
}
BENCHMARK(BM_InfoPassRate)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
