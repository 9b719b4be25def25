#include <benchmark/benchmark.h>

#include "agraph/answer_graph.h"
#include "agraph/catalog.h"
#include "agraph/planner.h"
#include "agraph/testkit.h"
#include "fixtures.h"

namespace agraph {
namespace {

void BM_FanTwoPhase(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const TripleStore store = fixtures::fan_store(k, k);
  const ConjunctiveQuery q = fixtures::chain_query();
  const Catalog cat = build_catalog(store);
  const EdgePlan plan = plan_edgifier(q, cat);
  for (auto _ : state) {
    const AnswerGraph ag = generate_answer_graph(q, plan, nullptr, store);
    const auto stats = generate_embeddings(ag, plan_defactorization(q, ag), {});
    benchmark::DoNotOptimize(stats.embeddings);
  }
  state.counters["embeddings"] = static_cast<double>(k) * k;
}
BENCHMARK(BM_FanTwoPhase)->Arg(10)->Arg(50)->Arg(200);

void BM_FanDirectJoin(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const TripleStore store = fixtures::fan_store(k, k);
  const ConjunctiveQuery q = fixtures::chain_query();
  const EdgePlan plan = plan_edgifier(q, build_catalog(store));
  for (auto _ : state) {
    const auto stats = direct_join(q, plan.order, store, {});
    benchmark::DoNotOptimize(stats.embeddings);
  }
}
BENCHMARK(BM_FanDirectJoin)->Arg(10)->Arg(50)->Arg(200);

void BM_BuildCatalog(benchmark::State& state) {
  const TripleStore store = random_store(
      7, {.nodes = 2000, .predicates = 10, .edges = static_cast<std::size_t>(state.range(0)),
          .skew = 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(build_catalog(store));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(store.size()));
}
BENCHMARK(BM_BuildCatalog)->Arg(1000)->Arg(10000);

void BM_PlanSnowflake(benchmark::State& state) {
  const TripleStore store =
      random_store(7, {.nodes = 500, .predicates = 3, .edges = 5000, .skew = 0.5});
  const Catalog cat = build_catalog(store);
  const std::string labels[] = {"p0", "p1", "p2"};
  std::vector<std::string> assign;
  for (std::size_t i = 0; i < snowflake9().placeholders; ++i) assign.push_back(labels[i % 3]);
  const ConjunctiveQuery q = instantiate(snowflake9(), assign);
  for (auto _ : state) benchmark::DoNotOptimize(plan_edgifier(q, cat));
}
BENCHMARK(BM_PlanSnowflake);

}  // namespace
}  // namespace agraph

BENCHMARK_MAIN();
