#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "agraph/answer_graph.h"
#include "agraph/catalog.h"
#include "agraph/planner.h"
#include "agraph/testkit.h"
#include "fixtures.h"

namespace agraph {
namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

Pairs decoded(const TripleStore& store, const PairSet& set) {
  Pairs out;
  for (auto [a, b] : set.sorted()) {
    out.emplace_back(store.nodes().decode(a), store.nodes().decode(b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::string> decoded(const TripleStore& store, const NodeSet* set) {
  std::set<std::string> out;
  if (set) {
    for (NodeId n : *set) out.insert(store.nodes().decode(n));
  }
  return out;
}

EdgePlan order_plan(std::vector<std::size_t> order) {
  EdgePlan plan;
  plan.order = std::move(order);
  return plan;
}

std::vector<NodePairs> snapshot(const AnswerGraph& ag) {
  std::vector<NodePairs> out;
  for (std::size_t e = 0; e < ag.query().edges().size(); ++e) {
    out.push_back(ag.edge_set(e).sorted());
  }
  return out;
}

EmbeddingSet embeddings_of(const AnswerGraph& ag, DefactorizationStats* stats = nullptr) {
  const auto v = collect_embeddings(ag, plan_defactorization(ag.query(), ag), stats);
  return {v.begin(), v.end()};
}

TEST(PairSet, Basics) {
  PairSet s;
  EXPECT_TRUE(s.insert(1, 2));
  EXPECT_FALSE(s.insert(1, 2));
  EXPECT_TRUE(s.insert(1, 3));
  EXPECT_TRUE(s.insert(4, 3));
  EXPECT_EQ(s.size(), 4u - 1);
  EXPECT_EQ(s.forward(1)->size(), 2u);
  EXPECT_EQ(s.backward(3)->size(), 2u);
  EXPECT_TRUE(s.erase(1, 3));
  EXPECT_FALSE(s.erase(1, 3));
  EXPECT_EQ(s.backward(3)->size(), 1u);
  EXPECT_TRUE(s.erase(4, 3));
  EXPECT_EQ(s.backward(3), nullptr);
  EXPECT_EQ(s.sorted(), (NodePairs{{1, 2}}));
}

TEST(Engine, ExtendChainStepByStep) {
  const TripleStore store = fixtures::chain_store();
  const ConjunctiveQuery q = fixtures::chain_query();
  AnswerGraph ag(q, store);
  EXPECT_EQ(ag.candidates(*q.find_node("?x")), nullptr);

  ag.extend_edge(1);
  EXPECT_EQ(decoded(store, ag.edge_set(1)), (Pairs{{"x1", "y1"}}));
  EXPECT_EQ(decoded(store, ag.candidates(*q.find_node("?x"))), std::set<std::string>{"x1"});
  EXPECT_EQ(decoded(store, ag.candidates(*q.find_node("?y"))), std::set<std::string>{"y1"});

  ag.extend_edge(0);
  EXPECT_EQ(decoded(store, ag.edge_set(0)),
            (Pairs{{"w1", "x1"}, {"w2", "x1"}, {"w3", "x1"}}));

  ag.extend_edge(2);
  EXPECT_EQ(decoded(store, ag.edge_set(2)),
            (Pairs{{"y1", "z1"}, {"y1", "z2"}, {"y1", "z3"}, {"y1", "z4"}}));
  EXPECT_EQ(ag.total_pairs(), 8u);
  EXPECT_EQ(ag.stats().edge_walks, 8u);
  EXPECT_TRUE(ag.processed(0));
}

TEST(Engine, BurnbackMakesOrderIrrelevant) {
  std::string text = fixtures::kChainText;
  text += "w1 A x2 .\n";
  const TripleStore store = load_ntriples(text);
  const ConjunctiveQuery q = fixtures::chain_query();

  const AnswerGraph b_first = generate_answer_graph(q, order_plan({1, 0, 2}), nullptr, store);
  const AnswerGraph a_first = generate_answer_graph(q, order_plan({0, 1, 2}), nullptr, store);
  EXPECT_EQ(b_first.stats().burned_pairs, 0u);
  EXPECT_EQ(a_first.stats().burned_pairs, 1u);
  EXPECT_EQ(a_first.stats().burned_nodes, 1u);
  EXPECT_EQ(snapshot(a_first), snapshot(b_first));
  EXPECT_EQ(a_first.total_pairs(), 8u);
}

TEST(Engine, EmptyEdgeEmptiesEverything) {
  const TripleStore store = fixtures::chain_store();
  const ConjunctiveQuery q = ConjunctiveQuery::parse("?w A ?x\n?x B ?y\n?y C ?z\n?z A ?q\n");
  const AnswerGraph ag = generate_answer_graph(q, order_plan({0, 1, 2, 3}), nullptr, store);
  EXPECT_EQ(ag.total_pairs(), 0u);
  for (std::size_t n = 0; n < q.nodes().size(); ++n) {
    EXPECT_TRUE(ag.candidates(n) == nullptr || ag.candidates(n)->empty());
  }
  EXPECT_EQ(count_embeddings(ag), 0u);
  EXPECT_TRUE(embeddings_of(ag).empty());
}

TEST(Engine, NodeBurnbackIdempotent) {
  const TripleStore store = fixtures::chain_store();
  const ConjunctiveQuery q = fixtures::chain_query();
  AnswerGraph ag = generate_answer_graph(q, order_plan({0, 1, 2}), nullptr, store);
  const auto before = snapshot(ag);
  const auto burned = ag.stats().burned_pairs;
  ag.node_burnback();
  EXPECT_EQ(snapshot(ag), before);
  EXPECT_EQ(ag.stats().burned_pairs, burned);
}

TEST(Engine, ChainPipeline) {
  const TripleStore store = fixtures::chain_store();
  const ConjunctiveQuery q = fixtures::chain_query();
  const AnswerGraph ag =
      generate_answer_graph(q, plan_edgifier(q, build_catalog(store)), nullptr, store);
  EXPECT_EQ(ag.total_pairs(), 8u);
  DefactorizationStats stats;
  EXPECT_EQ(embeddings_of(ag, &stats).size(), 12u);
  EXPECT_EQ(stats.embeddings, 12u);
  EXPECT_EQ(stats.failed_extensions, 0u);
  EXPECT_EQ(count_embeddings(ag), 12u);
  EXPECT_EQ(embeddings_of(ag), oracle_evaluate(q, store));

  const nlohmann::json j = stats_json(ag, stats);
  for (const char* key : {"edgeWalks", "agPairsPerEdge", "agTotal", "burnedNodes",
                          "burnedPairs", "embeddings", "phase1Ms", "phase2Ms"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["agTotal"], 8);
  EXPECT_EQ(j["agPairsPerEdge"], nlohmann::json({3, 1, 4}));
}

TEST(Engine, SpuriousNodeBurnbackOnly) {
  const TripleStore store = fixtures::spurious_store();
  const ConjunctiveQuery q = fixtures::diamond_query();
  const AnswerGraph ag =
      generate_answer_graph(q, plan_edgifier(q, build_catalog(store)), nullptr, store);
  EXPECT_EQ(ag.total_pairs(), 8u);
  DefactorizationStats stats;
  EXPECT_TRUE(embeddings_of(ag, &stats).empty());
  EXPECT_GT(stats.failed_extensions, 0u);
  EXPECT_EQ(count_embeddings(ag), 0u);
}

TEST(Engine, SpuriousEdgeBurnback) {
  const TripleStore store = fixtures::spurious_store();
  const Catalog cat = build_catalog(store);
  const ConjunctiveQuery q = fixtures::diamond_query();
  const TriangulationPlan tplan = plan_triangulation(q, analyze_shape(q), cat);
  const AnswerGraph ag =
      generate_answer_graph(q, plan_edgifier(q, cat), &tplan, store, {.edge_burnback = true});
  EXPECT_EQ(ag.total_pairs(), 0u);
}

TEST(Engine, ChordMaintenance) {
  const TripleStore store = fixtures::spurious_store();
  const Catalog cat = build_catalog(store);
  const ConjunctiveQuery q = fixtures::diamond_query();
  const TriangulationPlan tplan = plan_triangulation(q, analyze_shape(q), cat);
  ASSERT_EQ(tplan.chords.size(), 1u);

  AnswerGraph ag(q, store);
  ag.attach_triangulation(tplan);
  ASSERT_EQ(ag.chord_count(), 1u);
  ag.extend_edge(0);
  ag.extend_edge(1);
  ag.maintain_chord(0);
  EXPECT_TRUE(ag.chord_materialized(0));
  EXPECT_EQ(decoded(store, ag.chord_set(0)), (Pairs{{"a1", "d1"}, {"a2", "d2"}}));

  ag.extend_edge(2);
  ag.extend_edge(3);
  ag.maintain_chord(0);
  EXPECT_TRUE(ag.chord_set(0).empty());
  // The empty chord starves ?a and ?d, which cascades to every edge.
  EXPECT_EQ(ag.total_pairs(), 0u);
}

TEST(Engine, ChordWithEmptySide) {
  const TripleStore store = load_ntriples("a1 P b1\nx Q y\na1 R c1\nc1 S d1\n");
  const ConjunctiveQuery q = fixtures::diamond_query();
  const TriangulationPlan tplan = plan_triangulation(q, analyze_shape(q), build_catalog(store));
  AnswerGraph ag(q, store);
  ag.attach_triangulation(tplan);
  ag.extend_edge(2);
  ag.extend_edge(3);
  ag.maintain_chord(0);
  EXPECT_EQ(decoded(store, ag.chord_set(0)), (Pairs{{"a1", "d1"}}));
  ag.extend_edge(0);
  ag.extend_edge(1);
  ag.maintain_chord(0);
  EXPECT_TRUE(ag.chord_set(0).empty());
}

TEST(Engine, EdgeBurnbackOnAcyclicIsNoop) {
  const TripleStore store = fixtures::chain_store();
  const ConjunctiveQuery q = fixtures::chain_query();
  const Catalog cat = build_catalog(store);
  const TriangulationPlan tplan = plan_triangulation(q, analyze_shape(q), cat);
  const AnswerGraph plain = generate_answer_graph(q, plan_edgifier(q, cat), nullptr, store);
  const AnswerGraph burned =
      generate_answer_graph(q, plan_edgifier(q, cat), &tplan, store, {.edge_burnback = true});
  EXPECT_EQ(snapshot(plain), snapshot(burned));
}

TEST(Engine, SingleDiamondIsIdealWithEdgeBurnback) {
  std::string text = fixtures::kSpuriousText;
  text += "a9 P b9\nb9 Q d9\na9 R c9\nc9 S d9\n";
  const TripleStore store = load_ntriples(text);
  const Catalog cat = build_catalog(store);
  const ConjunctiveQuery q = fixtures::diamond_query();
  const TriangulationPlan tplan = plan_triangulation(q, analyze_shape(q), cat);
  const AnswerGraph ag =
      generate_answer_graph(q, plan_edgifier(q, cat), &tplan, store, {.edge_burnback = true});
  EXPECT_EQ(ag.total_pairs(), 4u);
  EXPECT_EQ(decoded(store, ag.edge_set(0)), (Pairs{{"a9", "b9"}}));
  EXPECT_EQ(decoded(store, ag.edge_set(3)), (Pairs{{"c9", "d9"}}));
  EXPECT_EQ(embeddings_of(ag).size(), 1u);

  const AnswerGraph loose = generate_answer_graph(q, plan_edgifier(q, cat), nullptr, store);
  EXPECT_EQ(loose.total_pairs(), 12u);
  EXPECT_EQ(embeddings_of(loose).size(), 1u);
}

TEST(Engine, EmptyAnswerGraphHasNoEmbeddings) {
  const TripleStore store = fixtures::chain_store();
  const ConjunctiveQuery q = ConjunctiveQuery::parse("?x Q ?y\n");
  const AnswerGraph ag = generate_answer_graph(q, order_plan({0}), nullptr, store);
  EXPECT_EQ(ag.total_pairs(), 0u);
  EXPECT_TRUE(embeddings_of(ag).empty());
}

TEST(Engine, ParallelEdgesIntersect) {
  const TripleStore store = load_ntriples("a A b\na B b\nc A d\nc B e\nd C f\nb C g\n");
  const ConjunctiveQuery q = ConjunctiveQuery::parse("?x A ?y\n?x B ?y\n?y C ?z\n");
  const AnswerGraph ag = generate_answer_graph(q, order_plan({0, 2, 1}), nullptr, store);
  EXPECT_EQ(decoded(store, ag.edge_set(0)), (Pairs{{"a", "b"}}));
  EXPECT_EQ(decoded(store, ag.edge_set(2)), (Pairs{{"b", "g"}}));
  EXPECT_EQ(embeddings_of(ag), oracle_evaluate(q, store));
  EXPECT_EQ(count_embeddings(ag), 1u);
}

TEST(Engine, OppositeParallelEdges) {
  const TripleStore store = load_ntriples("a A b\nb A a\nc A d\nd B c\ne A f\n");
  const ConjunctiveQuery q = ConjunctiveQuery::parse("?x A ?y\n?y A ?x\n");
  const AnswerGraph ag = generate_answer_graph(q, order_plan({0, 1}), nullptr, store);
  EXPECT_EQ(decoded(store, ag.edge_set(0)), (Pairs{{"a", "b"}, {"b", "a"}}));
  EXPECT_EQ(embeddings_of(ag), oracle_evaluate(q, store));
  EXPECT_EQ(count_embeddings(ag), 2u);
}

TEST(Engine, ConstantsAndSelfLoops) {
  const TripleStore store = load_ntriples(
      std::string(fixtures::kChainText) + "w1 L w1\nw2 L w3\n");
  for (const char* text : {"?w A x1\n", "?w A x1\n?w L ?w\n", "?w A ?x\n?x B y1\n",
                           "?w A nowhere\n", "w1 A ?x\n?x B ?y\n"}) {
    const ConjunctiveQuery q = ConjunctiveQuery::parse(text);
    const AnswerGraph ag =
        generate_answer_graph(q, plan_edgifier(q, build_catalog(store)), nullptr, store);
    const EmbeddingSet expected = oracle_evaluate(q, store);
    EXPECT_EQ(embeddings_of(ag), expected) << text;
    EXPECT_EQ(count_embeddings(ag), expected.size()) << text;
  }
}

TEST(Engine, FanCountsWithoutEnumerating) {
  const TripleStore store = fixtures::fan_store(300, 400);
  const ConjunctiveQuery q = fixtures::chain_query();
  const AnswerGraph ag =
      generate_answer_graph(q, plan_edgifier(q, build_catalog(store)), nullptr, store);
  EXPECT_EQ(ag.total_pairs(), 701u);
  EXPECT_EQ(count_embeddings(ag), 120000u);
}

TEST(Engine, DirectJoinMatches) {
  const TripleStore store = fixtures::chain_store();
  const ConjunctiveQuery q = fixtures::chain_query();
  EmbeddingSet got;
  const DirectJoinStats stats = direct_join(q, {1, 0, 2}, store, [&](auto t) {
    got.emplace(t.begin(), t.end());
  });
  EXPECT_EQ(stats.embeddings, 12u);
  EXPECT_EQ(got, oracle_evaluate(q, store));
  EXPECT_EQ(stats.edge_walks, 1u + 3u + 4u * 3u);
}

TEST(Engine, DebugEraseBreaksCompleteness) {
  const TripleStore store = fixtures::chain_store();
  const ConjunctiveQuery q = fixtures::chain_query();
  AnswerGraph ag = generate_answer_graph(q, order_plan({1, 0, 2}), nullptr, store);
  const auto pair = ag.edge_set(2).sorted().front();
  EXPECT_TRUE(ag.debug_erase_pair(2, pair.first, pair.second));
  EXPECT_EQ(ag.total_pairs(), 7u);
  EXPECT_EQ(embeddings_of(ag).size(), 9u);
}

}  // namespace
}  // namespace agraph
