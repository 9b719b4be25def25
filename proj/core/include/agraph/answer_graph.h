#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "agraph/planner.h"
#include "agraph/query.h"
#include "agraph/triplestore.h"

namespace agraph {

using NodeSet = std::unordered_set<NodeId>;
using NodePairs = std::vector<std::pair<NodeId, NodeId>>;

// A binary relation over data nodes with forward and backward adjacency.
class PairSet {
 public:
  bool insert(NodeId a, NodeId b);
  bool erase(NodeId a, NodeId b);
  bool contains(NodeId a, NodeId b) const;
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Neighbours of `a` as first component / of `b` as second; nullptr if none.
  const NodeSet* forward(NodeId a) const;
  const NodeSet* backward(NodeId b) const;
  const std::unordered_map<NodeId, NodeSet>& forward_map() const { return fwd_; }
  const std::unordered_map<NodeId, NodeSet>& backward_map() const { return bwd_; }

  // Sorted copy, for reporting and tests.
  NodePairs sorted() const;

 private:
  std::unordered_map<NodeId, NodeSet> fwd_;
  std::unordered_map<NodeId, NodeSet> bwd_;
  std::size_t size_ = 0;
};

struct EngineStats {
  std::uint64_t edge_walks = 0;
  std::uint64_t pairs_added = 0;
  std::uint64_t burned_nodes = 0;
  std::uint64_t burned_pairs = 0;
  std::uint64_t chord_pairs_added = 0;
  std::uint64_t chord_pairs_burned = 0;
  double phase1_ms = 0;
};

struct EvalOptions {
  // Cull spurious pairs with triangle consistency over the chords. Only has
  // an effect when a triangulation is attached.
  bool edge_burnback = false;
};

// The factorized answer set of one query: per query edge the surviving data
// node pairs, per query node its candidate data nodes, plus materialized
// chords when a triangulation is attached.
//
// Holds pointers to the query and store; both must outlive it. Single
// threaded.
class AnswerGraph {
 public:
  AnswerGraph(const ConjunctiveQuery& query, const TripleStore& store);

  const ConjunctiveQuery& query() const { return *query_; }
  const TripleStore& store() const { return *store_; }

  const PairSet& edge_set(std::size_t edge) const { return relations_.at(edge).pairs; }
  bool processed(std::size_t edge) const { return relations_.at(edge).live; }
  // nullptr while no extended edge touches the node (constants are bound
  // from the start).
  const NodeSet* candidates(std::size_t node) const;
  std::size_t total_pairs() const;
  std::vector<std::size_t> edge_set_sizes() const;

  std::size_t chord_count() const { return relations_.size() - edge_count_; }
  const PairSet& chord_set(std::size_t chord) const;
  bool chord_materialized(std::size_t chord) const;

  const EngineStats& stats() const { return stats_; }
  EngineStats& mutable_stats() { return stats_; }

  // Populates the edge's pairs from the store under the current candidate
  // sets, then burns back to a fixpoint.
  void extend_edge(std::size_t edge);
  // Global arc-consistency fixpoint over all live relations (edges, chords,
  // parallel edge groups). Idempotent.
  void node_burnback();

  // Registers chord relations and triangles; must precede any extension.
  void attach_triangulation(const TriangulationPlan& plan);
  // Intersects the chord with the join of every newly ready triangle, then
  // burns back.
  void maintain_chord(std::size_t chord);
  // maintain_chord() on every chord until nothing new becomes ready.
  void maintain_chords();
  // Triangle-consistency fixpoint over all triangles whose sides are live.
  void edge_burnback();

  // Removes one pair without any cascade. Breaks the AG's invariants; exists
  // so verification paths can be tested against a corrupted answer graph.
  bool debug_erase_pair(std::size_t edge, NodeId a, NodeId b);

 private:
  struct Relation {
    std::size_t a = 0;  // query node of the first component
    std::size_t b = 0;  // query node of the second component
    PairSet pairs;
    bool live = false;
    bool is_chord = false;
    std::uint64_t version = 0;
    std::vector<std::size_t> parallel;  // other edges over the same node pair
  };
  struct TriangleState {
    std::array<std::size_t, 3> nodes{};      // x, y, z
    std::array<std::size_t, 3> relations{};  // xy, yz, xz
    std::array<std::uint64_t, 3> checked_versions{};
    bool checked = false;
  };

  std::size_t relation_of(const Side& side) const;
  // Data nodes across relation `rel` from `node` sitting at query node `at`.
  const NodeSet* across(const Relation& rel, std::size_t at, NodeId node) const;
  bool contains_oriented(const Relation& rel, std::size_t from_node, NodeId x,
                         NodeId y) const;

  void make_live(std::size_t rel);
  void remove_node(std::size_t node, NodeId value);
  void erase_pair(std::size_t rel, NodeId a, NodeId b);
  void drain();
  void sync_parallel(std::size_t edge);
  void restrict_to_projection(std::size_t rel);
  bool check_triangle(std::size_t tri);

  const ConjunctiveQuery* query_;
  const TripleStore* store_;
  std::size_t edge_count_ = 0;
  std::vector<Relation> relations_;
  std::vector<bool> bound_;
  std::vector<NodeSet> candidates_;
  // Per query node, live relations touching it.
  std::vector<std::vector<std::size_t>> incident_;
  std::deque<std::pair<std::size_t, NodeId>> burn_queue_;
  std::vector<TriangleState> triangles_;
  // Per chord, (triangle, incorporated) flags.
  std::vector<std::vector<std::pair<std::size_t, bool>>> chord_triangles_;
  EngineStats stats_;
};

// Phase 1: extends edges in plan order with interleaved node burnback, keeps
// chords of `tplan` (if any) up to date, finishes with a global fixpoint and,
// if requested, edge burnback.
AnswerGraph generate_answer_graph(const ConjunctiveQuery& query,
                                  const EdgePlan& plan,
                                  const TriangulationPlan* tplan,
                                  const TripleStore& store,
                                  const EvalOptions& options = {});

// One embedding: data node per query variable, in variables() order.
using Embedding = std::vector<NodeId>;
using EmbeddingSink = std::function<void(std::span<const NodeId>)>;

struct DefactorizationStats {
  std::uint64_t embeddings = 0;
  // Partial tuples produced (every successful one-edge extension).
  std::uint64_t extensions = 0;
  // Partial tuples abandoned because the next edge had no match.
  std::uint64_t failed_extensions = 0;
  double phase2_ms = 0;
};

// Phase 2: backtracking join of the AG edge sets in `dplan` order. Each
// embedding is passed to `sink` exactly once (sink may be empty).
DefactorizationStats generate_embeddings(const AnswerGraph& ag,
                                         const DefacPlan& dplan,
                                         const EmbeddingSink& sink);
std::vector<Embedding> collect_embeddings(const AnswerGraph& ag,
                                          const DefacPlan& dplan,
                                          DefactorizationStats* stats = nullptr);

// Number of embeddings represented by `ag`. Acyclic queries are counted by
// dynamic programming over the tree without enumerating; cyclic ones by
// enumeration. Saturates at UINT64_MAX.
std::uint64_t count_embeddings(const AnswerGraph& ag);

struct DirectJoinStats {
  std::uint64_t edge_walks = 0;
  std::uint64_t extensions = 0;
  std::uint64_t embeddings = 0;
  double elapsed_ms = 0;
};

// Unfactorized baseline: backtracking join straight over the store in the
// given edge order, no answer graph.
DirectJoinStats direct_join(const ConjunctiveQuery& query,
                            const std::vector<std::size_t>& order,
                            const TripleStore& store, const EmbeddingSink& sink);

// {edgeWalks, agPairsPerEdge, agTotal, burnedNodes, burnedPairs, embeddings,
//  phase1Ms, phase2Ms}
nlohmann::json stats_json(const AnswerGraph& ag, const DefactorizationStats& phase2);

}  // namespace agraph
