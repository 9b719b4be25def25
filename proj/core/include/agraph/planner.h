#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "agraph/catalog.h"
#include "agraph/query.h"

namespace agraph {

class AnswerGraph;

// Bitset of query edges; queries are limited to 64 edges.
using EdgeMask = std::uint64_t;

// Estimated edge walks for left-deep edge-extension orders.
//
// The state after a set S of extended edges is a per-node candidate estimate
// that depends only on S: the minimum over incident edges in S of the label's
// distinct count in that role, further capped by the 2-gram key count of every
// pair of incident edges in S. Constants are bound to a single node. Adding
// edge e to S scans estimate_pattern_cardinality() edges, where the bound set
// of a bound endpoint is its candidate estimate capped by the smallest key
// count between e and an already-extended edge sharing that endpoint. A
// zero-count label anywhere in S empties every estimate.
class EdgeCostModel {
 public:
  EdgeCostModel(const ConjunctiveQuery& query, const Catalog& catalog);

  // Candidate estimate of `node` after extending `done`; nullopt if unbound.
  std::optional<double> candidates(std::size_t node, EdgeMask done) const;
  // Estimated edge walks for extending `edge` after `done`.
  double step_cost(std::size_t edge, EdgeMask done) const;
  // Left fold of step costs; order must be connected.
  double order_cost(const std::vector<std::size_t>& order) const;

  // `edge` shares a variable with some edge in `done` (or `done` is empty).
  bool connects(std::size_t edge, EdgeMask done) const;
  bool label_known(std::size_t edge) const;
  double label_count(std::size_t edge) const;

 private:
  double distinct(std::size_t edge, std::size_t node) const;
  std::uint64_t keys_at(std::size_t e1, std::size_t e2, std::size_t node) const;
  std::uint64_t lookup_keys(std::size_t e1, std::size_t e2, std::size_t node) const;

  const ConjunctiveQuery* query_;
  const Catalog* catalog_;
  EdgeMask zero_edges_ = 0;
  std::vector<const OneGram*> grams_;
  std::vector<EdgeMask> touching_;  // per node: edges incident to it
  // keys_[(e1 * n + e2) * 2 + k]: key count at endpoint k (0 src, 1 dst) of e1.
  std::vector<std::uint64_t> keys_;
};

struct PlanStep {
  std::size_t edge = 0;
  double est_edges = 0;
  // (node, estimated candidates) for the edge's endpoints after the step.
  std::vector<std::pair<std::size_t, double>> est_candidates;
};

struct EdgePlan {
  std::vector<std::size_t> order;
  double est_cost = 0;
  std::vector<PlanStep> steps;
  // Some label is missing from the catalog; its edge is planned with zero
  // estimates.
  bool missing_statistics = false;
};

// Bottom-up DP over connected edge subsets returning a left-deep order with
// minimum estimated edge walks. Ties prefer the cheapest first edge by label
// count, then the lexicographically smallest edge index sequence.
EdgePlan plan_edgifier(const ConjunctiveQuery& query, const Catalog& catalog);

// A side of a triangle: a query edge or a chord.
struct Side {
  enum class Kind : std::uint8_t { kEdge, kChord };
  Kind kind = Kind::kEdge;
  std::size_t index = 0;

  friend bool operator==(const Side&, const Side&) = default;
};

// An added variable pair (u < v by node index) bisecting a cycle.
struct Chord {
  std::size_t u = 0;
  std::size_t v = 0;
  // For each triangle the chord is part of, the two opposite sides.
  std::vector<std::pair<Side, Side>> triangles;
  double est_card = 0;
};

// Triangle over nodes (x, y, z) with sides xy, yz, xz.
struct Triangle {
  std::array<std::size_t, 3> nodes{};
  std::array<Side, 3> sides{};
  double est_size = 0;
};

struct TriangulationPlan {
  std::vector<Chord> chords;
  // Dependency order: a chord used as a side is produced by an earlier
  // triangle (its xz side).
  std::vector<Triangle> triangles;
  double est_cost = 0;
};

// Estimates for one query cycle seen as a polygon v0..v(n-1). Sides between
// consecutive vertices, and diagonals that coincide with a query edge, use
// the edge's catalog statistics; every other diagonal (i, j) is estimated as
// the cheapest join over an apex k in (i, j).
class PolygonCostModel {
 public:
  PolygonCostModel(const ConjunctiveQuery& query, std::vector<std::size_t> cycle,
                   const Catalog& catalog);

  std::size_t size() const { return cycle_.size(); }
  const std::vector<std::size_t>& cycle() const { return cycle_; }

  // Estimated materialization of triangle (i, k, j), i < k < j: the join of
  // sides (i, k) and (k, j) on vertex k.
  double triangle_cost(std::size_t i, std::size_t k, std::size_t j) const;
  double side_card(std::size_t i, std::size_t j) const;
  // Query edge joining vertices i and j, if any (lowest index).
  std::optional<std::size_t> edge_between(std::size_t i, std::size_t j) const;

 private:
  struct SideEstimate {
    double card = 0;
    double distinct_i = 0;  // distinct nodes at the lower vertex
    double distinct_j = 0;  // distinct nodes at the upper vertex
    std::optional<std::size_t> edge;
  };
  const SideEstimate& side(std::size_t i, std::size_t j) const;
  SideEstimate join(std::size_t i, std::size_t k, std::size_t j) const;

  const ConjunctiveQuery* query_;
  const Catalog* catalog_;
  std::vector<std::size_t> cycle_;
  mutable std::vector<std::vector<std::optional<SideEstimate>>> memo_;
};

// DP over polygon triangulations of every basis cycle, minimising the summed
// triangle estimates. Ties prefer the lexicographically smallest chord list.
// Diagonals that coincide with query edges reuse the edge instead of a chord.
TriangulationPlan plan_triangulation(const ConjunctiveQuery& query,
                                     const QueryShape& shape,
                                     const Catalog& catalog);

struct DefacPlan {
  std::vector<std::size_t> order;
};

// Greedy join order over the answer graph: start at the smallest edge set,
// then repeatedly take the smallest connected one. Ties prefer an edge
// adjacent to the most recently chosen edge, then the lower index.
DefacPlan plan_defactorization(const ConjunctiveQuery& query,
                               const std::vector<std::size_t>& edge_set_sizes);
DefacPlan plan_defactorization(const ConjunctiveQuery& query,
                               const AnswerGraph& ag);

bool is_connected_order(const ConjunctiveQuery& query,
                        const std::vector<std::size_t>& order);

nlohmann::json to_json(const ConjunctiveQuery& query, const EdgePlan& plan);
nlohmann::json to_json(const ConjunctiveQuery& query,
                       const TriangulationPlan& plan);

}  // namespace agraph
