#include "agraph/planner.h"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace agraph {

PolygonCostModel::PolygonCostModel(const ConjunctiveQuery& query,
                                   std::vector<std::size_t> cycle,
                                   const Catalog& catalog)
    : query_(&query), catalog_(&catalog), cycle_(std::move(cycle)) {
  memo_.assign(cycle_.size(),
               std::vector<std::optional<SideEstimate>>(cycle_.size()));
}

std::optional<std::size_t> PolygonCostModel::edge_between(std::size_t i,
                                                          std::size_t j) const {
  const std::size_t a = cycle_.at(i);
  const std::size_t b = cycle_.at(j);
  for (const QueryEdge& e : query_->edges()) {
    if ((e.src == a && e.dst == b) || (e.src == b && e.dst == a)) return e.idx;
  }
  return std::nullopt;
}

const PolygonCostModel::SideEstimate& PolygonCostModel::side(std::size_t i,
                                                             std::size_t j) const {
  auto& slot = memo_[i][j];
  if (slot) return *slot;
  SideEstimate est;
  if (auto e = edge_between(i, j)) {
    const QueryEdge& edge = query_->edge(*e);
    est.edge = *e;
    if (const OneGram* g = catalog_->one_gram(edge.label)) {
      est.card = static_cast<double>(g->count);
      const bool forward = edge.src == cycle_[i];
      est.distinct_i = static_cast<double>(forward ? g->distinct_subjects
                                                   : g->distinct_objects);
      est.distinct_j = static_cast<double>(forward ? g->distinct_objects
                                                   : g->distinct_subjects);
    }
  } else {
    bool first = true;
    for (std::size_t k = i + 1; k < j; ++k) {
      SideEstimate cand = join(i, k, j);
      if (first || cand.card < est.card) {
        est = cand;
        first = false;
      }
    }
  }
  slot = est;
  return *slot;
}

PolygonCostModel::SideEstimate PolygonCostModel::join(std::size_t i, std::size_t k,
                                                      std::size_t j) const {
  const SideEstimate a = side(i, k);
  const SideEstimate b = side(k, j);
  SideEstimate out;
  const double da = a.distinct_j;
  const double db = b.distinct_i;
  if (a.card <= 0 || b.card <= 0 || da <= 0 || db <= 0) return out;
  double keys = std::min(da, db);
  if (a.edge && b.edge) {
    const QueryEdge& ea = query_->edge(*a.edge);
    const QueryEdge& eb = query_->edge(*b.edge);
    const std::size_t shared = cycle_[k];
    const Role ra = ea.src == shared ? Role::kSubject : Role::kObject;
    const Role rb = eb.src == shared ? Role::kSubject : Role::kObject;
    keys = std::min(keys, static_cast<double>(
                              catalog_->key_count(ea.label, eb.label, join_type(ra, rb))));
  }
  out.card = keys * (a.card / da) * (b.card / db);
  out.distinct_i = std::min(out.card, a.distinct_i);
  out.distinct_j = std::min(out.card, b.distinct_j);
  return out;
}

double PolygonCostModel::triangle_cost(std::size_t i, std::size_t k,
                                       std::size_t j) const {
  return join(i, k, j).card;
}

double PolygonCostModel::side_card(std::size_t i, std::size_t j) const {
  return side(i, j).card;
}

namespace {

using NodePair = std::pair<std::size_t, std::size_t>;

struct Cell {
  double cost = 0;
  std::size_t apex = 0;
  std::vector<NodePair> chords;  // sorted
};

std::vector<NodePair> merged(const std::vector<NodePair>& a,
                             const std::vector<NodePair>& b,
                             std::optional<NodePair> extra) {
  std::vector<NodePair> out;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  if (extra) out.insert(std::upper_bound(out.begin(), out.end(), *extra), *extra);
  return out;
}

}  // namespace

TriangulationPlan plan_triangulation(const ConjunctiveQuery& query,
                                     const QueryShape& shape,
                                     const Catalog& catalog) {
  TriangulationPlan plan;
  std::map<NodePair, std::size_t> chord_index;
  std::set<std::array<std::size_t, 3>> seen_triangles;

  for (const auto& cycle : shape.cycles) {
    PolygonCostModel model(query, cycle, catalog);
    const std::size_t n = cycle.size();
    auto vertex_pair = [&](std::size_t i, std::size_t j) {
      return std::minmax(cycle[i], cycle[j]);
    };
    auto is_chord = [&](std::size_t i, std::size_t j) {
      return j - i >= 2 && !model.edge_between(i, j);
    };

    std::vector<std::vector<Cell>> table(n, std::vector<Cell>(n));
    for (std::size_t len = 2; len < n; ++len) {
      for (std::size_t i = 0; i + len < n; ++i) {
        const std::size_t j = i + len;
        std::optional<NodePair> self;
        if (is_chord(i, j)) self = vertex_pair(i, j);
        std::optional<Cell> best;
        for (std::size_t k = i + 1; k < j; ++k) {
          Cell cand;
          cand.cost = table[i][k].cost + table[k][j].cost + model.triangle_cost(i, k, j);
          cand.apex = k;
          cand.chords = merged(table[i][k].chords, table[k][j].chords, self);
          if (!best || cand.cost < best->cost ||
              (cand.cost == best->cost && cand.chords < best->chords)) {
            best = std::move(cand);
          }
        }
        table[i][j] = std::move(*best);
      }
    }
    plan.est_cost += table[0][n - 1].cost;

    auto side_of = [&](std::size_t i, std::size_t j) -> Side {
      if (auto e = model.edge_between(i, j)) return {Side::Kind::kEdge, *e};
      const NodePair key = vertex_pair(i, j);
      auto [it, inserted] = chord_index.try_emplace(key, plan.chords.size());
      if (inserted) {
        plan.chords.push_back({key.first, key.second, {}, model.side_card(i, j)});
      } else {
        Chord& c = plan.chords[it->second];
        c.est_card = std::min(c.est_card, model.side_card(i, j));
      }
      return {Side::Kind::kChord, it->second};
    };

    // Post-order: sub-polygons first so produced chords precede their use.
    auto emit = [&](auto&& self, std::size_t i, std::size_t j) -> void {
      if (j - i < 2) return;
      const std::size_t k = table[i][j].apex;
      self(self, i, k);
      self(self, k, j);
      std::array<std::size_t, 3> key{cycle[i], cycle[k], cycle[j]};
      std::sort(key.begin(), key.end());
      if (!seen_triangles.insert(key).second) return;
      Triangle t;
      t.nodes = {cycle[i], cycle[k], cycle[j]};
      t.sides = {side_of(i, k), side_of(k, j), side_of(i, j)};
      t.est_size = model.triangle_cost(i, k, j);
      plan.triangles.push_back(t);
    };
    emit(emit, 0, n - 1);
  }

  for (const Triangle& t : plan.triangles) {
    for (std::size_t s = 0; s < 3; ++s) {
      if (t.sides[s].kind != Side::Kind::kChord) continue;
      plan.chords[t.sides[s].index].triangles.emplace_back(t.sides[(s + 1) % 3],
                                                           t.sides[(s + 2) % 3]);
    }
  }
  return plan;
}

}  // namespace agraph
