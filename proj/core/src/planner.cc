#include "agraph/planner.h"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>

#include "agraph/answer_graph.h"

namespace agraph {

namespace {

constexpr EdgeMask bit(std::size_t e) { return EdgeMask{1} << e; }

Role role_at(const QueryEdge& e, std::size_t node) {
  return e.src == node ? Role::kSubject : Role::kObject;
}

// Exhaustive subset DP is used up to this many edges; larger queries are
// planned greedily by cheapest next step.
constexpr std::size_t kMaxDpEdges = 18;

}  // namespace

EdgeCostModel::EdgeCostModel(const ConjunctiveQuery& query, const Catalog& catalog)
    : query_(&query), catalog_(&catalog) {
  if (query.edges().size() > 64) {
    throw std::invalid_argument("queries are limited to 64 edges");
  }
  const std::size_t n = query.edges().size();
  for (const QueryEdge& e : query.edges()) {
    const OneGram* g = catalog.one_gram(e.label);
    grams_.push_back(g);
    if (g == nullptr || g->count == 0) zero_edges_ |= bit(e.idx);
  }
  touching_.assign(query.nodes().size(), 0);
  for (const QueryEdge& e : query.edges()) {
    touching_[e.src] |= bit(e.idx);
    touching_[e.dst] |= bit(e.idx);
  }
  keys_.assign(n * n * 2, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      keys_[(a * n + b) * 2] = lookup_keys(a, b, query.edge(a).src);
      keys_[(a * n + b) * 2 + 1] = lookup_keys(a, b, query.edge(a).dst);
    }
  }
}

bool EdgeCostModel::label_known(std::size_t edge) const {
  return (zero_edges_ & bit(edge)) == 0;
}

double EdgeCostModel::label_count(std::size_t edge) const {
  const OneGram* g = grams_[edge];
  return g ? static_cast<double>(g->count) : 0.0;
}

double EdgeCostModel::distinct(std::size_t edge, std::size_t node) const {
  const QueryEdge& e = query_->edge(edge);
  const OneGram* g = grams_[edge];
  if (g == nullptr) return 0.0;
  if (e.is_self_loop()) {
    return static_cast<double>(std::min(g->distinct_subjects, g->distinct_objects));
  }
  return static_cast<double>(g->distinct(role_at(e, node)));
}

std::uint64_t EdgeCostModel::keys_at(std::size_t e1, std::size_t e2,
                                     std::size_t node) const {
  const std::size_t n = query_->edges().size();
  return keys_[(e1 * n + e2) * 2 + (node == query_->edge(e1).src ? 0 : 1)];
}

std::uint64_t EdgeCostModel::lookup_keys(std::size_t e1, std::size_t e2,
                                         std::size_t node) const {
  const QueryEdge& a = query_->edge(e1);
  const QueryEdge& b = query_->edge(e2);
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  // A node may sit in both roles of a self loop; every combination bounds it.
  for (Role ra : {Role::kSubject, Role::kObject}) {
    if ((ra == Role::kSubject ? a.src : a.dst) != node) continue;
    for (Role rb : {Role::kSubject, Role::kObject}) {
      if ((rb == Role::kSubject ? b.src : b.dst) != node) continue;
      best = std::min(best, catalog_->key_count(a.label, b.label, join_type(ra, rb)));
    }
  }
  return best;
}

std::optional<double> EdgeCostModel::candidates(std::size_t node,
                                                EdgeMask done) const {
  const auto& nodes = query_->nodes();
  const bool empty = (done & zero_edges_) != 0;
  if (!nodes[node].is_variable) return empty ? 0.0 : 1.0;
  const EdgeMask incident = done & touching_[node];
  if (incident == 0) return std::nullopt;
  if (empty) return 0.0;
  double value = std::numeric_limits<double>::infinity();
  for (EdgeMask i = incident; i; i &= i - 1) {
    const auto a = static_cast<std::size_t>(std::countr_zero(i));
    value = std::min(value, distinct(a, node));
    for (EdgeMask j = i & (i - 1); j; j &= j - 1) {
      const auto b = static_cast<std::size_t>(std::countr_zero(j));
      value = std::min(value, static_cast<double>(keys_at(a, b, node)));
    }
  }
  return value;
}

double EdgeCostModel::step_cost(std::size_t edge, EdgeMask done) const {
  if ((done & zero_edges_) || (zero_edges_ & bit(edge))) return 0.0;
  const QueryEdge& e = query_->edge(edge);
  const auto& nodes = query_->nodes();

  auto bound_size = [&](std::size_t node) -> std::optional<double> {
    auto c = candidates(node, done);
    if (!c) return std::nullopt;
    if (!nodes[node].is_variable) return c;
    double size = *c;
    for (EdgeMask m = done & touching_[node]; m; m &= m - 1) {
      const auto other = static_cast<std::size_t>(std::countr_zero(m));
      size = std::min(size, static_cast<double>(keys_at(other, edge, node)));
    }
    return size;
  };

  if (e.is_self_loop()) {
    auto b = bound_size(e.src);
    return b ? estimate_pattern_cardinality(*catalog_, e.label, BoundSide::kBoth, *b)
             : estimate_pattern_cardinality(*catalog_, e.label, BoundSide::kNone, 0);
  }
  const auto bs = bound_size(e.src);
  const auto bo = bound_size(e.dst);
  if (bs && bo) {
    return estimate_pattern_cardinality(*catalog_, e.label, BoundSide::kBoth,
                                        *bs * *bo);
  }
  if (bs) {
    return estimate_pattern_cardinality(*catalog_, e.label, BoundSide::kSubject, *bs);
  }
  if (bo) {
    return estimate_pattern_cardinality(*catalog_, e.label, BoundSide::kObject, *bo);
  }
  return estimate_pattern_cardinality(*catalog_, e.label, BoundSide::kNone, 0);
}

bool EdgeCostModel::connects(std::size_t edge, EdgeMask done) const {
  if (done == 0) return true;
  for (std::size_t e = 0; e < query_->edges().size(); ++e) {
    if ((done & bit(e)) && query_->adjacent(e, edge)) return true;
  }
  return false;
}

double EdgeCostModel::order_cost(const std::vector<std::size_t>& order) const {
  double cost = 0;
  EdgeMask done = 0;
  for (std::size_t e : order) {
    cost += step_cost(e, done);
    done |= bit(e);
  }
  return cost;
}

namespace {

struct Candidate {
  double cost;
  double first_count;
  const std::vector<std::uint8_t>* prefix;
  std::size_t last;
};

// Lexicographic comparison of prefix+last sequences.
bool sequence_less(const std::vector<std::uint8_t>* pa, std::size_t la,
                   const std::vector<std::uint8_t>* pb, std::size_t lb) {
  const std::size_t na = (pa ? pa->size() : 0) + 1;
  const std::size_t nb = (pb ? pb->size() : 0) + 1;
  for (std::size_t i = 0; i < std::min(na, nb); ++i) {
    const std::size_t a = (pa && i < pa->size()) ? (*pa)[i] : la;
    const std::size_t b = (pb && i < pb->size()) ? (*pb)[i] : lb;
    if (a != b) return a < b;
  }
  return na < nb;
}

bool better(const Candidate& a, const Candidate& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.first_count != b.first_count) return a.first_count < b.first_count;
  return sequence_less(a.prefix, a.last, b.prefix, b.last);
}

std::vector<std::size_t> dp_order(const ConjunctiveQuery& query,
                                  const EdgeCostModel& model) {
  const std::size_t n = query.edges().size();
  const std::size_t states = std::size_t{1} << n;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(states, inf);
  std::vector<std::vector<std::uint8_t>> seq(states);

  for (EdgeMask mask = 1; mask < states; ++mask) {
    std::optional<Candidate> best;
    for (std::size_t e = 0; e < n; ++e) {
      if (!(mask & bit(e))) continue;
      const EdgeMask prev = mask ^ bit(e);
      Candidate cand{};
      if (prev == 0) {
        cand = {model.step_cost(e, 0), model.label_count(e), nullptr, e};
      } else {
        if (cost[prev] == inf || !model.connects(e, prev)) continue;
        cand = {cost[prev] + model.step_cost(e, prev),
                model.label_count(seq[prev].front()), &seq[prev], e};
      }
      if (!best || better(cand, *best)) best = cand;
    }
    if (!best) continue;
    cost[mask] = best->cost;
    if (best->prefix) seq[mask] = *best->prefix;
    seq[mask].push_back(static_cast<std::uint8_t>(best->last));
  }
  const auto& full = seq[states - 1];
  return {full.begin(), full.end()};
}

std::vector<std::size_t> greedy_order(const ConjunctiveQuery& query,
                                      const EdgeCostModel& model) {
  const std::size_t n = query.edges().size();
  std::vector<std::size_t> order;
  EdgeMask done = 0;
  while (order.size() < n) {
    std::optional<std::size_t> pick;
    double pick_cost = 0;
    for (std::size_t e = 0; e < n; ++e) {
      if ((done & bit(e)) || !model.connects(e, done)) continue;
      const double c = model.step_cost(e, done);
      if (!pick || c < pick_cost) {
        pick = e;
        pick_cost = c;
      }
    }
    order.push_back(*pick);
    done |= bit(*pick);
  }
  return order;
}

}  // namespace

EdgePlan plan_edgifier(const ConjunctiveQuery& query, const Catalog& catalog) {
  EdgeCostModel model(query, catalog);
  EdgePlan plan;
  for (std::size_t e = 0; e < query.edges().size(); ++e) {
    if (!model.label_known(e)) plan.missing_statistics = true;
  }
  plan.order = query.edges().size() <= kMaxDpEdges ? dp_order(query, model)
                                                    : greedy_order(query, model);
  EdgeMask done = 0;
  for (std::size_t e : plan.order) {
    PlanStep step;
    step.edge = e;
    step.est_edges = model.step_cost(e, done);
    plan.est_cost += step.est_edges;
    done |= bit(e);
    const QueryEdge& edge = query.edge(e);
    for (std::size_t node : {edge.src, edge.dst}) {
      if (!step.est_candidates.empty() && step.est_candidates.back().first == node) {
        continue;
      }
      step.est_candidates.emplace_back(node, model.candidates(node, done).value_or(0));
    }
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

bool is_connected_order(const ConjunctiveQuery& query,
                        const std::vector<std::size_t>& order) {
  if (order.size() != query.edges().size()) return false;
  std::vector<bool> seen_edge(query.edges().size(), false);
  std::vector<bool> bound(query.nodes().size(), false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t e = order[i];
    if (e >= seen_edge.size() || seen_edge[e]) return false;
    seen_edge[e] = true;
    const QueryEdge& edge = query.edge(e);
    const bool src_var = query.node(edge.src).is_variable;
    const bool dst_var = query.node(edge.dst).is_variable;
    if (i > 0 && !((src_var && bound[edge.src]) || (dst_var && bound[edge.dst]))) {
      return false;
    }
    if (src_var) bound[edge.src] = true;
    if (dst_var) bound[edge.dst] = true;
  }
  return true;
}

DefacPlan plan_defactorization(const ConjunctiveQuery& query,
                               const std::vector<std::size_t>& sizes) {
  const std::size_t n = query.edges().size();
  DefacPlan plan;
  std::vector<bool> chosen(n, false);
  std::vector<bool> bound(query.nodes().size(), false);
  auto connected = [&](std::size_t e) {
    const QueryEdge& edge = query.edge(e);
    return (query.node(edge.src).is_variable && bound[edge.src]) ||
           (query.node(edge.dst).is_variable && bound[edge.dst]);
  };
  while (plan.order.size() < n) {
    const bool first = plan.order.empty();
    std::optional<std::size_t> pick;
    bool pick_recent = false;
    for (std::size_t e = 0; e < n; ++e) {
      if (chosen[e] || (!first && !connected(e))) continue;
      const bool recent = !first && query.adjacent(e, plan.order.back());
      if (!pick || sizes[e] < sizes[*pick] ||
          (sizes[e] == sizes[*pick] && recent && !pick_recent)) {
        pick = e;
        pick_recent = recent;
      }
    }
    if (!pick) throw std::logic_error("query graph is not connected");
    chosen[*pick] = true;
    plan.order.push_back(*pick);
    const QueryEdge& edge = query.edge(*pick);
    bound[edge.src] = true;
    bound[edge.dst] = true;
  }
  return plan;
}

DefacPlan plan_defactorization(const ConjunctiveQuery& query,
                               const AnswerGraph& ag) {
  std::vector<std::size_t> sizes;
  sizes.reserve(query.edges().size());
  for (std::size_t e = 0; e < query.edges().size(); ++e) {
    sizes.push_back(ag.edge_set(e).size());
  }
  return plan_defactorization(query, sizes);
}

nlohmann::json to_json(const ConjunctiveQuery& query, const EdgePlan& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const PlanStep& step : plan.steps) {
    nlohmann::json cands = nlohmann::json::object();
    for (const auto& [node, est] : step.est_candidates) {
      cands[query.node(node).name] = est;
    }
    steps.push_back({{"edge", step.edge},
                     {"text", query.edge_text(step.edge)},
                     {"estEdges", step.est_edges},
                     {"estCandidates", std::move(cands)}});
  }
  return {{"order", plan.order},
          {"estCost", plan.est_cost},
          {"missingStatistics", plan.missing_statistics},
          {"steps", std::move(steps)}};
}

nlohmann::json to_json(const ConjunctiveQuery& query,
                       const TriangulationPlan& plan) {
  auto side_json = [&](const Side& side) -> nlohmann::json {
    if (side.kind == Side::Kind::kEdge) return {{"edge", side.index}};
    return {{"chord", side.index}};
  };
  nlohmann::json chords = nlohmann::json::array();
  for (const Chord& c : plan.chords) {
    chords.push_back({{"u", query.node(c.u).name},
                      {"v", query.node(c.v).name},
                      {"estCard", c.est_card},
                      {"triangles", c.triangles.size()}});
  }
  nlohmann::json triangles = nlohmann::json::array();
  for (const Triangle& t : plan.triangles) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t n : t.nodes) nodes.push_back(query.node(n).name);
    nlohmann::json sides = nlohmann::json::array();
    for (const Side& s : t.sides) sides.push_back(side_json(s));
    triangles.push_back(
        {{"nodes", std::move(nodes)}, {"sides", std::move(sides)}, {"estSize", t.est_size}});
  }
  return {{"chords", std::move(chords)},
          {"triangles", std::move(triangles)},
          {"estCost", plan.est_cost}};
}

}  // namespace agraph
