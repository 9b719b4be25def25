#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <queue>
#include <unordered_map>

#include "agraph/answer_graph.h"

namespace agraph {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Backtracking join over the answer graph's edge sets.
class Defactorizer {
 public:
  Defactorizer(const AnswerGraph& ag, const DefacPlan& plan, const EmbeddingSink& sink)
      : ag_(ag), query_(ag.query()), plan_(plan), sink_(sink) {
    binding_.assign(query_.nodes().size(), 0);
    bound_.assign(query_.nodes().size(), false);
    tuple_.resize(query_.variables().size());
  }

  DefactorizationStats run() {
    for (std::size_t n = 0; n < query_.nodes().size(); ++n) {
      if (query_.node(n).is_variable) continue;
      const NodeSet* c = ag_.candidates(n);
      if (c == nullptr || c->empty()) return stats_;
      binding_[n] = *c->begin();
      bound_[n] = true;
    }
    if (!plan_.order.empty()) extend(0);
    return stats_;
  }

 private:
  void descend(std::size_t depth, bool& any) {
    any = true;
    ++stats_.extensions;
    extend(depth + 1);
  }

  void extend(std::size_t depth) {
    if (depth == plan_.order.size()) {
      ++stats_.embeddings;
      if (sink_) {
        const auto& vars = query_.variables();
        for (std::size_t i = 0; i < vars.size(); ++i) tuple_[i] = binding_[vars[i]];
        sink_(tuple_);
      }
      return;
    }
    const QueryEdge& e = query_.edge(plan_.order[depth]);
    const PairSet& pairs = ag_.edge_set(e.idx);
    const std::size_t u = e.src;
    const std::size_t v = e.dst;
    bool any = false;
    if (bound_[u] && bound_[v]) {
      if (pairs.contains(binding_[u], binding_[v])) descend(depth, any);
    } else if (bound_[u]) {
      if (const NodeSet* out = pairs.forward(binding_[u])) {
        bound_[v] = true;
        for (NodeId b : *out) {
          binding_[v] = b;
          descend(depth, any);
        }
        bound_[v] = false;
      }
    } else if (bound_[v]) {
      if (const NodeSet* in = pairs.backward(binding_[v])) {
        bound_[u] = true;
        for (NodeId a : *in) {
          binding_[u] = a;
          descend(depth, any);
        }
        bound_[u] = false;
      }
    } else {
      bound_[u] = bound_[v] = true;
      for (const auto& [a, bs] : pairs.forward_map()) {
        for (NodeId b : bs) {
          if (u == v && a != b) continue;
          binding_[u] = a;
          binding_[v] = b;
          descend(depth, any);
        }
      }
      bound_[u] = bound_[v] = false;
    }
    if (!any) ++stats_.failed_extensions;
  }

  const AnswerGraph& ag_;
  const ConjunctiveQuery& query_;
  const DefacPlan& plan_;
  const EmbeddingSink& sink_;
  std::vector<NodeId> binding_;
  std::vector<bool> bound_;
  std::vector<NodeId> tuple_;
  DefactorizationStats stats_;
};

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  return __builtin_add_overflow(a, b, &r) ? std::numeric_limits<std::uint64_t>::max() : r;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  return __builtin_mul_overflow(a, b, &r) ? std::numeric_limits<std::uint64_t>::max() : r;
}

}  // namespace

DefactorizationStats generate_embeddings(const AnswerGraph& ag, const DefacPlan& dplan,
                                         const EmbeddingSink& sink) {
  const auto start = Clock::now();
  DefactorizationStats stats = Defactorizer(ag, dplan, sink).run();
  stats.phase2_ms = elapsed_ms(start);
  return stats;
}

std::vector<Embedding> collect_embeddings(const AnswerGraph& ag, const DefacPlan& dplan,
                                          DefactorizationStats* stats) {
  std::vector<Embedding> out;
  auto result = generate_embeddings(ag, dplan, [&out](std::span<const NodeId> tuple) {
    out.emplace_back(tuple.begin(), tuple.end());
  });
  if (stats) *stats = result;
  return out;
}

std::uint64_t count_embeddings(const AnswerGraph& ag) {
  const ConjunctiveQuery& q = ag.query();
  for (std::size_t e = 0; e < q.edges().size(); ++e) {
    if (ag.edge_set(e).empty()) return 0;
  }
  const QueryShape shape = analyze_shape(q);
  if (!shape.acyclic) {
    return generate_embeddings(ag, plan_defactorization(q, ag), {}).embeddings;
  }

  const auto& nodes = q.nodes();
  auto value_of_constant = [&](std::size_t n) -> std::optional<NodeId> {
    const NodeSet* c = ag.candidates(n);
    if (c == nullptr || c->empty()) return std::nullopt;
    return *c->begin();
  };

  // Unary edges (self loops, constant endpoints) filter individual nodes.
  auto unary_ok = [&](std::size_t var, NodeId value) {
    for (const QueryEdge& e : q.edges()) {
      if (!e.touches(var)) continue;
      const PairSet& pairs = ag.edge_set(e.idx);
      if (e.is_self_loop()) {
        if (!pairs.contains(value, value)) return false;
      } else if (!nodes[e.other(var)].is_variable) {
        auto c = value_of_constant(e.other(var));
        if (!c) return false;
        if (!(e.src == var ? pairs.contains(value, *c) : pairs.contains(*c, value))) {
          return false;
        }
      }
    }
    return true;
  };

  // Tree over variables: for each child, the edges to its parent.
  const std::size_t root = q.variables().front();
  std::vector<std::size_t> order;
  std::vector<std::size_t> parent(nodes.size(), root);
  std::vector<std::vector<std::size_t>> parent_edges(nodes.size());
  std::vector<bool> seen(nodes.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(root);
  seen[root] = true;
  while (!frontier.empty()) {
    const std::size_t x = frontier.front();
    frontier.pop();
    order.push_back(x);
    for (const QueryEdge& e : q.edges()) {
      if (e.is_self_loop() || !e.touches(x)) continue;
      const std::size_t y = e.other(x);
      if (!nodes[y].is_variable) continue;
      if (!seen[y]) {
        seen[y] = true;
        parent[y] = x;
        frontier.push(y);
      }
      if (parent[y] == x && y != root) {
        auto& pe = parent_edges[y];
        if (std::find(pe.begin(), pe.end(), e.idx) == pe.end()) pe.push_back(e.idx);
      }
    }
  }

  std::vector<std::unordered_map<NodeId, std::uint64_t>> counts(nodes.size());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t x = *it;
    const NodeSet* cands = ag.candidates(x);
    if (cands == nullptr) return 0;
    for (NodeId value : *cands) {
      if (!unary_ok(x, value)) continue;
      std::uint64_t total = 1;
      for (std::size_t child : order) {
        if (child == root || parent[child] != x) continue;
        const auto& pe = parent_edges[child];
        const QueryEdge& rep = q.edge(pe.front());
        const PairSet& pairs = ag.edge_set(rep.idx);
        const NodeSet* across = rep.src == x ? pairs.forward(value) : pairs.backward(value);
        std::uint64_t sum = 0;
        if (across) {
          for (NodeId m : *across) {
            bool all = true;
            for (std::size_t k = 1; k < pe.size() && all; ++k) {
              const QueryEdge& par = q.edge(pe[k]);
              const PairSet& pp = ag.edge_set(par.idx);
              all = par.src == x ? pp.contains(value, m) : pp.contains(m, value);
            }
            if (!all) continue;
            auto found = counts[child].find(m);
            if (found != counts[child].end()) sum = sat_add(sum, found->second);
          }
        }
        total = sat_mul(total, sum);
        if (total == 0) break;
      }
      if (total > 0) counts[x][value] = total;
    }
  }
  std::uint64_t result = 0;
  for (const auto& [value, c] : counts[root]) result = sat_add(result, c);
  return result;
}

DirectJoinStats direct_join(const ConjunctiveQuery& query,
                            const std::vector<std::size_t>& order,
                            const TripleStore& store, const EmbeddingSink& sink) {
  const auto start = Clock::now();
  DirectJoinStats stats;
  const auto& nodes = query.nodes();
  std::vector<NodeId> binding(nodes.size(), 0);
  std::vector<bool> bound(nodes.size(), false);
  std::vector<NodeId> tuple(query.variables().size());
  std::vector<PredId> preds;
  bool feasible = true;
  for (std::size_t e : order) {
    auto pid = store.predicates().find(query.edge(e).label);
    feasible &= pid.has_value();
    preds.push_back(pid.value_or(0));
  }
  for (std::size_t n = 0; n < nodes.size() && feasible; ++n) {
    if (nodes[n].is_variable) continue;
    auto id = store.nodes().find(nodes[n].name);
    feasible &= id.has_value();
    binding[n] = id.value_or(0);
    bound[n] = true;
  }

  auto step = [&](auto&& self, std::size_t depth) -> void {
    if (depth == order.size()) {
      ++stats.embeddings;
      if (sink) {
        const auto& vars = query.variables();
        for (std::size_t i = 0; i < vars.size(); ++i) tuple[i] = binding[vars[i]];
        sink(tuple);
      }
      return;
    }
    const QueryEdge& e = query.edge(order[depth]);
    TriplePattern pattern;
    pattern.p = preds[depth];
    if (bound[e.src]) pattern.s = binding[e.src];
    if (bound[e.dst]) pattern.o = binding[e.dst];
    const bool bind_src = !bound[e.src];
    const bool bind_dst = !bound[e.dst] && e.dst != e.src;
    auto run = store.scan(pattern);
    stats.edge_walks += run.size();
    for (const Triple& t : run) {
      if (e.is_self_loop() && t.s != t.o) continue;
      if (bind_src) {
        binding[e.src] = t.s;
        bound[e.src] = true;
      }
      if (bind_dst) {
        binding[e.dst] = t.o;
        bound[e.dst] = true;
      }
      ++stats.extensions;
      self(self, depth + 1);
    }
    if (bind_src) bound[e.src] = false;
    if (bind_dst) bound[e.dst] = false;
  };
  if (feasible && !order.empty()) step(step, 0);
  stats.elapsed_ms = elapsed_ms(start);
  return stats;
}

}  // namespace agraph
