#include "agraph/answer_graph.h"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace agraph {

bool PairSet::insert(NodeId a, NodeId b) {
  if (!fwd_[a].insert(b).second) return false;
  bwd_[b].insert(a);
  ++size_;
  return true;
}

bool PairSet::erase(NodeId a, NodeId b) {
  auto it = fwd_.find(a);
  if (it == fwd_.end() || it->second.erase(b) == 0) return false;
  if (it->second.empty()) fwd_.erase(it);
  auto jt = bwd_.find(b);
  jt->second.erase(a);
  if (jt->second.empty()) bwd_.erase(jt);
  --size_;
  return true;
}

bool PairSet::contains(NodeId a, NodeId b) const {
  auto it = fwd_.find(a);
  return it != fwd_.end() && it->second.count(b) > 0;
}

const NodeSet* PairSet::forward(NodeId a) const {
  auto it = fwd_.find(a);
  return it == fwd_.end() ? nullptr : &it->second;
}

const NodeSet* PairSet::backward(NodeId b) const {
  auto it = bwd_.find(b);
  return it == bwd_.end() ? nullptr : &it->second;
}

NodePairs PairSet::sorted() const {
  NodePairs out;
  out.reserve(size_);
  for (const auto& [a, bs] : fwd_) {
    for (NodeId b : bs) out.emplace_back(a, b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

AnswerGraph::AnswerGraph(const ConjunctiveQuery& query, const TripleStore& store)
    : query_(&query), store_(&store), edge_count_(query.edges().size()) {
  const auto& nodes = query.nodes();
  bound_.assign(nodes.size(), false);
  candidates_.assign(nodes.size(), {});
  incident_.assign(nodes.size(), {});
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (nodes[n].is_variable) continue;
    bound_[n] = true;
    if (auto id = store.nodes().find(nodes[n].name)) candidates_[n].insert(*id);
  }
  relations_.resize(edge_count_);
  for (const QueryEdge& e : query.edges()) {
    relations_[e.idx].a = e.src;
    relations_[e.idx].b = e.dst;
  }
  for (std::size_t i = 0; i < edge_count_; ++i) {
    for (std::size_t j = 0; j < edge_count_; ++j) {
      if (i == j) continue;
      const auto& ri = relations_[i];
      const auto& rj = relations_[j];
      if (std::minmax(ri.a, ri.b) == std::minmax(rj.a, rj.b)) {
        relations_[i].parallel.push_back(j);
      }
    }
  }
}

const NodeSet* AnswerGraph::candidates(std::size_t node) const {
  return bound_.at(node) ? &candidates_[node] : nullptr;
}

std::size_t AnswerGraph::total_pairs() const {
  std::size_t total = 0;
  for (std::size_t e = 0; e < edge_count_; ++e) total += relations_[e].pairs.size();
  return total;
}

std::vector<std::size_t> AnswerGraph::edge_set_sizes() const {
  std::vector<std::size_t> sizes;
  for (std::size_t e = 0; e < edge_count_; ++e) sizes.push_back(relations_[e].pairs.size());
  return sizes;
}

const PairSet& AnswerGraph::chord_set(std::size_t chord) const {
  return relations_.at(edge_count_ + chord).pairs;
}

bool AnswerGraph::chord_materialized(std::size_t chord) const {
  return relations_.at(edge_count_ + chord).live;
}

std::size_t AnswerGraph::relation_of(const Side& side) const {
  return side.kind == Side::Kind::kEdge ? side.index : edge_count_ + side.index;
}

const NodeSet* AnswerGraph::across(const Relation& rel, std::size_t at,
                                   NodeId node) const {
  return at == rel.a ? rel.pairs.forward(node) : rel.pairs.backward(node);
}

bool AnswerGraph::contains_oriented(const Relation& rel, std::size_t from_node,
                                    NodeId x, NodeId y) const {
  return from_node == rel.a ? rel.pairs.contains(x, y) : rel.pairs.contains(y, x);
}

void AnswerGraph::make_live(std::size_t rel) {
  Relation& r = relations_[rel];
  r.live = true;
  incident_[r.a].push_back(rel);
  if (r.b != r.a) incident_[r.b].push_back(rel);
}

void AnswerGraph::remove_node(std::size_t node, NodeId value) {
  if (candidates_[node].erase(value) == 0) return;
  ++stats_.burned_nodes;
  burn_queue_.emplace_back(node, value);
}

void AnswerGraph::erase_pair(std::size_t rel, NodeId a, NodeId b) {
  Relation& r = relations_[rel];
  if (!r.pairs.erase(a, b)) return;
  ++r.version;
  if (r.is_chord) {
    ++stats_.chord_pairs_burned;
  } else {
    ++stats_.burned_pairs;
  }
  if (!r.pairs.forward(a)) remove_node(r.a, a);
  if (!r.pairs.backward(b)) remove_node(r.b, b);
  for (std::size_t sibling : r.parallel) {
    const Relation& s = relations_[sibling];
    if (!s.live) continue;
    if (s.a == r.a) {
      erase_pair(sibling, a, b);
    } else {
      erase_pair(sibling, b, a);
    }
  }
}

void AnswerGraph::drain() {
  std::vector<NodeId> scratch;
  while (!burn_queue_.empty()) {
    const auto [node, value] = burn_queue_.front();
    burn_queue_.pop_front();
    for (std::size_t rel : incident_[node]) {
      const Relation& r = relations_[rel];
      if (r.a == node) {
        if (const NodeSet* out = r.pairs.forward(value)) {
          scratch.assign(out->begin(), out->end());
          for (NodeId other : scratch) erase_pair(rel, value, other);
        }
      }
      if (r.b == node) {
        if (const NodeSet* in = r.pairs.backward(value)) {
          scratch.assign(in->begin(), in->end());
          for (NodeId other : scratch) erase_pair(rel, other, value);
        }
      }
    }
  }
}

void AnswerGraph::sync_parallel(std::size_t edge) {
  for (std::size_t sibling : relations_[edge].parallel) {
    if (!relations_[sibling].live) continue;
    const std::size_t a = relations_[edge].a;
    for (const auto& [x, y] : relations_[edge].pairs.sorted()) {
      if (!contains_oriented(relations_[sibling], a, x, y)) erase_pair(edge, x, y);
    }
    const std::size_t sa = relations_[sibling].a;
    for (const auto& [x, y] : relations_[sibling].pairs.sorted()) {
      if (!contains_oriented(relations_[edge], sa, x, y)) erase_pair(sibling, x, y);
    }
  }
}

void AnswerGraph::restrict_to_projection(std::size_t rel) {
  const Relation& r = relations_[rel];
  for (std::size_t node : {r.a, r.b}) {
    const auto& side = node == r.a ? r.pairs.forward_map() : r.pairs.backward_map();
    if (!bound_[node]) {
      bound_[node] = true;
      for (const auto& [value, unused] : side) candidates_[node].insert(value);
      continue;
    }
    std::vector<NodeId> unsupported;
    for (NodeId value : candidates_[node]) {
      if (!side.count(value)) unsupported.push_back(value);
    }
    for (NodeId value : unsupported) remove_node(node, value);
  }
}

void AnswerGraph::extend_edge(std::size_t edge) {
  Relation& rel = relations_.at(edge);
  if (rel.live) throw std::logic_error("edge extended twice");
  const QueryEdge& qe = query_->edge(edge);
  const std::size_t u = rel.a;
  const std::size_t v = rel.b;
  PairSet pairs;
  if (auto pid = store_->predicates().find(qe.label)) {
    auto walk = [&](const TriplePattern& pattern) {
      auto run = store_->scan(pattern);
      stats_.edge_walks += run.size();
      return run;
    };
    if (u == v) {
      if (bound_[u]) {
        for (NodeId n : candidates_[u]) {
          for (const Triple& t : walk({n, *pid, n})) pairs.insert(t.s, t.o);
        }
      } else {
        for (const Triple& t : walk({std::nullopt, *pid, std::nullopt})) {
          if (t.s == t.o) pairs.insert(t.s, t.o);
        }
      }
    } else if (bound_[u] && bound_[v]) {
      if (candidates_[u].size() <= candidates_[v].size()) {
        for (NodeId s : candidates_[u]) {
          for (const Triple& t : walk({s, *pid, std::nullopt})) {
            if (candidates_[v].count(t.o)) pairs.insert(t.s, t.o);
          }
        }
      } else {
        for (NodeId o : candidates_[v]) {
          for (const Triple& t : walk({std::nullopt, *pid, o})) {
            if (candidates_[u].count(t.s)) pairs.insert(t.s, t.o);
          }
        }
      }
    } else if (bound_[u]) {
      for (NodeId s : candidates_[u]) {
        for (const Triple& t : walk({s, *pid, std::nullopt})) pairs.insert(t.s, t.o);
      }
    } else if (bound_[v]) {
      for (NodeId o : candidates_[v]) {
        for (const Triple& t : walk({std::nullopt, *pid, o})) pairs.insert(t.s, t.o);
      }
    } else {
      for (const Triple& t : walk({std::nullopt, *pid, std::nullopt})) {
        pairs.insert(t.s, t.o);
      }
    }
  }
  stats_.pairs_added += pairs.size();
  rel.pairs = std::move(pairs);
  make_live(edge);
  sync_parallel(edge);
  restrict_to_projection(edge);
  drain();
}

void AnswerGraph::node_burnback() {
  for (std::size_t e = 0; e < edge_count_; ++e) {
    if (relations_[e].live) sync_parallel(e);
  }
  for (std::size_t node = 0; node < candidates_.size(); ++node) {
    if (!bound_[node]) continue;
    std::vector<NodeId> unsupported;
    for (NodeId value : candidates_[node]) {
      for (std::size_t rel : incident_[node]) {
        if (!across(relations_[rel], node, value)) {
          unsupported.push_back(value);
          break;
        }
      }
    }
    for (NodeId value : unsupported) remove_node(node, value);
  }
  drain();
}

void AnswerGraph::attach_triangulation(const TriangulationPlan& plan) {
  for (std::size_t e = 0; e < edge_count_; ++e) {
    if (relations_[e].live) {
      throw std::logic_error("triangulation must be attached before extension");
    }
  }
  relations_.resize(edge_count_);
  triangles_.clear();
  chord_triangles_.assign(plan.chords.size(), {});
  for (const Chord& c : plan.chords) {
    Relation r;
    r.a = c.u;
    r.b = c.v;
    r.is_chord = true;
    relations_.push_back(std::move(r));
  }
  for (const Triangle& t : plan.triangles) {
    TriangleState state;
    state.nodes = t.nodes;
    for (std::size_t s = 0; s < 3; ++s) {
      state.relations[s] = relation_of(t.sides[s]);
      if (t.sides[s].kind == Side::Kind::kChord) {
        chord_triangles_[t.sides[s].index].emplace_back(triangles_.size(), false);
      }
    }
    triangles_.push_back(state);
  }
}

void AnswerGraph::maintain_chord(std::size_t chord) {
  const std::size_t rel_id = edge_count_ + chord;
  for (auto& [tri, incorporated] : chord_triangles_.at(chord)) {
    if (incorporated) continue;
    const TriangleState& t = triangles_[tri];
    std::size_t r1 = 0;
    std::size_t r2 = 0;
    bool first = true;
    for (std::size_t rel : t.relations) {
      if (rel == rel_id) continue;
      (first ? r1 : r2) = rel;
      first = false;
    }
    if (!relations_[r1].live || !relations_[r2].live) continue;

    const std::size_t u = relations_[rel_id].a;
    // r1 must join u to the apex.
    if (relations_[r1].a != u && relations_[r1].b != u) std::swap(r1, r2);
    const Relation& ru = relations_[r1];
    const Relation& rv = relations_[r2];
    const std::size_t apex = ru.a == u ? ru.b : ru.a;

    PairSet joined;
    const auto& from_u = ru.a == u ? ru.pairs.forward_map() : ru.pairs.backward_map();
    for (const auto& [x, mids] : from_u) {
      for (NodeId mid : mids) {
        if (const NodeSet* ys = across(rv, apex, mid)) {
          for (NodeId y : *ys) joined.insert(x, y);
        }
      }
    }

    Relation& chord_rel = relations_[rel_id];
    if (!chord_rel.live) {
      stats_.chord_pairs_added += joined.size();
      chord_rel.pairs = std::move(joined);
      make_live(rel_id);
      restrict_to_projection(rel_id);
    } else {
      for (const auto& [x, y] : chord_rel.pairs.sorted()) {
        if (!joined.contains(x, y)) erase_pair(rel_id, x, y);
      }
    }
    incorporated = true;
    drain();
  }
}

void AnswerGraph::maintain_chords() {
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t c = 0; c < chord_triangles_.size(); ++c) {
      const auto before = std::count_if(chord_triangles_[c].begin(),
                                        chord_triangles_[c].end(),
                                        [](const auto& p) { return p.second; });
      maintain_chord(c);
      const auto after = std::count_if(chord_triangles_[c].begin(),
                                       chord_triangles_[c].end(),
                                       [](const auto& p) { return p.second; });
      progress |= after > before;
    }
  }
}

bool AnswerGraph::check_triangle(std::size_t tri) {
  TriangleState& t = triangles_[tri];
  const auto [x, y, z] = t.nodes;
  // (side relation, its two nodes, opposite node, relations to the opposite)
  struct Check {
    std::size_t rel, p, q, w, rel_pw, rel_qw;
  };
  const std::array<Check, 3> checks = {{
      {t.relations[0], x, y, z, t.relations[2], t.relations[1]},
      {t.relations[1], y, z, x, t.relations[0], t.relations[2]},
      {t.relations[2], x, z, y, t.relations[0], t.relations[1]},
  }};
  bool removed = false;
  for (const Check& c : checks) {
    const Relation& r = relations_[c.rel];
    NodePairs unsupported;
    for (const auto& [first, second] : r.pairs.sorted()) {
      const NodeId pv = r.a == c.p ? first : second;
      const NodeId qv = r.a == c.p ? second : first;
      const NodeSet* via_p = across(relations_[c.rel_pw], c.p, pv);
      const NodeSet* via_q = across(relations_[c.rel_qw], c.q, qv);
      bool ok = false;
      if (via_p && via_q) {
        const NodeSet& small = via_p->size() <= via_q->size() ? *via_p : *via_q;
        const NodeSet& large = via_p->size() <= via_q->size() ? *via_q : *via_p;
        ok = std::any_of(small.begin(), small.end(),
                         [&](NodeId w) { return large.count(w) > 0; });
      }
      if (!ok) unsupported.emplace_back(first, second);
    }
    for (const auto& [first, second] : unsupported) erase_pair(c.rel, first, second);
    drain();
    removed |= !unsupported.empty();
  }
  for (std::size_t s = 0; s < 3; ++s) {
    t.checked_versions[s] = relations_[t.relations[s]].version;
  }
  t.checked = true;
  return removed;
}

void AnswerGraph::edge_burnback() {
  maintain_chords();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t tri = 0; tri < triangles_.size(); ++tri) {
      const TriangleState& t = triangles_[tri];
      bool ready = true;
      bool dirty = !t.checked;
      for (std::size_t s = 0; s < 3; ++s) {
        const Relation& r = relations_[t.relations[s]];
        ready &= r.live;
        dirty |= r.version != t.checked_versions[s];
      }
      if (ready && dirty) changed |= check_triangle(tri);
    }
  }
}

bool AnswerGraph::debug_erase_pair(std::size_t edge, NodeId a, NodeId b) {
  return relations_.at(edge).pairs.erase(a, b);
}

AnswerGraph generate_answer_graph(const ConjunctiveQuery& query,
                                  const EdgePlan& plan,
                                  const TriangulationPlan* tplan,
                                  const TripleStore& store,
                                  const EvalOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  AnswerGraph ag(query, store);
  if (tplan) ag.attach_triangulation(*tplan);
  for (std::size_t e : plan.order) {
    ag.extend_edge(e);
    if (tplan) ag.maintain_chords();
  }
  ag.node_burnback();
  if (tplan) {
    ag.maintain_chords();
    if (options.edge_burnback) ag.edge_burnback();
  }
  ag.mutable_stats().phase1_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return ag;
}

nlohmann::json stats_json(const AnswerGraph& ag, const DefactorizationStats& phase2) {
  const EngineStats& s = ag.stats();
  return {{"edgeWalks", s.edge_walks},
          {"agPairsPerEdge", ag.edge_set_sizes()},
          {"agTotal", ag.total_pairs()},
          {"burnedNodes", s.burned_nodes},
          {"burnedPairs", s.burned_pairs},
          {"embeddings", phase2.embeddings},
          {"phase1Ms", s.phase1_ms},
          {"phase2Ms", phase2.phase2_ms}};
}

}  // namespace agraph
