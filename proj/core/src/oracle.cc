#include <optional>

#include "agraph/testkit.h"

namespace agraph {

namespace {

// Walks edges in parse order, binding endpoints straight from store scans.
// `stop_early` ends the search at the first complete binding.
class NaiveMatcher {
 public:
  NaiveMatcher(const ConjunctiveQuery& query, const TripleStore& store)
      : query_(query), store_(store), value_(query.nodes().size()),
        preds_(query.edges().size()) {
    feasible_ = true;
    for (const QueryEdge& e : query.edges()) {
      preds_[e.idx] = store.predicates().find(e.label);
      feasible_ &= preds_[e.idx].has_value();
    }
    for (std::size_t n = 0; n < query.nodes().size(); ++n) {
      if (query.node(n).is_variable) continue;
      value_[n] = store.nodes().find(query.node(n).name);
      feasible_ &= value_[n].has_value();
    }
  }

  void run(EmbeddingSet* out, bool stop_early) {
    out_ = out;
    stop_early_ = stop_early;
    if (feasible_) match(0);
  }

  bool found() const { return found_; }

 private:
  void match(std::size_t i) {
    if (stop_early_ && found_) return;
    if (i == query_.edges().size()) {
      found_ = true;
      if (out_) {
        std::vector<NodeId> tuple;
        for (std::size_t v : query_.variables()) tuple.push_back(*value_[v]);
        out_->insert(std::move(tuple));
      }
      return;
    }
    const QueryEdge& e = query_.edge(i);
    const bool had_src = value_[e.src].has_value();
    const bool had_dst = value_[e.dst].has_value();
    TriplePattern pattern{value_[e.src], preds_[i], value_[e.dst]};
    for (const Triple& t : store_.scan(pattern)) {
      if (e.src == e.dst && t.s != t.o) continue;
      if (!had_src) value_[e.src] = t.s;
      if (!had_dst) value_[e.dst] = t.o;
      match(i + 1);
      if (!had_src) value_[e.src].reset();
      if (!had_dst) value_[e.dst].reset();
      if (stop_early_ && found_) return;
    }
  }

  const ConjunctiveQuery& query_;
  const TripleStore& store_;
  std::vector<std::optional<NodeId>> value_;
  std::vector<std::optional<PredId>> preds_;
  bool feasible_ = false;
  bool found_ = false;
  bool stop_early_ = false;
  EmbeddingSet* out_ = nullptr;
};

}  // namespace

EmbeddingSet oracle_evaluate(const ConjunctiveQuery& query, const TripleStore& store) {
  EmbeddingSet out;
  NaiveMatcher(query, store).run(&out, false);
  return out;
}

bool oracle_has_embedding(const ConjunctiveQuery& query, const TripleStore& store) {
  NaiveMatcher matcher(query, store);
  matcher.run(nullptr, true);
  return matcher.found();
}

std::vector<PairSetSorted> oracle_ideal_ag(const ConjunctiveQuery& query,
                                           const TripleStore& store) {
  std::vector<PairSetSorted> out(query.edges().size());
  const EmbeddingSet embeddings = oracle_evaluate(query, store);
  std::vector<std::optional<std::size_t>> column(query.nodes().size());
  for (std::size_t i = 0; i < query.variables().size(); ++i) {
    column[query.variables()[i]] = i;
  }
  std::vector<NodeId> constant(query.nodes().size(), 0);
  for (std::size_t n = 0; n < query.nodes().size(); ++n) {
    if (!query.node(n).is_variable) {
      constant[n] = store.nodes().find(query.node(n).name).value_or(0);
    }
  }
  for (const auto& tuple : embeddings) {
    for (const QueryEdge& e : query.edges()) {
      const NodeId a = column[e.src] ? tuple[*column[e.src]] : constant[e.src];
      const NodeId b = column[e.dst] ? tuple[*column[e.dst]] : constant[e.dst];
      out[e.idx].emplace(a, b);
    }
  }
  return out;
}

}  // namespace agraph
