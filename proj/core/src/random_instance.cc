#include <cmath>
#include <stdexcept>
#include <string>

#include "agraph/testkit.h"

namespace agraph {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::string var_name(std::size_t i) { return "?v" + std::to_string(i); }

// Triples incident to `node`, as (triple, node is subject).
std::vector<std::pair<Triple, bool>> incident(const TripleStore& store, NodeId node) {
  std::vector<std::pair<Triple, bool>> out;
  for (const Triple& t : store.scan({node, std::nullopt, std::nullopt})) {
    out.emplace_back(t, true);
  }
  for (const Triple& t : store.scan({std::nullopt, std::nullopt, node})) {
    if (t.s != t.o) out.emplace_back(t, false);
  }
  return out;
}

ConjunctiveQuery random_tree(std::mt19937_64& rng, const TripleStore& store,
                             const RandomQueryParams& params) {
  std::vector<EdgeSpec> specs;
  const auto& all = store.index(IndexOrder::kSpo);
  if (!params.seed_from_data) {
    for (std::size_t i = 0; i < params.edges; ++i) {
      const std::size_t attach = pick(rng, i + 1);
      const std::string label = store.predicates().decode(
          static_cast<PredId>(pick(rng, store.predicates().size())));
      if (rng() & 1) {
        specs.push_back({var_name(attach), label, var_name(i + 1)});
      } else {
        specs.push_back({var_name(i + 1), label, var_name(attach)});
      }
    }
    return ConjunctiveQuery::from_edges(specs);
  }
  // Grow along the data so the query has at least one embedding.
  std::vector<NodeId> image{all[pick(rng, all.size())].s};
  for (std::size_t i = 0; i < params.edges; ++i) {
    const std::size_t attach = pick(rng, image.size());
    const auto choices = incident(store, image[attach]);
    // Every image node has at least the triple it was reached through.
    const auto& [t, as_subject] = choices[pick(rng, choices.size())];
    const std::string label = store.predicates().decode(t.p);
    const std::string fresh = var_name(image.size());
    if (as_subject) {
      specs.push_back({var_name(attach), label, fresh});
      image.push_back(t.o);
    } else {
      specs.push_back({fresh, label, var_name(attach)});
      image.push_back(t.s);
    }
  }
  return ConjunctiveQuery::from_edges(specs);
}

ConjunctiveQuery random_cycle(std::mt19937_64& rng, const TripleStore& store,
                              const RandomQueryParams& params) {
  const std::size_t n = params.edges;
  const auto& all = store.index(IndexOrder::kSpo);
  auto random_label = [&] {
    return store.predicates().decode(
        static_cast<PredId>(pick(rng, store.predicates().size())));
  };
  // Ring ?v0 - ?v1 - ... - ?v(n-1) - ?v0.
  std::vector<EdgeSpec> specs;
  std::vector<NodeId> image{all[pick(rng, all.size())].s};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!params.seed_from_data) {
      const bool forward = rng() & 1;
      specs.push_back(forward ? EdgeSpec{var_name(i), random_label(), var_name(i + 1)}
                              : EdgeSpec{var_name(i + 1), random_label(), var_name(i)});
      continue;
    }
    const auto choices = incident(store, image.back());
    const auto& [t, as_subject] = choices[pick(rng, choices.size())];
    const std::string label = store.predicates().decode(t.p);
    if (as_subject) {
      specs.push_back({var_name(i), label, var_name(i + 1)});
      image.push_back(t.o);
    } else {
      specs.push_back({var_name(i + 1), label, var_name(i)});
      image.push_back(t.s);
    }
  }
  // Closing edge: reuse a data edge between the walk's ends when one exists.
  EdgeSpec closing{var_name(n - 1), random_label(), var_name(0)};
  if (params.seed_from_data) {
    const NodeId last = image.back();
    const NodeId first = image.front();
    std::vector<EdgeSpec> options;
    for (const Triple& t : store.scan({last, std::nullopt, first})) {
      options.push_back({var_name(n - 1), store.predicates().decode(t.p), var_name(0)});
    }
    for (const Triple& t : store.scan({first, std::nullopt, last})) {
      options.push_back({var_name(0), store.predicates().decode(t.p), var_name(n - 1)});
    }
    if (!options.empty()) closing = options[pick(rng, options.size())];
  }
  specs.push_back(closing);
  return ConjunctiveQuery::from_edges(specs);
}

}  // namespace

TripleStore random_store(std::uint64_t seed, const RandomStoreParams& params) {
  if (params.nodes == 0 || params.predicates == 0 || params.edges == 0) {
    throw std::invalid_argument("random store needs nodes, predicates and edges");
  }
  if (!(params.skew >= 0.0) || !std::isfinite(params.skew)) {
    throw std::invalid_argument("random store skew must be finite and >= 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto endpoint = [&] {
    const double u = std::pow(unit(rng), 1.0 + params.skew);
    return std::min(params.nodes - 1, static_cast<std::size_t>(u * params.nodes));
  };
  TripleStoreBuilder builder;
  for (std::size_t i = 0; i < params.edges; ++i) {
    const std::size_t s = endpoint();
    const std::size_t o = endpoint();
    const std::size_t p = pick(rng, params.predicates);
    builder.add("n" + std::to_string(s), "p" + std::to_string(p), "n" + std::to_string(o));
  }
  return std::move(builder).build();
}

ConjunctiveQuery random_query(std::mt19937_64& rng, const TripleStore& store,
                              const RandomQueryParams& params) {
  if (params.edges == 0) throw std::invalid_argument("random query needs edges");
  if (store.size() == 0) throw std::invalid_argument("random query needs a non-empty store");
  if (params.cyclic) {
    if (params.edges < 3 || params.edges > 5) {
      throw std::invalid_argument("cyclic random queries have 3, 4 or 5 edges");
    }
    return random_cycle(rng, store, params);
  }
  return random_tree(rng, store, params);
}

RandomInstance random_instance(std::uint64_t seed, const RandomStoreParams& store_params,
                               const RandomQueryParams& query_params) {
  TripleStore store = random_store(seed, store_params);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ConjunctiveQuery query = random_query(rng, store, query_params);
  return {std::move(store), std::move(query)};
}

}  // namespace agraph
