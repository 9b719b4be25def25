#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "agraph/catalog.h"
#include "agraph/query.h"
#include "agraph/triplestore.h"

namespace agraph {

using EmbeddingSet = std::set<std::vector<NodeId>>;
using PairSetSorted = std::set<std::pair<NodeId, NodeId>>;

// Reference evaluation: plain backtracking over the store in parse order, no
// answer graph, no planning. Tuples follow ConjunctiveQuery::variables().
EmbeddingSet oracle_evaluate(const ConjunctiveQuery& query, const TripleStore& store);
// Stops at the first embedding.
bool oracle_has_embedding(const ConjunctiveQuery& query, const TripleStore& store);

// Per query edge, the data pairs used by at least one embedding.
std::vector<PairSetSorted> oracle_ideal_ag(const ConjunctiveQuery& query,
                                           const TripleStore& store);

struct RandomStoreParams {
  std::size_t nodes = 40;
  std::size_t predicates = 4;
  // Triples drawn before duplicate removal.
  std::size_t edges = 200;
  // 0 is uniform; larger values concentrate endpoints on low node ids.
  double skew = 0.0;
};

struct RandomQueryParams {
  std::size_t edges = 3;
  // Cyclic queries are a single cycle over `edges` variables (3, 4 or 5).
  bool cyclic = false;
  // Pick labels and directions along a random walk in the data so that the
  // query is likely to match; otherwise labels are uniform.
  bool seed_from_data = true;
};

struct RandomInstance {
  TripleStore store;
  ConjunctiveQuery query;
};

// Deterministic for a given seed and parameters. Throws std::invalid_argument
// on infeasible parameters.
TripleStore random_store(std::uint64_t seed, const RandomStoreParams& params);
ConjunctiveQuery random_query(std::mt19937_64& rng, const TripleStore& store,
                              const RandomQueryParams& params);
RandomInstance random_instance(std::uint64_t seed, const RandomStoreParams& store_params,
                               const RandomQueryParams& query_params);

struct MinedQuery {
  std::string template_name;
  std::vector<std::string> labels;
  std::uint64_t embeddings = 0;
  std::size_t ag_total = 0;
};

void to_json(nlohmann::json& j, const MinedQuery& mined);

struct MinerOptions {
  // Skip assignments where two adjacent placeholders never meet in the data
  // (zero 2-gram key count for the joined roles).
  bool prune = true;
};

// Depth-first over label assignments (labels in descending frequency, then
// name), evaluating survivors with the two-phase engine and keeping the
// non-empty ones, up to `limit`.
std::vector<MinedQuery> mine_queries(const Template& tmpl, const TripleStore& store,
                                     const Catalog& catalog, std::size_t limit,
                                     const MinerOptions& options = {});

}  // namespace agraph
