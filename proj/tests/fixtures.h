#pragma once

#include <string>

#include "agraph/query.h"
#include "agraph/triplestore.h"

namespace agraph::fixtures {

// Three A-edges fan into x1, one B-edge, four C-edges fan out of y1.
inline constexpr const char* kChainText =
    "w1 A x1 .\n"
    "w2 A x1 .\n"
    "w3 A x1 .\n"
    "x1 B y1 .\n"
    "y1 C z1 .\n"
    "y1 C z2 .\n"
    "y1 C z3 .\n"
    "y1 C z4 .\n";

inline constexpr const char* kChainQuery = "?w A ?x\n?x B ?y\n?y C ?z\n";

// Arc consistent for the diamond query but without any embedding.
inline constexpr const char* kSpuriousText =
    "a1 P b1\n"
    "a2 P b2\n"
    "b1 Q d1\n"
    "b2 Q d2\n"
    "a1 R c1\n"
    "a2 R c2\n"
    "c1 S d2\n"
    "c2 S d1\n";

inline constexpr const char* kDiamondQuery = "?a P ?b\n?b Q ?d\n?a R ?c\n?c S ?d\n";
inline constexpr const char* kTriangleQuery = "?a P ?b\n?b Q ?c\n?a R ?c\n";

inline TripleStore chain_store() { return load_ntriples(kChainText); }
inline TripleStore spurious_store() { return load_ntriples(kSpuriousText); }
inline ConjunctiveQuery chain_query() { return ConjunctiveQuery::parse(kChainQuery); }
inline ConjunctiveQuery diamond_query() { return ConjunctiveQuery::parse(kDiamondQuery); }

// k A-edges into x, x B y, m C-edges out of y.
inline TripleStore fan_store(int k, int m) {
  TripleStoreBuilder b;
  for (int i = 0; i < k; ++i) b.add("w" + std::to_string(i), "A", "x");
  b.add("x", "B", "y");
  for (int j = 0; j < m; ++j) b.add("y", "C", "z" + std::to_string(j));
  return std::move(b).build();
}

}  // namespace agraph::fixtures
