#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

#include "agraph/triplestore.h"

namespace agraph {

enum class Role : std::uint8_t { kSubject, kObject };

// How two labelled edges meet: first letter is the role of the shared node in
// the first edge, second letter its role in the second edge. `kOS` means the
// first edge's object is the second edge's subject.
enum class JoinType : std::uint8_t { kSS, kSO, kOS, kOO };

JoinType join_type(Role first, Role second);
std::string_view to_string(JoinType jt);
std::optional<JoinType> parse_join_type(std::string_view text);
// Swapping the operands of a 2-gram: so <-> os, ss and oo unchanged.
JoinType mirror(JoinType jt);

struct OneGram {
  std::string label;
  std::uint64_t count = 0;
  std::uint64_t distinct_subjects = 0;
  std::uint64_t distinct_objects = 0;

  std::uint64_t distinct(Role role) const {
    return role == Role::kSubject ? distinct_subjects : distinct_objects;
  }
  friend bool operator==(const OneGram&, const OneGram&) = default;
};

struct TwoGram {
  std::string first;
  std::string second;
  JoinType join = JoinType::kSS;
  // Triple pairs (t1 labelled `first`, t2 labelled `second`) agreeing on the
  // joined positions.
  std::uint64_t pairs = 0;
  // Distinct nodes at which at least one such pair meets.
  std::uint64_t keys = 0;

  friend bool operator==(const TwoGram&, const TwoGram&) = default;
};

enum class BoundSide : std::uint8_t { kNone, kSubject, kObject, kBoth };

// Exact 1-gram and 2-gram edge-label statistics, keyed by label text. Only
// nonzero 2-grams are stored.
class Catalog {
 public:
  using TwoGramKey = std::tuple<std::string, std::string, JoinType>;

  const OneGram* one_gram(std::string_view label) const;
  const TwoGram* two_gram(std::string_view first, std::string_view second,
                          JoinType jt) const;
  // 0 when the 2-gram is absent.
  std::uint64_t key_count(std::string_view first, std::string_view second,
                          JoinType jt) const;

  std::uint64_t total_triples() const { return total_triples_; }
  const std::map<std::string, OneGram, std::less<>>& one_grams() const {
    return one_grams_;
  }
  const std::map<TwoGramKey, TwoGram>& two_grams() const { return two_grams_; }

  void add(OneGram gram);
  void add(TwoGram gram);

  friend bool operator==(const Catalog&, const Catalog&) = default;

 private:
  std::uint64_t total_triples_ = 0;
  std::map<std::string, OneGram, std::less<>> one_grams_;
  std::map<TwoGramKey, TwoGram> two_grams_;
};

Catalog build_catalog(const TripleStore& store);

// Uniform fan-out estimate of the number of `label` edges matched when the
// bound side(s) range over `bound_set_size` nodes. For kBoth the bound set
// size is the number of (subject, object) candidate combinations.
double estimate_pattern_cardinality(const Catalog& catalog,
                                    std::string_view label, BoundSide side,
                                    double bound_set_size);

// TSV layout:
//   #agraph-catalog<TAB>1
//   #total<TAB><triples>
//   1G<TAB>pred<TAB>count<TAB>dsubj<TAB>dobj
//   2G<TAB>p1<TAB>p2<TAB>jt<TAB>pairs<TAB>keys
void save_catalog(const Catalog& catalog, std::ostream& out);
Catalog load_catalog(std::istream& in);
Catalog load_catalog_file(const std::string& path);

}  // namespace agraph
