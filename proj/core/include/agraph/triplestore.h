#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace agraph {

using NodeId = std::uint32_t;
using PredId = std::uint32_t;

struct Triple {
  NodeId s;
  PredId p;
  NodeId o;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Bijective term <-> dense id mapping, ids assigned in first-seen order.
class Dictionary {
 public:
  std::uint32_t encode(std::string_view term);
  std::optional<std::uint32_t> find(std::string_view term) const;
  const std::string& decode(std::uint32_t id) const { return terms_.at(id); }
  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

// The six permutations of (subject, predicate, object) that the store keeps
// sorted. The name lists the sort key from most to least significant.
enum class IndexOrder : std::uint8_t { kSpo, kSop, kPso, kPos, kOsp, kOps };

inline constexpr std::array<IndexOrder, 6> kAllIndexOrders = {
    IndexOrder::kSpo, IndexOrder::kSop, IndexOrder::kPso,
    IndexOrder::kPos, IndexOrder::kOsp, IndexOrder::kOps};

std::string_view to_string(IndexOrder order);

// Unset positions are free.
struct TriplePattern {
  std::optional<NodeId> s;
  std::optional<PredId> p;
  std::optional<NodeId> o;
};

struct StoreStats {
  std::size_t triples = 0;
  std::size_t nodes = 0;
  std::size_t predicates = 0;
};

void to_json(nlohmann::json& j, const StoreStats& stats);

// In-memory data graph: a set of distinct triples over dictionary-encoded
// terms. Node and predicate terms live in separate id spaces. Immutable once
// built; concurrent readers are fine.
class TripleStore {
 public:
  TripleStore() = default;

  // Takes ownership of the dictionaries and an arbitrary (possibly duplicated)
  // triple list. Ids must be valid for the given dictionaries.
  TripleStore(Dictionary nodes, Dictionary predicates,
              std::vector<Triple> triples);

  std::size_t size() const { return indexes_[0].size(); }
  bool empty() const { return size() == 0; }
  const Dictionary& nodes() const { return nodes_; }
  const Dictionary& predicates() const { return predicates_; }
  StoreStats stats() const {
    return {size(), nodes_.size(), predicates_.size()};
  }

  // All triples matching the bound positions, as a contiguous run of the
  // index whose sort key starts with exactly those positions.
  std::span<const Triple> scan(const TriplePattern& pattern) const;

  // Same result set, but forced through `order`: the longest bound prefix of
  // that permutation is range-searched and the remaining bound positions are
  // filtered.
  std::vector<Triple> scan_via(IndexOrder order,
                               const TriplePattern& pattern) const;

  bool contains(const Triple& t) const;

  std::span<const Triple> index(IndexOrder order) const {
    return indexes_[static_cast<std::size_t>(order)];
  }

  static IndexOrder choose_index(const TriplePattern& pattern);

 private:
  Dictionary nodes_;
  Dictionary predicates_;
  std::array<std::vector<Triple>, 6> indexes_;
};

// Incremental construction from term text. Duplicate triples collapse.
class TripleStoreBuilder {
 public:
  void add(std::string_view s, std::string_view p, std::string_view o);
  TripleStore build() &&;

 private:
  Dictionary nodes_;
  Dictionary predicates_;
  std::vector<Triple> triples_;
};

// Line-oriented triple text: `s p o [.]`, whitespace separated, `<...>`
// brackets stripped, `#` starts a comment outside brackets. Throws ParseError
// carrying the 1-based line number.
TripleStore load_ntriples(std::istream& in);
TripleStore load_ntriples(std::string_view text);

// Snapshot: dictionaries plus the sorted id-triple dump.
void save_snapshot(const TripleStore& store, std::ostream& out);
TripleStore load_snapshot(std::istream& in);

// Loads either a snapshot (detected by its header line) or triple text.
TripleStore load_store_file(const std::string& path);

inline constexpr std::string_view kSnapshotMagic = "#agraph-snapshot";

}  // namespace agraph
