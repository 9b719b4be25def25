#include "agraph/triplestore.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "agraph/error.h"

namespace agraph {

namespace {

using Key = std::array<std::uint32_t, 3>;

// Positions 0 = s, 1 = p, 2 = o, listed in sort significance order.
constexpr std::array<std::array<int, 3>, 6> kPermutation = {{
    {0, 1, 2},  // spo
    {0, 2, 1},  // sop
    {1, 0, 2},  // pso
    {1, 2, 0},  // pos
    {2, 0, 1},  // osp
    {2, 1, 0},  // ops
}};

std::uint32_t position(const Triple& t, int pos) {
  switch (pos) {
    case 0:
      return t.s;
    case 1:
      return t.p;
    default:
      return t.o;
  }
}

Key key_of(IndexOrder order, const Triple& t) {
  const auto& perm = kPermutation[static_cast<std::size_t>(order)];
  return {position(t, perm[0]), position(t, perm[1]), position(t, perm[2])};
}

std::array<std::optional<std::uint32_t>, 3> bound_positions(
    const TriplePattern& pattern) {
  return {pattern.s, pattern.p, pattern.o};
}

// Equal range of `index` (sorted by `order`) on the first `prefix_len` key
// components of `probe`.
std::span<const Triple> prefix_range(std::span<const Triple> index,
                                     IndexOrder order, const Key& probe,
                                     std::size_t prefix_len) {
  if (prefix_len == 0) return index;
  auto less_prefix = [&](const Key& a, const Key& b) {
    for (std::size_t i = 0; i < prefix_len; ++i) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  };
  auto lo = std::lower_bound(index.begin(), index.end(), probe,
                             [&](const Triple& t, const Key& k) {
                               return less_prefix(key_of(order, t), k);
                             });
  auto hi = std::upper_bound(lo, index.end(), probe,
                             [&](const Key& k, const Triple& t) {
                               return less_prefix(k, key_of(order, t));
                             });
  return {lo, hi};
}

bool matches(const Triple& t, const TriplePattern& pattern) {
  return (!pattern.s || *pattern.s == t.s) && (!pattern.p || *pattern.p == t.p) &&
         (!pattern.o || *pattern.o == t.o);
}

// Splits one line into terms. Returns false with `error` set on bad syntax.
bool tokenize(std::string_view line, std::vector<std::string_view>& terms,
              std::string& error) {
  terms.clear();
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
           c == '\f';
  };
  while (i < line.size()) {
    if (is_space(line[i])) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    if (line[i] == '<') {
      auto close = line.find('>', i + 1);
      if (close == std::string_view::npos) {
        error = "unterminated '<'";
        return false;
      }
      auto inner = line.substr(i + 1, close - i - 1);
      if (inner.empty()) {
        error = "empty term '<>'";
        return false;
      }
      if (std::any_of(inner.begin(), inner.end(), is_space)) {
        error = "whitespace inside '<...>'";
        return false;
      }
      terms.push_back(inner);
      i = close + 1;
      // `<o>.` is a common way to end a statement.
      if (i < line.size() && line[i] == '.' &&
          (i + 1 == line.size() || is_space(line[i + 1]))) {
        terms.push_back(".");
        ++i;
      } else if (i < line.size() && !is_space(line[i])) {
        error = "unexpected character after '>'";
        return false;
      }
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    terms.push_back(line.substr(start, i - start));
  }
  return true;
}

}  // namespace

std::uint32_t Dictionary::encode(std::string_view term) {
  auto [it, inserted] = ids_.try_emplace(std::string(term),
                                         static_cast<std::uint32_t>(terms_.size()));
  if (inserted) terms_.emplace_back(term);
  return it->second;
}

std::optional<std::uint32_t> Dictionary::find(std::string_view term) const {
  auto it = ids_.find(std::string(term));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(IndexOrder order) {
  static constexpr std::array<std::string_view, 6> kNames = {
      "spo", "sop", "pso", "pos", "osp", "ops"};
  return kNames[static_cast<std::size_t>(order)];
}

void to_json(nlohmann::json& j, const StoreStats& stats) {
  j = nlohmann::json{{"triples", stats.triples},
                     {"nodes", stats.nodes},
                     {"predicates", stats.predicates}};
}

TripleStore::TripleStore(Dictionary nodes, Dictionary predicates,
                         std::vector<Triple> triples)
    : nodes_(std::move(nodes)), predicates_(std::move(predicates)) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  for (IndexOrder order : kAllIndexOrders) {
    auto& index = indexes_[static_cast<std::size_t>(order)];
    index = triples;
    if (order != IndexOrder::kSpo) {
      std::sort(index.begin(), index.end(),
                [order](const Triple& a, const Triple& b) {
                  return key_of(order, a) < key_of(order, b);
                });
    }
  }
}

IndexOrder TripleStore::choose_index(const TriplePattern& pattern) {
  const bool s = pattern.s.has_value();
  const bool p = pattern.p.has_value();
  const bool o = pattern.o.has_value();
  if (s && o && !p) return IndexOrder::kSop;
  if (s) return IndexOrder::kSpo;
  if (p && o) return IndexOrder::kPos;
  if (p) return IndexOrder::kPso;
  if (o) return IndexOrder::kOsp;
  return IndexOrder::kSpo;
}

std::span<const Triple> TripleStore::scan(const TriplePattern& pattern) const {
  const IndexOrder order = choose_index(pattern);
  const auto bound = bound_positions(pattern);
  const auto& perm = kPermutation[static_cast<std::size_t>(order)];
  Key probe{};
  std::size_t prefix = 0;
  while (prefix < 3 && bound[perm[prefix]]) {
    probe[prefix] = *bound[perm[prefix]];
    ++prefix;
  }
  return prefix_range(index(order), order, probe, prefix);
}

std::vector<Triple> TripleStore::scan_via(IndexOrder order,
                                          const TriplePattern& pattern) const {
  const auto bound = bound_positions(pattern);
  const auto& perm = kPermutation[static_cast<std::size_t>(order)];
  Key probe{};
  std::size_t prefix = 0;
  while (prefix < 3 && bound[perm[prefix]]) {
    probe[prefix] = *bound[perm[prefix]];
    ++prefix;
  }
  std::vector<Triple> out;
  for (const Triple& t : prefix_range(index(order), order, probe, prefix)) {
    if (matches(t, pattern)) out.push_back(t);
  }
  return out;
}

bool TripleStore::contains(const Triple& t) const {
  return std::binary_search(indexes_[0].begin(), indexes_[0].end(), t);
}

void TripleStoreBuilder::add(std::string_view s, std::string_view p,
                             std::string_view o) {
  const NodeId sid = nodes_.encode(s);
  const PredId pid = predicates_.encode(p);
  const NodeId oid = nodes_.encode(o);
  triples_.push_back({sid, pid, oid});
}

TripleStore TripleStoreBuilder::build() && {
  return TripleStore(std::move(nodes_), std::move(predicates_),
                     std::move(triples_));
}

TripleStore load_ntriples(std::istream& in) {
  TripleStoreBuilder builder;
  std::string line;
  std::vector<std::string_view> terms;
  std::string error;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!tokenize(line, terms, error)) throw ParseError(error, line_no);
    if (terms.empty()) continue;
    if (terms.size() == 4 && terms[3] == ".") terms.pop_back();
    if (terms.size() != 3) {
      throw ParseError("expected 3 terms, found " + std::to_string(terms.size()),
                       line_no);
    }
    for (auto term : terms) {
      if (term == ".") throw ParseError("misplaced '.'", line_no);
    }
    builder.add(terms[0], terms[1], terms[2]);
  }
  return std::move(builder).build();
}

TripleStore load_ntriples(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_ntriples(in);
}

void save_snapshot(const TripleStore& store, std::ostream& out) {
  out << kSnapshotMagic << " 1\n";
  out << "N " << store.nodes().size() << '\n';
  for (const auto& term : store.nodes().terms()) out << term << '\n';
  out << "P " << store.predicates().size() << '\n';
  for (const auto& term : store.predicates().terms()) out << term << '\n';
  out << "T " << store.size() << '\n';
  for (const Triple& t : store.index(IndexOrder::kSpo)) {
    out << t.s << ' ' << t.p << ' ' << t.o << '\n';
  }
}

namespace {

std::uint64_t parse_count(std::string_view text, std::size_t line_no) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("expected unsigned integer, got '" + std::string(text) + "'",
                     line_no);
  }
  return value;
}

}  // namespace

TripleStore load_snapshot(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      throw ParseError("unexpected end of snapshot", line_no + 1);
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto section = [&](char tag) {
    const std::string& header = next();
    if (header.size() < 3 || header[0] != tag || header[1] != ' ') {
      throw ParseError(std::string("expected section '") + tag + "'", line_no);
    }
    return parse_count(std::string_view(header).substr(2), line_no);
  };

  if (next() != std::string(kSnapshotMagic) + " 1") {
    throw ParseError("not a snapshot (bad header)", line_no);
  }
  Dictionary nodes;
  Dictionary predicates;
  for (auto* dict : {&nodes, &predicates}) {
    const std::uint64_t count = section(dict == &nodes ? 'N' : 'P');
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::string& term = next();
      if (term.empty()) throw ParseError("empty term", line_no);
      if (dict->encode(term) != i) throw ParseError("duplicate term", line_no);
    }
  }
  const std::uint64_t count = section('T');
  std::vector<Triple> triples;
  triples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::istringstream fields(next());
    std::string s, p, o, extra;
    if (!(fields >> s >> p >> o) || (fields >> extra)) {
      throw ParseError("expected 's p o' ids", line_no);
    }
    Triple t{static_cast<NodeId>(parse_count(s, line_no)),
             static_cast<PredId>(parse_count(p, line_no)),
             static_cast<NodeId>(parse_count(o, line_no))};
    if (t.s >= nodes.size() || t.o >= nodes.size() || t.p >= predicates.size()) {
      throw ParseError("id out of range", line_no);
    }
    triples.push_back(t);
  }
  return TripleStore(std::move(nodes), std::move(predicates), std::move(triples));
}

TripleStore load_store_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(0);
  if (first.rfind(kSnapshotMagic, 0) == 0) return load_snapshot(in);
  return load_ntriples(in);
}

}  // namespace agraph
