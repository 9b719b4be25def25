#include "agraph/catalog.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <vector>

#include "agraph/error.h"

namespace agraph {

JoinType join_type(Role first, Role second) {
  if (first == Role::kSubject) {
    return second == Role::kSubject ? JoinType::kSS : JoinType::kSO;
  }
  return second == Role::kSubject ? JoinType::kOS : JoinType::kOO;
}

std::string_view to_string(JoinType jt) {
  switch (jt) {
    case JoinType::kSS:
      return "ss";
    case JoinType::kSO:
      return "so";
    case JoinType::kOS:
      return "os";
    case JoinType::kOO:
      return "oo";
  }
  return "??";
}

std::optional<JoinType> parse_join_type(std::string_view text) {
  if (text == "ss") return JoinType::kSS;
  if (text == "so") return JoinType::kSO;
  if (text == "os") return JoinType::kOS;
  if (text == "oo") return JoinType::kOO;
  return std::nullopt;
}

JoinType mirror(JoinType jt) {
  switch (jt) {
    case JoinType::kSO:
      return JoinType::kOS;
    case JoinType::kOS:
      return JoinType::kSO;
    default:
      return jt;
  }
}

const OneGram* Catalog::one_gram(std::string_view label) const {
  auto it = one_grams_.find(label);
  return it == one_grams_.end() ? nullptr : &it->second;
}

const TwoGram* Catalog::two_gram(std::string_view first,
                                 std::string_view second, JoinType jt) const {
  auto it = two_grams_.find({std::string(first), std::string(second), jt});
  return it == two_grams_.end() ? nullptr : &it->second;
}

std::uint64_t Catalog::key_count(std::string_view first,
                                 std::string_view second, JoinType jt) const {
  const TwoGram* gram = two_gram(first, second, jt);
  return gram ? gram->keys : 0;
}

void Catalog::add(OneGram gram) {
  total_triples_ += gram.count;
  auto label = gram.label;
  one_grams_.insert_or_assign(std::move(label), std::move(gram));
}

void Catalog::add(TwoGram gram) {
  TwoGramKey key{gram.first, gram.second, gram.join};
  two_grams_.insert_or_assign(std::move(key), std::move(gram));
}

Catalog build_catalog(const TripleStore& store) {
  Catalog catalog;
  const auto& preds = store.predicates();

  // PSO groups by predicate then subject; POS by predicate then object.
  std::vector<OneGram> ones(preds.size());
  for (PredId p = 0; p < preds.size(); ++p) ones[p].label = preds.decode(p);
  {
    const auto pso = store.index(IndexOrder::kPso);
    for (std::size_t i = 0; i < pso.size(); ++i) {
      OneGram& g = ones[pso[i].p];
      ++g.count;
      if (i == 0 || pso[i - 1].p != pso[i].p || pso[i - 1].s != pso[i].s) {
        ++g.distinct_subjects;
      }
    }
    const auto pos = store.index(IndexOrder::kPos);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (i == 0 || pos[i - 1].p != pos[i].p || pos[i - 1].o != pos[i].o) {
        ++ones[pos[i].p].distinct_objects;
      }
    }
  }
  for (auto& g : ones) {
    if (g.count > 0) catalog.add(std::move(g));
  }

  // Per node, the (predicate, multiplicity) lists in subject and object role.
  using Incidence = std::vector<std::pair<PredId, std::uint64_t>>;
  std::vector<Incidence> as_subject(store.nodes().size());
  std::vector<Incidence> as_object(store.nodes().size());
  auto collect = [](std::span<const Triple> index, auto node_of,
                    std::vector<Incidence>& out) {
    for (const Triple& t : index) {
      auto& list = out[node_of(t)];
      if (!list.empty() && list.back().first == t.p) {
        ++list.back().second;
      } else {
        list.emplace_back(t.p, 1);
      }
    }
  };
  collect(store.index(IndexOrder::kSpo), [](const Triple& t) { return t.s; },
          as_subject);
  collect(store.index(IndexOrder::kOps), [](const Triple& t) { return t.o; },
          as_object);

  struct Acc {
    std::uint64_t pairs = 0;
    std::uint64_t keys = 0;
  };
  std::map<std::tuple<PredId, PredId, JoinType>, Acc> acc;
  auto accumulate = [&](const Incidence& first, const Incidence& second,
                        JoinType jt) {
    for (const auto& [p1, c1] : first) {
      for (const auto& [p2, c2] : second) {
        Acc& a = acc[{p1, p2, jt}];
        a.pairs += c1 * c2;
        a.keys += 1;
      }
    }
  };
  for (std::size_t n = 0; n < store.nodes().size(); ++n) {
    accumulate(as_subject[n], as_subject[n], JoinType::kSS);
    accumulate(as_subject[n], as_object[n], JoinType::kSO);
    accumulate(as_object[n], as_subject[n], JoinType::kOS);
    accumulate(as_object[n], as_object[n], JoinType::kOO);
  }
  for (const auto& [key, a] : acc) {
    const auto& [p1, p2, jt] = key;
    catalog.add(TwoGram{preds.decode(p1), preds.decode(p2), jt, a.pairs, a.keys});
  }
  return catalog;
}

double estimate_pattern_cardinality(const Catalog& catalog,
                                    std::string_view label, BoundSide side,
                                    double bound_set_size) {
  const OneGram* g = catalog.one_gram(label);
  if (g == nullptr || g->count == 0) return 0.0;
  const double count = static_cast<double>(g->count);
  const double ds = static_cast<double>(std::max<std::uint64_t>(g->distinct_subjects, 1));
  const double dobj = static_cast<double>(std::max<std::uint64_t>(g->distinct_objects, 1));
  const double bound = std::max(bound_set_size, 0.0);
  switch (side) {
    case BoundSide::kNone:
      return count;
    case BoundSide::kSubject:
      return bound * count / ds;
    case BoundSide::kObject:
      return bound * count / dobj;
    case BoundSide::kBoth:
      return bound * count / (ds * dobj);
  }
  return 0.0;
}

namespace {

constexpr std::string_view kCatalogMagic = "#agraph-catalog";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::uint64_t parse_count(std::string_view text, std::size_t line_no) {
  std::uint64_t value = 0;
  if (!text.empty() && text.front() == '-') {
    throw ParseError("negative count '" + std::string(text) + "'", line_no);
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("expected unsigned integer, got '" + std::string(text) + "'",
                     line_no);
  }
  return value;
}

}  // namespace

void save_catalog(const Catalog& catalog, std::ostream& out) {
  out << kCatalogMagic << "\t1\n";
  out << "#total\t" << catalog.total_triples() << '\n';
  for (const auto& [label, g] : catalog.one_grams()) {
    out << "1G\t" << label << '\t' << g.count << '\t' << g.distinct_subjects
        << '\t' << g.distinct_objects << '\n';
  }
  for (const auto& [key, g] : catalog.two_grams()) {
    out << "2G\t" << g.first << '\t' << g.second << '\t' << to_string(g.join)
        << '\t' << g.pairs << '\t' << g.keys << '\n';
  }
}

Catalog load_catalog(std::istream& in) {
  Catalog catalog;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::uint64_t> declared_total;
  bool saw_magic = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    const std::string_view tag = fields[0];
    if (tag == kCatalogMagic) {
      if (fields.size() != 2 || fields[1] != "1") {
        throw ParseError("unsupported catalog version", line_no);
      }
      saw_magic = true;
    } else if (tag == "#total") {
      if (fields.size() != 2) throw ParseError("bad #total line", line_no);
      declared_total = parse_count(fields[1], line_no);
    } else if (tag == "1G") {
      if (fields.size() != 5) throw ParseError("1G line needs 5 fields", line_no);
      OneGram g{std::string(fields[1]), parse_count(fields[2], line_no),
                parse_count(fields[3], line_no), parse_count(fields[4], line_no)};
      if (g.label.empty()) throw ParseError("empty predicate", line_no);
      if (g.count == 0 || g.distinct_subjects < 1 || g.distinct_objects < 1 ||
          g.distinct_subjects > g.count || g.distinct_objects > g.count) {
        throw ParseError("inconsistent 1-gram counts", line_no);
      }
      if (catalog.one_gram(g.label)) throw ParseError("duplicate 1-gram", line_no);
      catalog.add(std::move(g));
    } else if (tag == "2G") {
      if (fields.size() != 6) throw ParseError("2G line needs 6 fields", line_no);
      auto jt = parse_join_type(fields[3]);
      if (!jt) throw ParseError("bad join type '" + std::string(fields[3]) + "'", line_no);
      TwoGram g{std::string(fields[1]), std::string(fields[2]), *jt,
                parse_count(fields[4], line_no), parse_count(fields[5], line_no)};
      if (!catalog.one_gram(g.first) || !catalog.one_gram(g.second)) {
        throw ParseError("2-gram references unknown predicate", line_no);
      }
      if (g.pairs == 0 || g.keys == 0 || g.keys > g.pairs) {
        throw ParseError("inconsistent 2-gram counts", line_no);
      }
      if (catalog.two_gram(g.first, g.second, g.join)) {
        throw ParseError("duplicate 2-gram", line_no);
      }
      catalog.add(std::move(g));
    } else if (tag.starts_with("#")) {
      continue;
    } else {
      throw ParseError("unknown record '" + std::string(tag) + "'", line_no);
    }
  }
  if (line_no > 0 && !saw_magic) throw ParseError("missing catalog header", 1);
  if (declared_total && *declared_total != catalog.total_triples()) {
    throw ParseError("#total does not match the 1-gram counts", 0);
  }
  return catalog;
}

Catalog load_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load_catalog(in);
}

}  // namespace agraph
