#include "agraph/query.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace agraph {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

std::vector<std::string> split_terms(std::string_view line, std::size_t line_no) {
  std::vector<std::string> terms;
  std::size_t i = 0;
  while (i < line.size()) {
    if (is_space(line[i])) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    if (line[i] == '<') {
      auto close = line.find('>', i + 1);
      if (close == std::string_view::npos || close == i + 1) {
        throw QueryError(QueryErrorKind::kSyntax, "bad '<...>' term", line_no);
      }
      terms.emplace_back(line.substr(i + 1, close - i - 1));
      i = close + 1;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    terms.emplace_back(line.substr(start, i - start));
  }
  if (!terms.empty() && terms.back() == ".") terms.pop_back();
  return terms;
}

bool is_variable_name(std::string_view term) {
  return term.size() > 1 && term.front() == '?';
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

}  // namespace

ConjunctiveQuery ConjunctiveQuery::from_edges(const std::vector<EdgeSpec>& specs) {
  ConjunctiveQuery q;
  if (specs.empty()) {
    throw QueryError(QueryErrorKind::kEmpty, "query has no edges", 0);
  }
  auto node_index = [&q](const std::string& term) {
    for (std::size_t i = 0; i < q.nodes_.size(); ++i) {
      if (q.nodes_[i].name == term) return i;
    }
    const bool var = is_variable_name(term);
    q.nodes_.push_back({term, var});
    if (var) q.variables_.push_back(q.nodes_.size() - 1);
    return q.nodes_.size() - 1;
  };

  std::set<std::tuple<std::size_t, std::string, std::size_t>> seen;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const EdgeSpec& spec = specs[i];
    if (spec.src.empty() || spec.label.empty() || spec.dst.empty() ||
        spec.src == "?" || spec.dst == "?") {
      throw QueryError(QueryErrorKind::kSyntax, "empty term in edge", i + 1);
    }
    if (!is_variable_name(spec.src) && !is_variable_name(spec.dst)) {
      throw QueryError(QueryErrorKind::kFullyConstant,
                       "edge has no variable endpoint", i + 1);
    }
    QueryEdge edge{node_index(spec.src), spec.label, node_index(spec.dst), i};
    if (!seen.emplace(edge.src, edge.label, edge.dst).second) {
      throw QueryError(QueryErrorKind::kDuplicateEdge,
                       "duplicate edge '" + spec.src + " " + spec.label + " " +
                           spec.dst + "'",
                       i + 1);
    }
    q.edges_.push_back(std::move(edge));
  }

  UnionFind uf(q.nodes_.size());
  for (const QueryEdge& e : q.edges_) {
    if (q.nodes_[e.src].is_variable && q.nodes_[e.dst].is_variable) {
      uf.unite(e.src, e.dst);
    }
  }
  const std::size_t root = uf.find(q.variables_.front());
  for (std::size_t v : q.variables_) {
    if (uf.find(v) != root) {
      throw QueryError(QueryErrorKind::kDisconnected,
                       "query graph is disconnected (" + q.nodes_[v].name +
                           " is not connected to " +
                           q.nodes_[q.variables_.front()].name + ")",
                       0);
    }
  }
  return q;
}

ConjunctiveQuery ConjunctiveQuery::parse(std::string_view text) {
  std::vector<EdgeSpec> specs;
  std::vector<std::size_t> lines;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto terms = split_terms(text.substr(start, end - start), line_no);
    start = end + 1;
    if (terms.empty()) continue;
    if (terms.size() != 3) {
      throw QueryError(QueryErrorKind::kSyntax,
                       "expected '?src label ?dst', found " +
                           std::to_string(terms.size()) + " terms",
                       line_no);
    }
    specs.push_back({terms[0], terms[1], terms[2]});
    lines.push_back(line_no);
  }
  try {
    return from_edges(specs);
  } catch (const QueryError& err) {
    // from_edges reports edge positions; map them back to source lines.
    if (err.line() == 0 || err.line() > lines.size()) throw;
    std::string message = err.what();
    message = message.substr(message.find(": ") + 2);
    throw QueryError(err.kind(), message, lines[err.line() - 1]);
  }
}

std::optional<std::size_t> ConjunctiveQuery::find_node(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  return std::nullopt;
}

bool ConjunctiveQuery::adjacent(std::size_t e1, std::size_t e2) const {
  const QueryEdge& a = edges_.at(e1);
  const QueryEdge& b = edges_.at(e2);
  for (std::size_t n : {a.src, a.dst}) {
    if (nodes_[n].is_variable && b.touches(n)) return true;
  }
  return false;
}

std::string ConjunctiveQuery::edge_text(std::size_t e) const {
  const QueryEdge& edge = edges_.at(e);
  return nodes_[edge.src].name + " " + edge.label + " " + nodes_[edge.dst].name;
}

std::string ConjunctiveQuery::to_string() const {
  std::string out;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    out += edge_text(e);
    out += '\n';
  }
  return out;
}

QueryShape analyze_shape(const ConjunctiveQuery& query) {
  QueryShape shape;
  const auto& nodes = query.nodes();

  // Simple undirected variable graph, neighbours in edge order.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> multiplicity;
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (const QueryEdge& e : query.edges()) {
    if (e.is_self_loop() || !nodes[e.src].is_variable || !nodes[e.dst].is_variable) {
      continue;
    }
    auto key = std::minmax(e.src, e.dst);
    if (multiplicity[key]++ == 0) {
      adj[e.src].push_back(e.dst);
      adj[e.dst].push_back(e.src);
    }
  }
  for (const auto& [key, count] : multiplicity) {
    if (count > 1) shape.parallel_pairs.push_back(key);
  }

  // BFS spanning tree from the first variable; each non-tree edge closes one
  // fundamental cycle.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(nodes.size(), kNone);
  std::vector<std::size_t> depth(nodes.size(), 0);
  std::vector<bool> visited(nodes.size(), false);
  std::set<std::pair<std::size_t, std::size_t>> tree_edges;
  std::vector<std::size_t> bfs_order;
  const std::size_t root = query.variables().front();
  std::queue<std::size_t> frontier;
  frontier.push(root);
  visited[root] = true;
  while (!frontier.empty()) {
    const std::size_t x = frontier.front();
    frontier.pop();
    bfs_order.push_back(x);
    for (std::size_t y : adj[x]) {
      if (visited[y]) continue;
      visited[y] = true;
      parent[y] = x;
      depth[y] = depth[x] + 1;
      tree_edges.insert(std::minmax(x, y));
      frontier.push(y);
    }
  }

  std::set<std::pair<std::size_t, std::size_t>> closed;
  for (std::size_t x : bfs_order) {
    for (std::size_t y : adj[x]) {
      auto key = std::minmax(x, y);
      if (tree_edges.count(key) || !closed.insert(key).second) continue;
      // Walk both endpoints up to their lowest common ancestor.
      std::vector<std::size_t> from_x{x};
      std::vector<std::size_t> from_y{y};
      std::size_t a = x;
      std::size_t b = y;
      while (depth[a] > depth[b]) from_x.push_back(a = parent[a]);
      while (depth[b] > depth[a]) from_y.push_back(b = parent[b]);
      while (a != b) {
        from_x.push_back(a = parent[a]);
        from_y.push_back(b = parent[b]);
      }
      // Cycle: lca, ..., y-side down to y, then x up towards lca.
      std::vector<std::size_t> cycle(from_y.rbegin(), from_y.rend());
      cycle.insert(cycle.end(), from_x.begin(), from_x.end() - 1);
      shape.cycles.push_back(std::move(cycle));
    }
  }
  shape.acyclic = shape.cycles.empty();
  return shape;
}

const Template& snowflake9() {
  static const Template kSnowflake{
      "snowflake9",
      {
          {"?p", 0, "?a"},
          {"?q", 1, "?p"},
          {"?p", 2, "?m1"},
          {"?p", 3, "?b"},
          {"?m1", 4, "?c"},
          {"?q", 5, "?m2"},
          {"?q", 6, "?m3"},
          {"?m3", 7, "?d"},
          {"?m3", 8, "?e"},
      },
      9};
  return kSnowflake;
}

const Template& diamond4() {
  static const Template kDiamond{"diamond4",
                                 {
                                     {"?a", 0, "?b"},
                                     {"?b", 1, "?d"},
                                     {"?a", 2, "?c"},
                                     {"?c", 3, "?d"},
                                 },
                                 4};
  return kDiamond;
}

const Template* find_template(std::string_view name) {
  if (name == "snowflake9") return &snowflake9();
  if (name == "diamond4") return &diamond4();
  return nullptr;
}

ConjunctiveQuery instantiate(const Template& tmpl,
                             const std::vector<std::string>& labels) {
  if (labels.size() != tmpl.placeholders) {
    throw std::invalid_argument("template '" + tmpl.name + "' takes " +
                                std::to_string(tmpl.placeholders) +
                                " labels, got " + std::to_string(labels.size()));
  }
  std::vector<EdgeSpec> specs;
  specs.reserve(tmpl.edges.size());
  for (const auto& e : tmpl.edges) {
    specs.push_back({e.src, labels[e.placeholder], e.dst});
  }
  return ConjunctiveQuery::from_edges(specs);
}

}  // namespace agraph
