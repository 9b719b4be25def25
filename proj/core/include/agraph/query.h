#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agraph/error.h"

namespace agraph {

// A query graph node: either a `?variable` or a constant data term.
struct QueryNode {
  std::string name;
  bool is_variable = true;

  friend bool operator==(const QueryNode&, const QueryNode&) = default;
};

// Endpoints are indices into ConjunctiveQuery::nodes(); `idx` is the parse
// position.
struct QueryEdge {
  std::size_t src = 0;
  std::string label;
  std::size_t dst = 0;
  std::size_t idx = 0;

  bool is_self_loop() const { return src == dst; }
  bool touches(std::size_t node) const { return src == node || dst == node; }
  std::size_t other(std::size_t node) const { return node == src ? dst : src; }

  friend bool operator==(const QueryEdge&, const QueryEdge&) = default;
};

enum class QueryErrorKind {
  kEmpty,
  kSyntax,
  kFullyConstant,
  kDuplicateEdge,
  kDisconnected,
};

class QueryError : public ParseError {
 public:
  QueryError(QueryErrorKind kind, const std::string& message, std::size_t line)
      : ParseError(message, line), kind_(kind) {}
  QueryErrorKind kind() const noexcept { return kind_; }

 private:
  QueryErrorKind kind_;
};

// Term-level edge description used to build queries programmatically.
struct EdgeSpec {
  std::string src;
  std::string label;
  std::string dst;
};

// A conjunctive query: labelled edges over variables and constants. Nodes are
// numbered in first-appearance order. The variable graph (variables as nodes,
// variable-variable edges ignoring direction) is connected; constants act as
// unary restrictions.
class ConjunctiveQuery {
 public:
  // One edge per line, `?x label ?y`, optional trailing `.`, `#` comments.
  static ConjunctiveQuery parse(std::string_view text);
  static ConjunctiveQuery from_edges(const std::vector<EdgeSpec>& edges);

  const std::vector<QueryEdge>& edges() const { return edges_; }
  const std::vector<QueryNode>& nodes() const { return nodes_; }
  const QueryEdge& edge(std::size_t i) const { return edges_.at(i); }
  const QueryNode& node(std::size_t i) const { return nodes_.at(i); }

  // Node indices of the variables, first-appearance order. Embeddings are
  // tuples in this order.
  const std::vector<std::size_t>& variables() const { return variables_; }
  std::optional<std::size_t> find_node(std::string_view name) const;

  // Both edges share a variable endpoint.
  bool adjacent(std::size_t e1, std::size_t e2) const;

  std::string edge_text(std::size_t e) const;
  // Inverse of parse(): one edge per line.
  std::string to_string() const;

  friend bool operator==(const ConjunctiveQuery&,
                         const ConjunctiveQuery&) = default;

 private:
  std::vector<QueryNode> nodes_;
  std::vector<QueryEdge> edges_;
  std::vector<std::size_t> variables_;
};

// Undirected structure of the variable graph. Constant endpoints and self
// loops are unary and ignored. `acyclic` holds when the simple variable graph
// (parallel edges merged) is a tree; parallel edge groups are listed
// separately since the engine intersects them directly.
struct QueryShape {
  bool acyclic = true;
  // A cycle basis of the simple variable graph; each cycle lists node indices
  // in traversal order, length >= 3.
  std::vector<std::vector<std::size_t>> cycles;
  // Variable pairs (lower index first) joined by more than one edge.
  std::vector<std::pair<std::size_t, std::size_t>> parallel_pairs;
};

QueryShape analyze_shape(const ConjunctiveQuery& query);

// A query topology with label placeholders L1..Lk.
struct Template {
  struct Edge {
    std::string src;
    std::size_t placeholder = 0;  // 0-based: L1 is 0
    std::string dst;
  };
  std::string name;
  std::vector<Edge> edges;
  std::size_t placeholders = 0;
};

// 9-edge snowflake tree: hub ?p, secondary hubs ?m1, ?m2, ?m3.
const Template& snowflake9();
// 4-edge diamond: ?a L1 ?b, ?b L2 ?d, ?a L3 ?c, ?c L4 ?d.
const Template& diamond4();
// Built-in template by name (`snowflake9`, `diamond4`), nullptr otherwise.
const Template* find_template(std::string_view name);

// Throws std::invalid_argument when labels.size() != placeholders.
ConjunctiveQuery instantiate(const Template& tmpl,
                             const std::vector<std::string>& labels);

}  // namespace agraph
