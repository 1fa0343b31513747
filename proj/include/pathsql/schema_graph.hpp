#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathsql/model.hpp"

namespace pathsql {

// One edge per foreign key. `a`/`b` are the endpoints in name order; the
// constraint keeps the FK direction for join emission.
struct GraphEdge {
  std::string a;
  std::string b;
  FkConstraint fk;

  bool operator==(const GraphEdge&) const = default;
};

// Undirected multigraph over tables. Nodes are kept sorted by name and edges
// in a canonical order, so construction is independent of input order.
class SchemaGraph {
 public:
  SchemaGraph() = default;
  SchemaGraph(std::vector<std::string> nodes, std::vector<GraphEdge> edges);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  bool has_node(const std::string& t) const;
  std::optional<std::size_t> index_of(const std::string& t) const;
  bool adjacent(const std::string& a, const std::string& b) const { return edge_between(a, b) != nullptr; }
  // The edge used when a walk steps between a and b: among parallel edges the
  // constraint that sorts first by (fk columns, pk columns, from, to).
  const FkConstraint* edge_between(const std::string& a, const std::string& b) const;
  std::vector<std::string> neighbors(const std::string& t) const;
  std::size_t degree(const std::string& t) const;  // parallel edges counted

  // Graphviz text.
  std::string to_dot(const std::vector<std::string>& highlight = {}) const;

  bool operator==(const SchemaGraph&) const = default;

 private:
  std::vector<std::string> nodes_;
  std::vector<GraphEdge> edges_;
};

// Throws DbmError when validate_model reports anything.
SchemaGraph build_graph(const DatabaseModel& model);

SchemaGraph core_subgraph(const SchemaGraph& g, const DatabaseModel& model);

// Throws Error if `root` is not a pattern root.
const TreePattern& pattern_tree(const DatabaseModel& model, const std::string& root);

}  // namespace pathsql
