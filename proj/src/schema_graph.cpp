#include "pathsql/schema_graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pathsql/error.hpp"

namespace pathsql {

namespace {

bool edge_less(const GraphEdge& x, const GraphEdge& y) {
  if (x.a != y.a) return x.a < y.a;
  if (x.b != y.b) return x.b < y.b;
  return x.fk.column_order_less(y.fk);
}

}  // namespace

SchemaGraph::SchemaGraph(std::vector<std::string> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  for (auto& e : edges_) {
    if (e.b < e.a) std::swap(e.a, e.b);
    if (!has_node(e.a) || !has_node(e.b)) throw Error("edge endpoint '" + e.a + "'/'" + e.b + "' is not a node");
  }
  std::sort(edges_.begin(), edges_.end(), edge_less);
}

bool SchemaGraph::has_node(const std::string& t) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), t);
}

std::optional<std::size_t> SchemaGraph::index_of(const std::string& t) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
  if (it == nodes_.end() || *it != t) return std::nullopt;
  return static_cast<std::size_t>(it - nodes_.begin());
}

const FkConstraint* SchemaGraph::edge_between(const std::string& a, const std::string& b) const {
  const FkConstraint* best = nullptr;
  for (const auto& e : edges_) {
    if (!e.fk.connects(a, b)) continue;
    if (!best || e.fk.column_order_less(*best)) best = &e.fk;
  }
  return best;
}

std::vector<std::string> SchemaGraph::neighbors(const std::string& t) const {
  std::set<std::string> out;
  for (const auto& e : edges_) {
    if (e.a == t) out.insert(e.b);
    if (e.b == t) out.insert(e.a);
  }
  return {out.begin(), out.end()};
}

std::size_t SchemaGraph::degree(const std::string& t) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [&](const GraphEdge& e) { return e.a == t || e.b == t; }));
}

std::string SchemaGraph::to_dot(const std::vector<std::string>& highlight) const {
  std::ostringstream os;
  os << "graph schema {\n";
  for (const auto& n : nodes_) {
    os << "  \"" << n << "\"";
    if (std::find(highlight.begin(), highlight.end(), n) != highlight.end()) os << " [style=bold]";
    os << ";\n";
  }
  for (const auto& e : edges_) {
    os << "  \"" << e.a << "\" -- \"" << e.b << "\" [label=\"" << e.fk.from_table << "(";
    for (std::size_t i = 0; i < e.fk.fk_columns.size(); ++i) os << (i ? "," : "") << e.fk.fk_columns[i];
    os << ") " << to_string(e.fk.kind) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

SchemaGraph build_graph(const DatabaseModel& model) {
  const auto diags = validate_model(model);
  if (!diags.empty()) {
    throw DbmError("invalid model: " + diags.front().entity + ": " + diags.front().rule + " (" +
                   std::to_string(diags.size()) + " diagnostics)");
  }
  std::vector<GraphEdge> edges;
  for (const auto& c : model.constraints) edges.push_back({c.from_table, c.to_table, c});
  return SchemaGraph(model.table_names(), std::move(edges));
}

SchemaGraph core_subgraph(const SchemaGraph& g, const DatabaseModel& model) {
  std::vector<std::string> nodes;
  for (const auto& n : g.nodes())
    if (!model.has_table(n) || is_core(model, n)) nodes.push_back(n);
  std::set<std::string> keep(nodes.begin(), nodes.end());
  std::vector<GraphEdge> edges;
  for (const auto& e : g.edges())
    if (keep.count(e.a) && keep.count(e.b)) edges.push_back(e);
  return SchemaGraph(std::move(nodes), std::move(edges));
}

const TreePattern& pattern_tree(const DatabaseModel& model, const std::string& root) {
  const auto* p = model.pattern_rooted_at(root);
  if (!p) throw Error("'" + root + "' is not the root of a pattern");
  return *p;
}

}  // namespace pathsql
