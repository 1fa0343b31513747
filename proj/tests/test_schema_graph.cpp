#include <doctest.h>

#include <algorithm>
#include <random>

#include "pathsql/schema_graph.hpp"
#include "support.hpp"

using namespace pathsql;

namespace {

bool has_edge(const SchemaGraph& g, const GraphEdge& e) {
  return std::find(g.edges().begin(), g.edges().end(), e) != g.edges().end();
}

}  // namespace

TEST_CASE("cdd graph") {
  const auto& m = testing::cdd().model;
  const auto g = build_graph(m);
  CHECK(g.nodes().size() == m.tables.size());
  CHECK(g.edges().size() == m.constraints.size());
  CHECK(g.degree("location") == 2);
  CHECK(g.neighbors("location") == std::vector<std::string>{"client", "datacenter"});
  for (const auto& e : g.edges()) {
    CHECK(g.has_node(e.a));
    CHECK(g.has_node(e.b));
    CHECK(e.a <= e.b);
  }
}

TEST_CASE("core subgraph") {
  const auto& m = testing::cdd().model;
  const auto g = build_graph(m);
  const auto core = core_subgraph(g, m);
  CHECK(core.nodes() == std::vector<std::string>{"client", "compute_resource", "datacenter", "location", "payment",
                                                 "res_to_client", "resource_pool", "retention_strategy"});
  for (const auto& e : core.edges()) CHECK(has_edge(g, e));
  CHECK(core_subgraph(core, m) == core);
  // edges between two core tables all survive
  const auto n_core_edges = std::count_if(g.edges().begin(), g.edges().end(), [&](const GraphEdge& e) {
    return core.has_node(e.a) && core.has_node(e.b);
  });
  CHECK(core.edges().size() == static_cast<std::size_t>(n_core_edges));
}

TEST_CASE("model without patterns") {
  auto m = testing::cdd().model;
  m.patterns.clear();
  const auto g = build_graph(m);
  CHECK(core_subgraph(g, m) == g);
}

TEST_CASE("model without constraints") {
  auto m = testing::financial();
  m.constraints.clear();
  m.m2m.clear();
  const auto g = build_graph(m);
  CHECK(g.edges().empty());
  CHECK(g.nodes().size() == 8);
}

TEST_CASE("invalid model is rejected") {
  auto m = testing::financial();
  m.constraints.push_back({"Loan", {"account_id"}, "Ghost", {"id"}, FkKind::many_to_one});
  CHECK_THROWS_AS(build_graph(m), DbmError);
}

TEST_CASE("pattern trees") {
  const auto& m = testing::cdd().model;
  const auto& rp = pattern_tree(m, "resource_pool");
  CHECK(rp.kind == PatternKind::snowflake);
  CHECK(rp.children_of("resource_pool") == std::vector<std::string>{"config", "runtime"});
  CHECK(rp.children_of("config") == std::vector<std::string>{"configcpu", "configmemory"});
  CHECK(rp.is_leaf("configcpu"));
  CHECK(!rp.is_leaf("config"));
  CHECK(pattern_tree(m, "payment").children_of("payment_amount") ==
        std::vector<std::string>{"tax", "supercharge", "income"});
  CHECK_THROWS(pattern_tree(m, "config"));

  TreePattern lone{PatternKind::star, "x", {}};
  CHECK(lone.is_leaf("x"));
  CHECK(lone.preorder() == std::vector<std::string>{"x"});
}

TEST_CASE("tree edges are graph edges") {
  const auto& m = testing::cdd().model;
  const auto g = build_graph(m);
  for (const auto& p : m.patterns)
    for (const auto& [parent, kids] : p.children)
      for (const auto& kid : kids) CHECK_MESSAGE(g.adjacent(parent, kid), parent << " - " << kid);
}

TEST_CASE("construction ignores input order") {
  const auto& m = testing::cdd().model;
  const auto g = build_graph(m);
  std::mt19937 rng(11);
  for (int i = 0; i < 20; ++i) {
    auto shuffled = m;
    std::shuffle(shuffled.tables.begin(), shuffled.tables.end(), rng);
    std::shuffle(shuffled.constraints.begin(), shuffled.constraints.end(), rng);
    std::shuffle(shuffled.patterns.begin(), shuffled.patterns.end(), rng);
    CHECK(build_graph(shuffled) == g);
    CHECK(core_subgraph(build_graph(shuffled), shuffled) == core_subgraph(g, m));
  }
}

TEST_CASE("parallel edges pick the smallest constraint") {
  DatabaseModel m;
  m.tables = {{"a", {{"id", "int", "", ""}, {"x", "int", "", ""}, {"y", "int", "", ""}}, {"id"}, ""},
              {"b", {{"id", "int", "", ""}}, {"id"}, ""}};
  m.constraints = {{"a", {"y"}, "b", {"id"}, FkKind::many_to_one}, {"a", {"x"}, "b", {"id"}, FkKind::many_to_one}};
  const auto g = build_graph(m);
  CHECK(g.edges().size() == 2);
  CHECK(g.degree("a") == 2);
  CHECK(g.neighbors("a") == std::vector<std::string>{"b"});
  REQUIRE(g.edge_between("b", "a"));
  CHECK(g.edge_between("b", "a")->fk_columns == std::vector<std::string>{"x"});
}

TEST_CASE("dot output") {
  const auto g = build_graph(testing::cdd().model);
  const auto dot = g.to_dot({"client"});
  CHECK(dot.rfind("graph", 0) == 0);
  CHECK(dot.find("\"client\"") != std::string::npos);
  CHECK(dot.find("--") != std::string::npos);
}
