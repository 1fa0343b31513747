#include <doctest.h>

#include <random>
#include <set>

#include "pathsql/executor.hpp"
#include "pathsql/view.hpp"
#include "support.hpp"

using namespace pathsql;
using Strings = std::vector<std::string>;

namespace {

RelevanceSet relta(std::initializer_list<std::pair<std::string, Strings>> entries) {
  RelevanceSet r;
  for (const auto& [t, a] : entries) r.add(t, a);
  return r;
}

RelevanceSet q1() { return relta({{"client", {"name", "gender"}}, {"datacenter", {"name"}}}); }
RelevanceSet q2() {
  return relta({{"resource_pool", {"name"}}, {"configcpu", {"overheadLimit"}}, {"runtimecpu", {"overallUsage"}}});
}
RelevanceSet q3() {
  return relta({{"payment", {}}, {"payment_amount", {"amount"}}, {"tax", {"pama_id"}}, {"supercharge", {"pama_id"}}});
}

ViewSql build(const RelevanceSet& r, const ViewOptions& o = {}, Dialect d = Dialect::ansi) {
  const auto& m = testing::cdd().model;
  return emit_view_sql(plan_view(decompose_solve(r, m), r, m, o), "v", d);
}

std::string golden(int q) {
  auto s = testing::slurp(testing::cdd_dir() / "golden" / ("q" + std::to_string(q)) / "view.sql");
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string strip(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string select_part(const std::string& view_sql) { return view_sql.substr(view_sql.find("select")); }

}  // namespace

TEST_SUITE("aliases") {
  TEST_CASE("naming") {
    CHECK(make_alias("client", 1, "name") == "client_name");
    CHECK(make_alias("pama", 2, "amount") == "pama_amount_2");
    CHECK(make_alias("Client", 1, "Name") == "client_name");
    CHECK(TableRef{"payment_amount", 1}.sql_name() == "payment_amount");
    CHECK(TableRef{"payment_amount", 3}.sql_name() == "payment_amount_3");
  }

  TEST_CASE("truncation") {
    const std::string t(50, 't');
    const auto a = make_alias(t, 1, "first_long_attribute_name");
    const auto b = make_alias(t, 1, "second_long_attribute_name");
    CHECK(a.size() == 64);
    CHECK(b.size() == 64);
    CHECK(a != b);
    CHECK(make_alias(t, 1, "x", 20).size() == 20);
    CHECK(make_alias(t, 1, "x", 20) == make_alias(t, 1, "x", 20));
  }

  TEST_CASE("aliases stay distinct under tight limits") {
    const auto& m = testing::cdd().model;
    std::mt19937 rng(4);
    for (int i = 0; i < 200; ++i) {
      RelevanceSet r;
      for (const auto& t : m.tables)
        if (rng() % 4 == 0) {
          Strings attrs;
          for (const auto& a : t.attributes)
            if (rng() % 2) attrs.push_back(a.name);
          r.add(t.name, attrs);
        }
      if (r.entries.empty()) continue;
      std::optional<DecomposedPlan> dp;
      try {
        dp = decompose_solve(r, m);
      } catch (const Infeasible&) {
        continue;
      }
      const std::size_t limit = 8 + rng() % 20;
      const auto plan = plan_view(*dp, r, m, {limit});
      std::set<std::string> seen;
      for (const auto& p : plan.projections) {
        CHECK(p.alias.size() <= limit);
        CHECK_MESSAGE(seen.insert(p.alias).second, p.alias);
      }
      // every relevant attribute is projected from some occurrence
      for (const auto& [t, attrs] : r.entries)
        for (const auto& a : attrs) {
          const bool found = std::any_of(plan.projections.begin(), plan.projections.end(),
                                         [&](const Projection& p) { return p.ref.table == t && p.attribute == a; });
          CHECK(found);
        }
    }
  }
}

TEST_SUITE("plan") {
  TEST_CASE("datacenter question joins the core walk") {
    const auto& m = testing::cdd().model;
    const auto dp = decompose_solve(q1(), m);
    const auto plan = plan_view(dp, q1(), m);
    CHECK(plan.base == TableRef{"datacenter", 1});
    REQUIRE(plan.joins.size() == 4);
    for (const auto& j : plan.joins) CHECK(j.kind == JoinKind::inner);
    CHECK(plan.joins[0].target.table == "compute_resource");
    CHECK(plan.joins[0].on.size() == 1);
    CHECK(plan.joins[0].on[0].first == ColumnRef{{"datacenter", 1}, "id"});
    CHECK(plan.joins[0].on[0].second == ColumnRef{{"compute_resource", 1}, "dc_id"});
    CHECK(plan.joins[3].on[0].first == ColumnRef{{"client", 1}, "id"});
    CHECK(plan.joins[3].on[0].second == ColumnRef{{"res_to_client", 1}, "client_id"});
    Strings aliases;
    for (const auto& p : plan.projections) aliases.push_back(p.alias);
    CHECK(aliases == Strings{"datacenter_id", "datacenter_name", "client_id", "client_name", "client_gender"});
    CHECK(build(q1()).sql_text == golden(1) + "\n");
  }

  TEST_CASE("branches are left joins") {
    const auto& m = testing::cdd().model;
    const auto plan = plan_view(decompose_solve(q2(), m), q2(), m);
    CHECK(plan.base == TableRef{"resource_pool", 1});
    REQUIRE(plan.joins.size() == 4);
    for (const auto& j : plan.joins) CHECK(j.kind == JoinKind::left);
    CHECK(plan.joins[2].source == TableRef{"resource_pool", 1});
    CHECK(plan.joins[2].target == TableRef{"runtime", 1});
    CHECK(build(q2()).sql_text == golden(2) + "\n");
  }

  TEST_CASE("repeat occurrences get their own range variable") {
    const auto& m = testing::cdd().model;
    const auto plan = plan_view(decompose_solve(q3(), m), q3(), m);
    REQUIRE(plan.joins.size() == 4);
    CHECK(plan.joins[2].target == TableRef{"payment_amount", 2});
    CHECK(plan.joins[3].source == TableRef{"payment_amount", 2});
    const auto sql = build(q3()).sql_text;
    CHECK(sql.find("left join payment_amount as payment_amount_2 on payment.id = payment_amount_2.pam_id") !=
          std::string::npos);
    CHECK(sql.find("payment_amount_2.amount as payment_amount_amount_2") != std::string::npos);
    CHECK(sql == golden(3) + "\n");
  }

  TEST_CASE("join count identity") {
    const auto& m = testing::cdd().model;
    for (const auto& r : {q1(), q2(), q3()}) {
      const auto dp = decompose_solve(r, m);
      std::size_t expected = dp.core_walk.steps.size() - 1;
      for (const auto& b : dp.branches) expected += b.tables.size();
      CHECK(plan_view(dp, r, m).joins.size() == expected);
    }
  }

  TEST_CASE("single table") {
    const auto& m = testing::cdd().model;
    const auto r = relta({{"client", {"name"}}});
    const auto v = build(r);
    CHECK(v.sql_text == "create view v as select\n  client.id as client_id,\n  client.name as client_name\nfrom client\n");
    CHECK(plan_view(solve_path(formulate_csp(r, m)), r, m).joins.empty());
  }

  TEST_CASE("lookup round trip repeats the table") {
    const auto& m = testing::cdd().model;
    const auto r = relta({{"client", {"name"}}, {"location", {"city"}}});
    const auto plan = plan_view(decompose_solve(r, m), r, m);
    REQUIRE(plan.joins.size() == 2);
    CHECK(plan.joins[1].target == TableRef{"client", 2});
    Strings aliases;
    for (const auto& p : plan.projections) aliases.push_back(p.alias);
    CHECK(aliases == Strings{"client_id", "client_name", "location_id", "location_city", "client_id_2", "client_name_2"});
  }

  TEST_CASE("empty walk") {
    CHECK_THROWS(plan_view(Walk{}, q1(), testing::cdd().model));
  }
}

TEST_SUITE("emit") {
  TEST_CASE("mysql quoting") {
    const auto v = build(q1(), {}, Dialect::mysql);
    CHECK(v.sql_text.rfind("create view `v` as select\n  `datacenter`.`id` as `datacenter_id`,", 0) == 0);
    CHECK(v.sql_text.find("join `compute_resource` on `datacenter`.`id` = `compute_resource`.`dc_id`") !=
          std::string::npos);
    CHECK(parse_dialect("mysql") == Dialect::mysql);
    CHECK(parse_dialect("ansi") == Dialect::ansi);
    CHECK_THROWS(parse_dialect("oracle"));
  }

  TEST_CASE("identifier limits") {
    const auto& m = testing::cdd().model;
    const auto plan = plan_view(decompose_solve(q1(), m), q1(), m, {200});
    CHECK_NOTHROW(emit_view_sql(plan, "v"));
    CHECK_THROWS_WITH(emit_view_sql(plan, std::string(65, 'v'), Dialect::mysql), doctest::Contains("64-character"));
    CHECK_NOTHROW(emit_view_sql(plan, std::string(65, 'v'), Dialect::ansi));
    CHECK_THROWS_WITH(emit_view_sql(plan, std::string(129, 'v'), Dialect::ansi), doctest::Contains("128-character"));
    CHECK(emit_view_sql(plan, "MyView").view_name == "myview");
  }

  TEST_CASE("views run on the seeded fixture") {
    const auto& fx = testing::cdd();
    auto db = make_seeded_engine(fx.model, fx.seed_sql);
    for (const auto& r : {q1(), q2(), q3()}) {
      const auto v = build(r);
      db->install_view("v", v.sql_text);
      const auto rs = db->query("select * from v");
      const auto plan = plan_view(decompose_solve(r, fx.model), r, fx.model);
      REQUIRE(rs.columns.size() == plan.projections.size());
      for (std::size_t i = 0; i < rs.columns.size(); ++i) CHECK(rs.columns[i] == plan.projections[i].alias);
      CHECK(!rs.rows.empty());
    }
  }

  TEST_CASE("footprint of the view is its plan") {
    const auto& m = testing::cdd().model;
    for (const auto& r : {q1(), q2(), q3()}) {
      const auto plan = plan_view(decompose_solve(r, m), r, m);
      const auto fp = sql_footprint(select_part(emit_view_sql(plan).sql_text));
      std::set<std::string> tables{plan.base.table}, attrs;
      for (const auto& j : plan.joins) {
        tables.insert(j.target.table);
        for (const auto& [a, b] : j.on) {
          attrs.insert(a.ref.table + "." + a.column);
          attrs.insert(b.ref.table + "." + b.column);
        }
      }
      for (const auto& p : plan.projections) attrs.insert(p.ref.table + "." + strip(p.attribute));
      std::set<std::string> lowered;
      for (auto a : attrs) {
        std::transform(a.begin(), a.end(), a.begin(), [](unsigned char c) { return std::tolower(c); });
        lowered.insert(a);
      }
      CHECK(fp.tables == tables);
      CHECK(fp.attributes == lowered);
    }
  }
}
