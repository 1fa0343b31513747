#include <doctest.h>

#include <sstream>

#include "pathsql/cli.hpp"
#include "support.hpp"

using namespace pathsql;
using Strings = std::vector<std::string>;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const Strings& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string mock(int q) { return (testing::cdd_dir() / "mock" / ("q" + std::to_string(q) + ".script.json")).string(); }

std::string golden(int q, const std::string& f) {
  return testing::slurp(testing::cdd_dir() / "golden" / ("q" + std::to_string(q)) / f);
}

const std::string& question(int q) { return testing::cdd().questions[static_cast<std::size_t>(q - 1)].question.text; }

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("validate") {
    auto r = cli({"dbm", "validate"});
    CHECK(r.code == 0);
    CHECK(r.out == "0 diagnostics\n");
    r = cli({"--dbm", testing::test_data("financial").string(), "dbm", "validate"});
    CHECK(r.code == 0);

    testing::TempDir tmp;
    write(tmp.path / "bad.sql", "create table a (id int primary key, b_id int, foreign key (b_id) references b(id));\n");
    r = cli({"--model", (tmp.path / "bad.sql").string(), "dbm", "validate"});
    CHECK(r.code == 1);
    CHECK(r.out.find("1 diagnostics") != std::string::npos);
  }

  TEST_CASE("build") {
    testing::TempDir tmp;
    const auto r = cli({"dbm", "build", "--out", tmp.path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("\nclient: core\n") != std::string::npos);
    for (const auto* f : {"tables.json", "relationships.json", "patterns.json"})
      CHECK_MESSAGE(std::filesystem::exists(tmp.path / f), f);
    const auto again = cli({"--dbm", tmp.path.string(), "dbm", "validate"});
    CHECK(again.code == 0);
    CHECK(again.out == "0 diagnostics\n");
  }

  TEST_CASE("solve") {
    auto r = cli({"solve", "--tables", "client,datacenter"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("walk: [datacenter, compute_resource, resource_pool, res_to_client, client]\ncost: 3\n", 0) == 0);
    for (const auto* rule : {"C1", "C2", "C3", "C4", "cost"})
      CHECK(r.out.find(std::string("check ") + rule + ": ok") != std::string::npos);

    r = cli({"solve", "--tables", "configcpu,runtimecpu,resource_pool", "--decompose"});
    CHECK(r.out.find("branch: resource_pool -> config -> configcpu\n") != std::string::npos);

    r = cli({"solve", "--tables", "client,ghost"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: phase=solve", 0) == 0);

    r = cli({"--max-len", "2", "solve", "--tables", "client,location"});
    CHECK(r.code == 1);
    CHECK(r.err.find("kind=infeasible") != std::string::npos);
  }

  TEST_CASE("view") {
    auto r = cli({"view", "--tables", "client.name,client.gender,datacenter.name"});
    CHECK(r.code == 0);
    CHECK(r.out == golden(1, "view.sql"));
    r = cli({"--dialect", "mysql", "--view-name", "w", "view", "--tables", "client.name"});
    CHECK(r.out.rfind("create view `w` as select", 0) == 0);
  }

  TEST_CASE("ask reproduces the goldens") {
    for (int q = 1; q <= 3; ++q) {
      const auto r = cli({"--mock", mock(q), "ask", question(q)});
      CHECK(r.code == 0);
      CHECK(r.out == golden(q, "view.sql") + "\n" + golden(q, "final.sql"));
    }
  }

  TEST_CASE("record then replay") {
    testing::TempDir tmp;
    const auto t = (tmp.path / "t.json").string();
    const auto a = cli({"--mock", mock(2), "--record", t, "ask", question(2)});
    REQUIRE(a.code == 0);
    REQUIRE(std::filesystem::exists(t));
    const auto b = cli({"--mock", t, "ask", question(2)});
    CHECK(b.code == 0);
    CHECK(a.out == b.out);
    const auto c = cli({"--mock", t, "ask", question(1)});
    CHECK(c.code == 1);
    CHECK(c.err.rfind("error: phase=retrieve kind=llm_", 0) == 0);
  }

  TEST_CASE("eval") {
    testing::TempDir tmp;
    const auto report = (tmp.path / "r.json").string();
    const auto r = cli({"--mock", (testing::cdd_dir() / "mock" / "all.transcript.json").string(), "eval", "--report", report});
    CHECK(r.code == 0);
    for (const auto* row : {"cover_t", "cover_a", "EX", "ESX"}) CHECK(r.out.find(row) != std::string::npos);
    const auto json = testing::slurp(report);
    CHECK(json.find("\"ex_solved\": 3") != std::string::npos);
  }

  TEST_CASE("explain") {
    testing::TempDir tmp;
    auto r = cli({"explain"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("graph", 0) == 0);
    r = cli({"--mock", mock(1), "--run-dir", tmp.path.string(), "explain", question(1)});
    CHECK(r.code == 0);
    for (const auto* s : {"== relta.json ==", "== walk.txt ==", "== view.sql ==", "== final.sql ==",
                          "== phase_log.txt ==", "== graph.dot =="})
      CHECK_MESSAGE(r.out.find(s) != std::string::npos, s);
    CHECK(std::filesystem::exists(tmp.path / "graph.dot"));
    CHECK(std::filesystem::exists(tmp.path / "view.sql"));
  }

  TEST_CASE("help on every command") {
    for (const auto& args : std::vector<Strings>{{"--help"},
                                                 {"dbm", "--help"},
                                                 {"dbm", "build", "--help"},
                                                 {"dbm", "validate", "--help"},
                                                 {"solve", "--help"},
                                                 {"view", "--help"},
                                                 {"ask", "--help"},
                                                 {"eval", "--help"},
                                                 {"explain", "--help"}}) {
      const auto r = cli(args);
      CHECK_MESSAGE(r.code == 0, args[0]);
      CHECK(!r.out.empty());
    }
  }

  TEST_CASE("usage errors exit 2") {
    for (const auto& args : std::vector<Strings>{{},
                                                 {"frobnicate"},
                                                 {"solve"},
                                                 {"ask"},
                                                 {"--samples", "0", "ask", "q"},
                                                 {"--temperature", "3", "ask", "q"},
                                                 {"--dialect", "oracle", "view", "--tables", "client"},
                                                 {"--mock", "m.json", "--endpoint", "http://x", "ask", "q"},
                                                 {"view"},
                                                 {"view", "--tables", "client", "--relta", "r.json"}}) {
      const auto r = cli(args);
      CAPTURE(r.err);
      CHECK(r.code == 2);
      CHECK(r.err.rfind("error: phase=", 0) == 0);
      CHECK(r.out.empty());
    }
  }

  TEST_CASE("config file, command line wins") {
    testing::TempDir tmp;
    const auto cfg = tmp.path / "pathsql.toml";
    write(cfg, "dialect = \"mysql\"\nview-name = \"from_config\"\n");
    auto r = cli({"--config", cfg.string(), "view", "--tables", "client.name"});
    CHECK(r.out.rfind("create view `from_config` as select", 0) == 0);
    r = cli({"--config", cfg.string(), "--view-name", "flag", "view", "--tables", "client.name"});
    CHECK(r.out.rfind("create view `flag` as select", 0) == 0);
  }

  TEST_CASE("runtime errors are one line") {
    const auto r = cli({"--mock", "/nonexistent/mock.json", "ask", "q"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: phase=", 0) == 0);
    CHECK(r.err.find('\n') == r.err.size() - 1);
    CHECK(r.err.find(" kind=") != std::string::npos);
    CHECK(r.err.find(" msg=") != std::string::npos);
  }
}
