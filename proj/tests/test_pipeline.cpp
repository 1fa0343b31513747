#include <doctest.h>

#include "pathsql/pipeline.hpp"
#include "support.hpp"

using namespace pathsql;
using Strings = std::vector<std::string>;
using Script = std::vector<Strings>;

namespace {

Script cdd_script(int q) {
  return parse_script(testing::slurp(testing::cdd_dir() / "mock" / ("q" + std::to_string(q) + ".script.json")));
}

std::string golden(int q, const std::string& file) {
  return testing::slurp(testing::cdd_dir() / "golden" / ("q" + std::to_string(q)) / file);
}

const Question& question(int q) { return testing::cdd().questions[static_cast<std::size_t>(q - 1)].question; }

PipelineError failure(const std::function<void()>& f) {
  try {
    f();
  } catch (const PipelineError& e) {
    return e;
  }
  FAIL("expected a pipeline error");
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("the three fixture questions reproduce their goldens") {
  for (int q = 1; q <= 3; ++q) {
    CAPTURE(q);
    ScriptedLlm llm(cdd_script(q));
    const auto r = answer_question(question(q), testing::cdd().model, llm);
    REQUIRE(r.view);
    REQUIRE(r.query);
    CHECK(r.view->sql_text == golden(q, "view.sql"));
    CHECK(r.query->sql_text + "\n" == golden(q, "final.sql"));
    CHECK(llm.remaining() == 0);
    CHECK(r.query->sample_total == 20);
  }
}

TEST_CASE("datacenter question in detail") {
  ScriptedLlm llm(cdd_script(1));
  const auto r = answer_question(question(1), testing::cdd().model, llm);
  CHECK(r.relevance.relevant_tables() == Strings{"client", "datacenter"});
  CHECK(r.plan->core_walk.steps == Strings{"datacenter", "compute_resource", "resource_pool", "res_to_client", "client"});
  CHECK(r.plan->branches.empty());
  CHECK(r.query->vote_count == 17);
  Strings phases;
  for (const auto& e : r.phase_log)
    if (phases.empty() || phases.back() != e.phase) phases.push_back(e.phase);
  CHECK(phases == Strings{"retrieve", "solve", "to-sql"});
  const auto ledger = llm.ledger();
  REQUIRE(ledger.size() == 4);
  CHECK(ledger[3].n_samples == 20);
  CHECK(ledger[0].n_samples == 5);
}

TEST_CASE("resource pool question uses the branches") {
  ScriptedLlm llm(cdd_script(2));
  const auto r = answer_question(question(2), testing::cdd().model, llm);
  CHECK(r.plan->core_walk.steps == Strings{"resource_pool"});
  CHECK(r.plan->branches.size() == 2);
  CHECK(r.query->sql_text ==
        "select distinct resource_pool_name from v where configcpu_overheadlimit > runtimecpu_overallusage + 100");
}

TEST_CASE("settings reach the model") {
  ScriptedLlm llm(cdd_script(1));
  PipelineConfig c;
  c.retrieve.samples = 3;
  c.tosql.samples = 7;
  c.tosql.temperature = 0.9;
  c.view_name = "summary";
  c.dialect = Dialect::mysql;
  const auto r = answer_question(question(1), testing::cdd().model, llm, c);
  const auto ledger = llm.ledger();
  CHECK(ledger[0].n_samples == 3);
  CHECK(ledger[3].n_samples == 7);
  CHECK(ledger[3].temperature == doctest::Approx(0.9));
  CHECK(r.view->view_name == "summary");
  CHECK(r.view->sql_text.rfind("create view `summary` as select", 0) == 0);
  CHECK(ledger[3].prompt.find("I created a view table summary") != std::string::npos);
}

TEST_CASE("disconnected tables fail in the solve phase") {
  auto m = testing::financial();
  m.tables.push_back({"Island", {{"id", "int", "", ""}}, {"id"}, "An unrelated table"});
  ScriptedLlm llm(Script{{"['Client', 'Island']"}, {"[gender]"}, {"[id]"}});
  const auto e = failure([&] { answer_question({"q", {}}, m, llm); });
  CHECK(e.phase() == "solve");
  CHECK(e.kind() == "infeasible");
  CHECK(e.partial().relevance.relevant_tables() == Strings{"Client", "Island"});
  CHECK(!e.partial().plan);
  CHECK(!e.partial().view);
  CHECK(llm.calls() == 3);
}

TEST_CASE("failures carry the earlier phases") {
  SUBCASE("no sql from the model") {
    auto s = cdd_script(1);
    s.back() = {"I cannot answer that."};
    ScriptedLlm llm(s);
    const auto e = failure([&] { answer_question(question(1), testing::cdd().model, llm); });
    CHECK(e.phase() == "to-sql");
    CHECK(e.kind() == "extraction");
    REQUIRE(e.partial().view);
    CHECK(e.partial().view->sql_text == golden(1, "view.sql"));
    CHECK(!e.partial().query);
  }
  SUBCASE("model unavailable in the last phase") {
    auto s = cdd_script(1);
    s.pop_back();
    ScriptedLlm llm(s);
    const auto e = failure([&] { answer_question(question(1), testing::cdd().model, llm); });
    CHECK(e.phase() == "to-sql");
    CHECK(e.kind() == "llm_script_exhausted");
    CHECK(e.partial().plan);
  }
  SUBCASE("nothing relevant") {
    ScriptedLlm llm(Script{{"[]"}});
    const auto e = failure([&] { answer_question(question(1), testing::cdd().model, llm); });
    CHECK(e.phase() == "retrieve");
    CHECK(e.kind() == "retrieval_empty");
    CHECK(e.partial().relevance.empty());
  }
  SUBCASE("empty question") {
    ScriptedLlm llm(Script{});
    const auto e = failure([&] { answer_question({"", {}}, testing::cdd().model, llm); });
    CHECK(e.phase() == "retrieve");
    CHECK(e.kind() == "bad_question");
    CHECK(llm.calls() == 0);
  }
  SUBCASE("horizon too short") {
    ScriptedLlm llm(cdd_script(1));
    PipelineConfig c;
    c.max_len = 3;
    const auto e = failure([&] { answer_question(question(1), testing::cdd().model, llm, c); });
    CHECK(e.phase() == "solve");
    CHECK(e.kind() == "infeasible");
    CHECK(llm.calls() == 3);
  }
}

TEST_CASE("runs are repeatable") {
  for (int q = 1; q <= 3; ++q) {
    ScriptedLlm a(cdd_script(q)), b(cdd_script(q));
    const auto ra = answer_question(question(q), testing::cdd().model, a);
    const auto rb = answer_question(question(q), testing::cdd().model, b);
    CHECK(ra.view->sql_text == rb.view->sql_text);
    CHECK(ra.query->sql_text == rb.query->sql_text);
    CHECK(ra.relevance == rb.relevance);
    REQUIRE(a.ledger().size() == b.ledger().size());
    for (std::size_t i = 0; i < a.ledger().size(); ++i) CHECK(a.ledger()[i].prompt == b.ledger()[i].prompt);
  }
}

TEST_CASE("run directory") {
  testing::TempDir tmp;
  SUBCASE("success writes every artifact") {
    ScriptedLlm llm(cdd_script(3));
    PipelineConfig c;
    c.run_dir = tmp.path / "q3";
    answer_question(question(3), testing::cdd().model, llm, c);
    for (const auto* f : {"relta.json", "walk.txt", "view.sql", "final.sql", "phase_log.txt"})
      CHECK_MESSAGE(std::filesystem::exists(*c.run_dir / f), f);
    CHECK(testing::slurp(*c.run_dir / "final.sql") == golden(3, "final.sql"));
    CHECK(testing::slurp(*c.run_dir / "view.sql") == golden(3, "view.sql"));
    const auto walk = testing::slurp(*c.run_dir / "walk.txt");
    CHECK(walk.find("branch: payment -> payment_amount -> tax\n") != std::string::npos);
    const auto log = testing::slurp(*c.run_dir / "phase_log.txt");
    CHECK(log.find("[retrieve] ") == 0);
    CHECK(log.find("[to-sql] selected query with 11/20 votes") != std::string::npos);
    const auto relta = relevance_from_json(testing::slurp(*c.run_dir / "relta.json"));
    CHECK(relta.relevant_tables() == Strings{"payment", "payment_amount", "supercharge", "tax"});
  }
  SUBCASE("failure keeps what was done") {
    auto m = testing::financial();
    m.tables.push_back({"Island", {{"id", "int", "", ""}}, {"id"}, "An unrelated table"});
    ScriptedLlm llm(Script{{"['Client', 'Island']"}, {"[gender]"}, {"[id]"}});
    PipelineConfig c;
    c.run_dir = tmp.path / "bad";
    CHECK_THROWS_AS(answer_question({"q", {}}, m, llm, c), PipelineError);
    CHECK(std::filesystem::exists(*c.run_dir / "relta.json"));
    CHECK(!std::filesystem::exists(*c.run_dir / "view.sql"));
    CHECK(testing::slurp(*c.run_dir / "phase_log.txt").find("[solve] failed (infeasible)") != std::string::npos);
  }
}
