#include "pathsql/pipeline.hpp"

#include <fstream>

namespace pathsql {

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

}  // namespace

std::string format_plan(const DecomposedPlan& plan) {
  std::string out = "core: " + join(plan.core_walk.steps, " -> ") + "\n";
  out += "cost: " + std::to_string(plan.core_walk.cost) + "\n";
  for (const auto& b : plan.branches) out += "branch: " + b.root + " -> " + join(b.tables, " -> ") + "\n";
  out += "stats: states_expanded=" + std::to_string(plan.stats.states_expanded) +
         " depth_reached=" + std::to_string(plan.stats.depth_reached) +
         " horizon=" + std::to_string(plan.stats.horizon) + "\n";
  return out;
}

void write_run_dir(const PipelineResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (!r.relevance.empty()) write_file(dir / "relta.json", relevance_to_json(r.relevance));
  if (r.plan) write_file(dir / "walk.txt", format_plan(*r.plan));
  if (r.view) write_file(dir / "view.sql", r.view->sql_text);
  if (r.query) write_file(dir / "final.sql", r.query->sql_text + "\n");
  std::string log;
  for (const auto& e : r.phase_log) log += "[" + e.phase + "] " + e.message + "\n";
  write_file(dir / "phase_log.txt", log);
}

PipelineResult answer_question(const Question& q, const DatabaseModel& model, LlmClient& llm,
                               const PipelineConfig& config) {
  PipelineResult result;
  auto log = [&](const std::string& phase, const std::string& msg) { result.phase_log.push_back({phase, msg}); };
  auto fail = [&](const std::string& phase, const std::string& kind, const std::string& msg) {
    log(phase, "failed (" + kind + "): " + msg);
    if (config.run_dir) write_run_dir(result, *config.run_dir);
    throw PipelineError(phase, kind, msg, result);
  };

  if (q.text.empty()) fail("retrieve", "bad_question", "question text is empty");

  // Phase 1
  {
    RetrieveLog rlog;
    try {
      result.relevance = retrieve_relevant(q, model, llm, config.retrieve, &rlog);
    } catch (const RetrievalEmpty& e) {
      for (auto& l : rlog) log("retrieve", l);
      fail("retrieve", "retrieval_empty", e.what());
    } catch (const LlmError& e) {
      for (auto& l : rlog) log("retrieve", l);
      fail("retrieve", "llm_" + e.kind(), e.what());
    } catch (const Error& e) {
      for (auto& l : rlog) log("retrieve", l);
      fail("retrieve", "error", e.what());
    }
    for (auto& l : rlog) log("retrieve", l);
    log("retrieve", "relevant tables: " + join(result.relevance.relevant_tables(), ", "));
  }

  // Phase 2
  try {
    result.plan = decompose_solve(result.relevance, model, config.max_len);
    log("solve", "core walk " + to_string(result.plan->core_walk) + " cost " +
                     std::to_string(result.plan->core_walk.cost));
    for (const auto& b : result.plan->branches) log("solve", "branch " + b.root + " -> " + join(b.tables, " -> "));
    result.view_plan = plan_view(*result.plan, result.relevance, model, config.view);
    result.view = emit_view_sql(*result.view_plan, config.view_name, config.dialect);
    log("solve", "view with " + std::to_string(result.view_plan->joins.size()) + " joins and " +
                     std::to_string(result.view_plan->projections.size()) + " columns");
  } catch (const Infeasible& e) {
    fail("solve", "infeasible", e.what());
  } catch (const Error& e) {
    fail("solve", "error", e.what());
  }

  // Phase 3
  try {
    result.query = generate_query(q, *result.view, llm, config.tosql);
    log("to-sql", "selected query with " + std::to_string(result.query->vote_count) + "/" +
                      std::to_string(result.query->sample_total) + " votes");
  } catch (const ExtractionError& e) {
    fail("to-sql", "extraction", e.what());
  } catch (const LlmError& e) {
    fail("to-sql", "llm_" + e.kind(), e.what());
  } catch (const Error& e) {
    fail("to-sql", "error", e.what());
  }

  if (config.run_dir) write_run_dir(result, *config.run_dir);
  return result;
}

}  // namespace pathsql
