#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pathsql/error.hpp"
#include "pathsql/llm.hpp"
#include "pathsql/model.hpp"
#include "pathsql/retrieve.hpp"
#include "pathsql/solver.hpp"
#include "pathsql/tosql.hpp"
#include "pathsql/view.hpp"

namespace pathsql {

struct PipelineConfig {
  RetrieveSettings retrieve;
  ToSqlSettings tosql;
  std::optional<int> max_len;
  std::string view_name = "v";
  Dialect dialect = Dialect::ansi;
  ViewOptions view;
  // When set, phase artifacts land here (also on failure).
  std::optional<std::filesystem::path> run_dir;
};

struct PhaseLogEntry {
  std::string phase;  // "retrieve", "solve", "to-sql"
  std::string message;
};

struct PipelineResult {
  RelevanceSet relevance;
  std::optional<DecomposedPlan> plan;
  std::optional<ViewPlan> view_plan;
  std::optional<ViewSql> view;
  std::optional<FinalQuery> query;
  std::vector<PhaseLogEntry> phase_log;
};

class PipelineError : public Error {
 public:
  PipelineError(std::string phase, std::string kind, const std::string& message, PipelineResult partial)
      : Error(message), phase_(std::move(phase)), kind_(std::move(kind)), partial_(std::move(partial)) {}
  const std::string& phase() const { return phase_; }
  const std::string& kind() const { return kind_; }
  const PipelineResult& partial() const { return partial_; }

 private:
  std::string phase_;
  std::string kind_;
  PipelineResult partial_;
};

// Retrieve, solve, to-sql. Failures raise PipelineError carrying whatever the
// earlier phases produced.
PipelineResult answer_question(const Question& q, const DatabaseModel& model, LlmClient& llm,
                               const PipelineConfig& config = {});

std::string format_plan(const DecomposedPlan& plan);

// relta.json, walk.txt, view.sql, final.sql, phase_log.txt; absent phases skipped.
void write_run_dir(const PipelineResult& result, const std::filesystem::path& dir);

}  // namespace pathsql
