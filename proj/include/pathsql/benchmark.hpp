#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathsql/executor.hpp"
#include "pathsql/llm.hpp"
#include "pathsql/model.hpp"
#include "pathsql/pipeline.hpp"

namespace pathsql {

struct DatasetItem {
  std::string id;
  Question question;
  std::string gt_sql;
};

// JSON lines: {"id"?, "question", "evidence"?, "gt_sql"}. Blank lines skipped.
std::vector<DatasetItem> read_dataset_jsonl(const std::string& text);

struct BenchmarkSettings {
  PipelineConfig pipeline;  // pipeline.tosql.samples is S
  int threshold = 5;        // solved iff more than `threshold` samples match
  int jobs = 1;
};

struct QuestionRecord {
  std::string id;
  std::string question;
  bool errored = false;
  std::string error_phase;
  std::string error;
  int samples = 0;
  int ex_votes = 0;
  int esx_votes = 0;
  bool ex = false;
  bool esx = false;
  std::optional<double> cover_t;
  std::optional<double> cover_a;
  std::string view_sql;
  std::string final_sql;
};

struct BenchmarkReport {
  std::vector<QuestionRecord> records;
  int total = 0;
  int ex_solved = 0;
  int esx_solved = 0;
  int errored = 0;
  double mean_cover_t = 0;  // over records with coverage
  double mean_cover_a = 0;

  int ex_unsolved() const { return total - ex_solved - errored; }
  std::string to_json() const;
  // Rows cover_t, cover_a, EX, ESX, then one line per question.
  std::string to_table() const;
};

BenchmarkReport summarize(std::vector<QuestionRecord> records);

// Questions run independently; with jobs > 1 each worker gets its own
// executor and records are merged in dataset order. The LLM client is shared.
BenchmarkReport run_benchmark(const std::vector<DatasetItem>& dataset, const DatabaseModel& model, LlmClient& llm,
                              const ExecutorFactory& executors, const BenchmarkSettings& settings = {});

}  // namespace pathsql
