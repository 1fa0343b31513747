#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathsql/error.hpp"
#include "pathsql/llm.hpp"
#include "pathsql/retrieve.hpp"
#include "pathsql/view.hpp"

namespace pathsql {

class ExtractionError : public Error {
 public:
  explicit ExtractionError(std::string raw, const std::string& message = "no SQL found in model output")
      : Error(message), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Prompt C, or Prompt C' when evidence and/or a schema excerpt is given.
std::string render_prompt_c(const Question& q, const ViewSql& view, const std::optional<std::string>& evidence = {},
                            const std::optional<std::string>& schema_excerpt = {});

// First ```sql fence, or the whole text when it starts with SELECT.
std::string extract_sql(const std::string& raw_llm_output);

// Whitespace collapsed and keywords lowercased outside string literals,
// trailing semicolons dropped.
std::string normalize_sql(const std::string& sql);

struct FinalQuery {
  std::string sql_text;
  int vote_count = 0;
  int sample_total = 0;
  // Normalized SQL per sample, nullopt where extraction failed.
  std::vector<std::optional<std::string>> samples;
};

struct ToSqlSettings {
  int samples = 20;
  double temperature = 0.2;
  std::optional<std::string> schema_excerpt;
};

// Majority vote over normalized samples; ties go to the smallest string.
FinalQuery select_query(const std::vector<std::string>& raw_outputs);

FinalQuery generate_query(const Question& q, const ViewSql& view, LlmClient& llm, const ToSqlSettings& settings = {});

}  // namespace pathsql
