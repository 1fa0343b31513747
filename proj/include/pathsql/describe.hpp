#pragma once

#include "pathsql/llm.hpp"
#include "pathsql/model.hpp"

namespace pathsql {

// Prompt D followed by the table's column sheet (CSV).
std::string render_prompt_d(const TableDef& table);

// Asks for a summary of every table whose description is empty; existing
// descriptions are kept. One request per such table.
DatabaseModel build_descriptions(const DatabaseModel& model, LlmClient& llm, double temperature = 0.2);

}  // namespace pathsql
