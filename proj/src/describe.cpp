#include "pathsql/describe.hpp"

namespace pathsql {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

std::string render_prompt_d(const TableDef& table) {
  std::string out = "Give me a very brief description of the " + table.name + " table.\n\n";
  out += "original_column_name,column_name,column_description,data_format,value_description\n";
  for (const auto& a : table.attributes)
    out += csv_field(a.name) + ",," + csv_field(a.description) + "," + csv_field(a.sql_type) + ",\n";
  return out;
}

DatabaseModel build_descriptions(const DatabaseModel& model, LlmClient& llm, double temperature) {
  DatabaseModel out = model;
  for (auto& t : out.tables) {
    if (!trim(t.description).empty()) continue;
    std::vector<std::string> answer;
    try {
      answer = llm.complete({render_prompt_d(t), 1, temperature});
    } catch (const LlmError& e) {
      throw e.with_context("describing table " + t.name);
    }
    auto text = answer.empty() ? std::string() : trim(answer.front());
    if (text.empty()) throw Error("describing table " + t.name + ": empty summary");
    t.description = std::move(text);
  }
  return out;
}

}  // namespace pathsql
