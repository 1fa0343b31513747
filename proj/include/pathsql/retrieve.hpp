#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathsql/error.hpp"
#include "pathsql/llm.hpp"
#include "pathsql/model.hpp"

namespace pathsql {

struct Question {
  std::string text;
  std::optional<std::string> evidence;
};

// relta: table -> selected attributes (declaration order).
struct RelevanceSet {
  std::map<std::string, std::vector<std::string>> entries;

  std::vector<std::string> relevant_tables() const;
  bool contains(const std::string& table) const { return entries.count(table) != 0; }
  bool empty() const { return entries.empty(); }
  // Adds the table (even with no attributes) and merges attributes.
  void add(const std::string& table, const std::vector<std::string>& attributes = {});
  // Orders attributes as declared in the model; throws on unknown names.
  void normalize(const DatabaseModel& model);

  bool operator==(const RelevanceSet&) const = default;
};

std::string relevance_to_json(const RelevanceSet& r);
RelevanceSet relevance_from_json(const std::string& text);

class RetrievalEmpty : public Error {
 public:
  explicit RetrievalEmpty(const std::string& question)
      : Error("no relevant tables found for question: " + question) {}
};

// Prompt A. `tables` maps a table name to its summary; `attributes` maps an
// attribute name to its description (plus "DescriptionField" for the table
// itself). The element list quotes tables and leaves attributes bare.
std::string render_prompt_a(const Question& q, const std::vector<std::pair<std::string, std::string>>& tables,
                            const std::vector<std::pair<std::string, std::string>>& attributes);

// Description plus "Properties of T: ..." including pattern descendants as
// dotted paths when T is a pattern node.
std::string table_summary(const DatabaseModel& model, const std::string& table);
// DescriptionField first, then attributes in declaration order.
std::vector<std::pair<std::string, std::string>> attribute_sheet(const DatabaseModel& model, const std::string& table);

struct SampleAggregate {
  std::map<std::string, int> counts;
  std::vector<std::string> ranked;
  std::size_t cap = 8;
};

// An item counts once per sample it appears in.
SampleAggregate aggregate_samples(const std::vector<std::vector<std::string>>& samples, std::size_t cap = 8);

// Items of the first bracketed list in `text`, unquoted and trimmed. Without
// brackets the whole text is split on commas and newlines.
std::vector<std::string> parse_element_list(const std::string& text);

struct RetrieveSettings {
  int samples = 5;
  double temperature = 0.2;
  std::size_t cap = 8;
};

// One line per prompt and per dropped element, for the phase log.
using RetrieveLog = std::vector<std::string>;

RelevanceSet dive(const Question& q, const std::string& root, LlmClient& llm, const DatabaseModel& model,
                  const RetrieveSettings& settings = {}, RetrieveLog* log = nullptr);

// Throws RetrievalEmpty when nothing is selected.
RelevanceSet retrieve_relevant(const Question& q, const DatabaseModel& model, LlmClient& llm,
                               const RetrieveSettings& settings = {}, RetrieveLog* log = nullptr);

}  // namespace pathsql
