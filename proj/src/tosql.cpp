#include "pathsql/tosql.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace pathsql {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "select", "from",   "where",    "and",   "or",     "not",    "like",     "in",      "is",    "null",
      "join",   "left",   "right",    "inner", "outer",  "full",   "cross",    "on",      "as",    "group",
      "by",     "order",  "having",   "limit", "offset", "distinct", "all",    "union",   "case",  "when",
      "then",   "else",   "end",      "asc",   "desc",   "between", "exists",  "count",   "sum",   "avg",
      "min",    "max",    "ifnull",   "coalesce", "cast", "with",  "true",     "false",   "nullif", "round",
      "abs",    "lower",  "upper",    "length", "substr", "iif",   "over",     "partition", "using", "natural",
      "create", "view",   "intersect", "except", "date",  "strftime", "real",   "integer", "text",  "if"};
  return k;
}

}  // namespace

std::string render_prompt_c(const Question& q, const ViewSql& view, const std::optional<std::string>& evidence,
                            const std::optional<std::string>& schema_excerpt) {
  const std::string& name = view.view_name;
  std::string out;
  const bool prime = evidence.has_value() || schema_excerpt.has_value();
  if (schema_excerpt) out += "Here is a SQL schema for in MySQL: " + *schema_excerpt + "\n";
  out += "I created a view table " + name + " with all relevant information.\n";
  out += "Here is a view " + view.sql_text + ".\n";
  out += std::string("Please write MySQL query to ") + (prime ? "" : " ") + name +
         " view to answer the following question: " + q.text + ".\n";
  if (evidence) out += "Additional knowledge to answer:  " + *evidence + "\n";
  out += "Use only " + name + " columns in the query.\n";
  out += "Absolutely NO columns renaming.\n";
  out += "Absolutely NO HAVING operators.\n";
  out += "Absolutely NO COUNT(*).\n";
  out += "Output query that I can run via python interface. Output '```sql...'. Do not explain.";
  return out;
}

std::string extract_sql(const std::string& raw) {
  const auto lowered = lower(raw);
  const auto fence = lowered.find("```sql");
  if (fence != std::string::npos) {
    const auto start = fence + 6;
    const auto close = raw.find("```", start);
    auto body = trim(raw.substr(start, close == std::string::npos ? std::string::npos : close - start));
    if (body.empty()) throw ExtractionError(raw, "empty sql block in model output");
    return body;
  }
  const auto t = trim(raw);
  auto head = lower(t.substr(0, 7));
  if (head.rfind("select", 0) == 0 && (t.size() == 6 || !std::isalnum(static_cast<unsigned char>(t[6])))) return t;
  throw ExtractionError(raw);
}

std::string normalize_sql(const std::string& sql) {
  std::string out;
  std::string word;
  bool space = false;
  auto flush_word = [&] {
    if (word.empty()) return;
    const auto l = lower(word);
    out += keywords().count(l) ? l : word;
    word.clear();
  };
  for (std::size_t i = 0; i < sql.size(); ++i) {
    const char c = sql[i];
    if (c == '\'' || c == '"' || c == '`') {
      flush_word();
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      std::size_t j = i + 1;
      while (j < sql.size()) {
        if (sql[j] == c) {
          if (j + 1 < sql.size() && sql[j + 1] == c) {
            j += 2;
            continue;
          }
          break;
        }
        ++j;
      }
      out.append(sql, i, std::min(j, sql.size() - 1) - i + 1);
      i = j;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush_word();
      space = true;
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      if (word.empty() && space && !out.empty()) out.push_back(' ');
      if (word.empty()) space = false;
      word.push_back(c);
      continue;
    }
    flush_word();
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  flush_word();
  while (!out.empty() && (out.back() == ';' || out.back() == ' ')) out.pop_back();
  return out;
}

FinalQuery select_query(const std::vector<std::string>& raw_outputs) {
  FinalQuery fq;
  fq.sample_total = static_cast<int>(raw_outputs.size());
  std::map<std::string, int> votes;
  std::string last_error;
  for (const auto& raw : raw_outputs) {
    try {
      auto norm = normalize_sql(extract_sql(raw));
      ++votes[norm];
      fq.samples.emplace_back(std::move(norm));
    } catch (const ExtractionError& e) {
      fq.samples.emplace_back(std::nullopt);
      last_error = raw;
    }
  }
  if (votes.empty())
    throw ExtractionError(last_error, "none of the " + std::to_string(raw_outputs.size()) + " samples contained SQL");
  for (const auto& [sql, n] : votes)  // map order: first maximum is the smallest string
    if (n > fq.vote_count) {
      fq.vote_count = n;
      fq.sql_text = sql;
    }
  return fq;
}

FinalQuery generate_query(const Question& q, const ViewSql& view, LlmClient& llm, const ToSqlSettings& settings) {
  if (settings.samples < 1) throw Error("samples must be at least 1");
  const auto prompt = render_prompt_c(q, view, q.evidence, settings.schema_excerpt);
  return select_query(llm.complete({prompt, settings.samples, settings.temperature}));
}

}  // namespace pathsql
