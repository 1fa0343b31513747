#include "pathsql/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "pathsql/error.hpp"

namespace pathsql {

void ResultSet::check() const {
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() != columns.size())
      throw Error("result row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                  " values for " + std::to_string(columns.size()) + " columns");
}

Value canonical_value(const Value& v) {
  if (!v || v->empty()) return v;
  const std::string& s = *v;
  if (std::isspace(static_cast<unsigned char>(s.front())) || std::isspace(static_cast<unsigned char>(s.back())))
    return v;
  const char* begin = s.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end != begin + s.size() || !std::isfinite(x)) return v;
  if (s.find_first_of("xXpP") != std::string::npos) return v;  // hex floats stay text
  char buf[64];
  if (x == std::floor(x) && std::fabs(x) < 1e15) std::snprintf(buf, sizeof buf, "%.0f", x == 0 ? 0.0 : x);
  else std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::string(buf);
}

// --- CSV ------------------------------------------------------------------

ResultSet read_csv(const std::string& text) {
  std::vector<std::vector<Value>> records;
  std::vector<Value> rec;
  std::string field;
  bool quoted = false, in_quotes = false, any = false;
  std::size_t i = 0;
  auto end_field = [&] {
    if (!quoted && field == "NULL") rec.emplace_back(std::nullopt);
    else rec.emplace_back(field);
    field.clear();
    quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(rec));
    rec.clear();
    any = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"' && field.empty() && !quoted) {
      in_quotes = quoted = any = true;
    } else if (c == ',') {
      end_field();
      any = true;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      ++i;
    } else if (c == '\n' || c == '\r') {
      end_record();
    } else {
      field.push_back(c);
      any = true;
    }
    ++i;
  }
  if (in_quotes) throw Error("csv: unterminated quoted field");
  if (any || !field.empty() || !rec.empty()) end_record();

  ResultSet rs;
  if (records.empty()) return rs;
  for (auto& h : records.front()) rs.columns.push_back(h.value_or("NULL"));
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0] && records[r][0]->empty() && rs.columns.size() != 1) continue;
    rs.rows.push_back(std::move(records[r]));
  }
  rs.check();
  return rs;
}

std::string write_csv(const ResultSet& rs) {
  auto field = [](const Value& v) -> std::string {
    if (!v) return "NULL";
    const auto& s = *v;
    if (s.find_first_of(",\"\r\n") == std::string::npos && s != "NULL") return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  };
  std::string out;
  for (std::size_t i = 0; i < rs.columns.size(); ++i) out += (i ? "," : "") + field(rs.columns[i]);
  out += "\n";
  for (const auto& row : rs.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + field(row[i]);
    out += "\n";
  }
  return out;
}

// --- EX / ESX ---------------------------------------------------------------

namespace {

std::vector<Row> canonical_rows(const ResultSet& rs) {
  std::vector<Row> rows;
  rows.reserve(rs.rows.size());
  for (const auto& r : rs.rows) {
    Row c;
    c.reserve(r.size());
    for (const auto& v : r) c.push_back(canonical_value(v));
    rows.push_back(std::move(c));
  }
  return rows;
}

std::vector<Value> column_signature(const std::vector<Row>& rows, std::size_t col) {
  std::vector<Value> sig;
  sig.reserve(rows.size());
  for (const auto& r : rows) sig.push_back(r[col]);
  std::sort(sig.begin(), sig.end());
  return sig;
}

// Finds an injective map g-column -> f-column under which the projected rows
// of f equal g's rows as multisets.
bool find_mapping(const ResultSet& f, const ResultSet& g) {
  f.check();
  g.check();
  if (g.columns.size() > f.columns.size() || f.rows.size() != g.rows.size()) return false;
  const auto fr = canonical_rows(f);
  auto gr = canonical_rows(g);
  std::sort(gr.begin(), gr.end());

  const std::size_t nf = f.columns.size(), ng = g.columns.size();
  std::vector<std::vector<Value>> fsig(nf), gsig(ng);
  for (std::size_t i = 0; i < nf; ++i) fsig[i] = column_signature(fr, i);
  for (std::size_t j = 0; j < ng; ++j) gsig[j] = column_signature(gr, j);
  std::vector<std::vector<std::size_t>> candidates(ng);
  for (std::size_t j = 0; j < ng; ++j) {
    for (std::size_t i = 0; i < nf; ++i)
      if (fsig[i] == gsig[j]) candidates[j].push_back(i);
    if (candidates[j].empty()) return false;
  }

  std::vector<std::size_t> map(ng);
  std::vector<bool> used(nf, false);
  std::vector<Row> projected(fr.size(), Row(ng));
  auto leaf = [&] {
    for (std::size_t r = 0; r < fr.size(); ++r)
      for (std::size_t j = 0; j < ng; ++j) projected[r][j] = fr[r][map[j]];
    std::sort(projected.begin(), projected.end());
    return projected == gr;
  };
  auto search = [&](auto&& self, std::size_t j) -> bool {
    if (j == ng) return leaf();
    for (auto i : candidates[j]) {
      if (used[i]) continue;
      used[i] = true;
      map[j] = i;
      if (self(self, j + 1)) return true;
      used[i] = false;
    }
    return false;
  };
  return search(search, 0);
}

}  // namespace

bool execution_match(const ResultSet& f, const ResultSet& g) {
  if (f.columns.size() != g.columns.size()) return false;
  return find_mapping(f, g);
}

bool subset_match(const ResultSet& f, const ResultSet& g) { return find_mapping(f, g); }

// --- footprint --------------------------------------------------------------

namespace {

enum class Tok { ident, quoted_ident, string, number, symbol };

struct Token {
  Tok kind;
  std::string text;  // identifiers lowercased
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<Token> tokenize(const std::string& sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = sql.size();
  while (i < n) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const auto e = sql.find("*/", i + 2);
      if (e == std::string::npos) throw SqlParseError("unterminated comment");
      i = e + 2;
    } else if (c == '\'' || c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      std::string text;
      std::size_t j = i + 1;
      for (;; ++j) {
        if (j >= n) throw SqlParseError("unterminated quoted text starting at offset " + std::to_string(i));
        if (sql[j] == close) {
          if (close != ']' && j + 1 < n && sql[j + 1] == close) {
            text.push_back(close);
            ++j;
            continue;
          }
          break;
        }
        text.push_back(sql[j]);
      }
      out.push_back({c == '\'' ? Tok::string : Tok::quoted_ident, c == '\'' ? text : lower(text)});
      i = j + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '.')) ++j;
      out.push_back({Tok::number, sql.substr(i, j - i)});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80) {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '_' || sql[j] == '$' ||
                       static_cast<unsigned char>(sql[j]) >= 0x80))
        ++j;
      out.push_back({Tok::ident, lower(sql.substr(i, j - i))});
      i = j;
    } else {
      static const char* two[] = {"<=", ">=", "<>", "!=", "||", "=="};
      std::string sym(1, c);
      for (const char* t : two)
        if (sql.compare(i, 2, t) == 0) sym = t;
      out.push_back({Tok::symbol, sym});
      i += sym.size();
    }
  }
  return out;
}

const std::set<std::string>& reserved() {
  static const std::set<std::string> k = {
      "select", "from",  "where",  "and",    "or",     "not",      "like",   "in",     "is",      "null",
      "join",   "left",  "right",  "inner",  "outer",  "full",     "cross",  "on",     "as",      "group",
      "by",     "order", "having", "limit",  "offset", "distinct", "all",    "union",  "case",    "when",
      "then",   "else",  "end",    "asc",    "desc",   "between",  "exists", "with",   "true",    "false",
      "create", "view",  "temp",   "temporary", "replace", "intersect", "except", "using", "natural", "over",
      "partition", "escape", "glob", "collate", "nulls", "first", "last", "interval", "recursive", "if",
      "unique", "primary", "key", "values", "default", "rows", "range", "current", "row", "preceding", "following",
      "unbounded", "filter", "within", "lateral", "straight_join"};
  return k;
}

bool is_word(const Token& t) { return t.kind == Tok::ident || t.kind == Tok::quoted_ident; }
bool is_kw(const Token& t, const char* kw) { return t.kind == Tok::ident && t.text == kw; }
bool is_name(const Token& t) {
  return t.kind == Tok::quoted_ident || (t.kind == Tok::ident && !reserved().count(t.text));
}

}  // namespace

SqlFootprint sql_footprint(const std::string& sql, const DatabaseModel* catalog) {
  const auto toks = tokenize(sql);
  SqlFootprint fp;
  if (toks.empty()) throw SqlParseError("empty SQL");
  const auto& head = toks.front();
  if (!(is_kw(head, "select") || is_kw(head, "with") || is_kw(head, "create") ||
        (head.kind == Tok::symbol && head.text == "(")))
    throw SqlParseError("expected a SELECT or CREATE VIEW statement");

  std::vector<bool> skip(toks.size(), false);  // positions that are not column references
  std::set<std::string> excluded;               // view and CTE names
  std::map<std::string, std::string> range;     // alias or table -> table
  std::set<std::string> column_aliases;

  std::size_t start = 0;
  if (is_kw(head, "create")) {
    std::size_t i = 1;
    while (i < toks.size() && !is_kw(toks[i], "view")) ++i;
    if (i + 1 >= toks.size()) throw SqlParseError("expected CREATE VIEW <name> AS");
    excluded.insert(toks[i + 1].text);
    while (i < toks.size() && !is_kw(toks[i], "as")) skip[i++] = true;
    start = i;
  }

  for (std::size_t i = start; i < toks.size(); ++i) {
    const auto& t = toks[i];
    // CTE: name AS (
    if (is_word(t) && i + 2 < toks.size() && is_kw(toks[i + 1], "as") && toks[i + 2].text == "(" &&
        i > 0 && (is_kw(toks[i - 1], "with") || is_kw(toks[i - 1], "recursive") || toks[i - 1].text == ",")) {
      excluded.insert(t.text);
      skip[i] = true;
      continue;
    }
    if (is_kw(t, "as") && i + 1 < toks.size() && is_word(toks[i + 1])) {
      skip[i + 1] = true;
      column_aliases.insert(toks[i + 1].text);
    }
    if (!(is_kw(t, "from") || is_kw(t, "join"))) continue;
    const bool list = is_kw(t, "from");
    std::size_t j = i + 1;
    while (j < toks.size()) {
      if (!is_word(toks[j])) break;  // derived table or garbage
      std::string name = toks[j].text;
      skip[j] = true;
      while (j + 2 < toks.size() && toks[j + 1].text == "." && is_word(toks[j + 2])) {
        j += 2;
        name = toks[j].text;
        skip[j] = true;
      }
      ++j;
      std::string alias = name;
      if (j < toks.size() && is_kw(toks[j], "as") && j + 1 < toks.size() && is_word(toks[j + 1])) {
        alias = toks[j + 1].text;
        skip[j + 1] = true;
        j += 2;
      } else if (j < toks.size() && is_name(toks[j])) {
        alias = toks[j].text;
        skip[j] = true;
        ++j;
      }
      if (!excluded.count(name)) {
        fp.tables.insert(name);
        range[alias] = name;
        range[name] = name;
      } else {
        range[alias] = "";  // known, but not a base table
      }
      if (list && j < toks.size() && toks[j].text == ",") {
        ++j;
        continue;
      }
      break;
    }
  }
  // Alias names from AS are not column aliases when they name a range.
  for (const auto& [alias, _] : range) column_aliases.erase(alias);

  auto resolve_unqualified = [&](const std::string& col) -> std::optional<std::string> {
    if (fp.tables.size() == 1) {
      const auto& t = *fp.tables.begin();
      if (catalog) {
        for (const auto& def : catalog->tables)
          if (lower(def.name) == t) {
            for (const auto& a : def.attributes)
              if (lower(a.name) == col) return t;
            return std::nullopt;
          }
      }
      return t;
    }
    if (!catalog) return std::nullopt;
    std::optional<std::string> found;
    for (const auto& def : catalog->tables) {
      const auto t = lower(def.name);
      if (!fp.tables.count(t)) continue;
      for (const auto& a : def.attributes)
        if (lower(a.name) == col) {
          if (found) return std::nullopt;
          found = t;
        }
    }
    return found;
  };

  for (std::size_t i = start; i < toks.size(); ++i) {
    if (skip[i] || !is_word(toks[i])) continue;
    const bool qualified = i + 2 < toks.size() && toks[i + 1].text == "." && toks[i + 1].kind == Tok::symbol;
    if (qualified) {
      const auto& col = toks[i + 2];
      skip[i + 2] = true;
      if (!is_word(col)) continue;  // t.*
      if (i + 3 < toks.size() && toks[i + 3].text == "(") continue;
      auto it = range.find(toks[i].text);
      if (it != range.end() && !it->second.empty()) fp.attributes.insert(it->second + "." + col.text);
      continue;
    }
    if (i > 0 && toks[i - 1].text == ".") continue;
    if (i + 1 < toks.size() && toks[i + 1].text == "(") continue;  // function call
    const auto& name = toks[i].text;
    if (toks[i].kind == Tok::ident && reserved().count(name)) continue;
    if (range.count(name) || column_aliases.count(name) || excluded.count(name)) continue;
    if (auto t = resolve_unqualified(name)) fp.attributes.insert(*t + "." + name);
  }
  return fp;
}

Coverage coverage(const SqlFootprint& f, const SqlFootprint& g) {
  if (g.tables.empty()) throw Error("coverage: ground-truth footprint has no tables");
  auto frac = [](const std::set<std::string>& got, const std::set<std::string>& want) {
    if (want.empty()) return 1.0;
    std::size_t hit = 0;
    for (const auto& w : want) hit += got.count(w);
    return static_cast<double>(hit) / static_cast<double>(want.size());
  };
  return {frac(f.tables, g.tables), frac(f.attributes, g.attributes)};
}

}  // namespace pathsql
