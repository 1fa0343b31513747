#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pathsql/model.hpp"

namespace pathsql {

using Value = std::optional<std::string>;  // nullopt is SQL NULL
using Row = std::vector<Value>;

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<Row> rows;

  // Throws if a row's arity differs from the column count.
  void check() const;
};

// Numeric text in a canonical form ("1.0" and "1" agree); other text as is.
Value canonical_value(const Value& v);

// RFC 4180 with a header row. An unquoted NULL field is SQL NULL.
ResultSet read_csv(const std::string& text);
std::string write_csv(const ResultSet& rs);

// EX: equal arity and some column permutation of f has g's row multiset.
bool execution_match(const ResultSet& f, const ResultSet& g);
// ESX: some injection of g's columns into f's columns makes the projection of
// f (in g's column order) equal g as row multisets.
bool subset_match(const ResultSet& f, const ResultSet& g);

struct SqlFootprint {
  std::set<std::string> tables;      // lowercase
  std::set<std::string> attributes;  // "table.column", lowercase
};

// Tables from FROM/JOIN clauses, aliases resolved, qualified columns.
// Unqualified columns resolve when exactly one table (or, given a catalog,
// exactly one table in the query) has them. Throws SqlParseError.
SqlFootprint sql_footprint(const std::string& sql, const DatabaseModel* catalog = nullptr);

struct Coverage {
  double cover_t = 0;
  double cover_a = 0;
};

// Fractions of g's tables/attributes that f mentions. Throws when g has no
// tables; cover_a is 1 when g mentions no attributes.
Coverage coverage(const SqlFootprint& f, const SqlFootprint& g);

}  // namespace pathsql
