#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pathsql/model.hpp"
#include "pathsql/retrieve.hpp"
#include "pathsql/solver.hpp"

namespace pathsql {

// One appearance of a table in the view's FROM clause.
struct TableRef {
  std::string table;
  int occurrence = 1;

  // SQL range variable: the table name, or "<table>_<k>" for k > 1.
  std::string sql_name() const;
  bool operator==(const TableRef&) const = default;
};

enum class JoinKind { inner, left };

struct ColumnRef {
  TableRef ref;
  std::string column;
  bool operator==(const ColumnRef&) const = default;
};

struct JoinStep {
  TableRef target;
  TableRef source;  // already introduced
  JoinKind kind = JoinKind::inner;
  FkConstraint fk;
  std::vector<std::pair<ColumnRef, ColumnRef>> on;  // (referenced key side, FK side)
};

struct Projection {
  TableRef ref;
  std::string attribute;
  std::string alias;
};

struct ViewPlan {
  TableRef base;
  std::vector<JoinStep> joins;
  std::vector<Projection> projections;
};

struct ViewOptions {
  std::size_t alias_max_len = 64;
};

// table_attr, "_k" appended for occurrence k > 1, lowercase. Longer than
// max_len: cut and suffixed with a hash of the full alias.
std::string make_alias(const std::string& table, int occurrence, const std::string& attribute,
                       std::size_t max_len = 64);

// Core walk joins are inner and come first; each branch is a chain of left
// joins hung off the first occurrence of its root. Projections follow join
// order: for every occurrence of a relevant table, its key columns and then
// its relevant attributes.
ViewPlan plan_view(const DecomposedPlan& plan, const RelevanceSet& relta, const DatabaseModel& model,
                   const ViewOptions& options = {});
ViewPlan plan_view(const Walk& walk, const RelevanceSet& relta, const DatabaseModel& model,
                   const ViewOptions& options = {});

enum class Dialect { ansi, mysql };

Dialect parse_dialect(const std::string& name);

struct ViewSql {
  std::string view_name;
  std::string sql_text;
};

ViewSql emit_view_sql(const ViewPlan& plan, const std::string& view_name = "v", Dialect dialect = Dialect::ansi);

}  // namespace pathsql
