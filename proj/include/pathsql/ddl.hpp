#pragma once

#include <string>
#include <string_view>

#include "pathsql/model.hpp"

namespace pathsql {

// Parses the CREATE TABLE subset: column definitions with optional COMMENT,
// PRIMARY KEY, FOREIGN KEY ... REFERENCES and a trailing table COMMENT.
// COMMENT text may be quoted ('...') or, as in hand-written schema dumps,
// unquoted up to the end of the line. Throws DdlError with line/column.
//
// The result carries tables and constraints only. Foreign keys whose columns
// equal the referencing table's primary key are one-to-one.
DatabaseModel parse_ddl(std::string_view ddl_text);

struct DdlEmitOptions {
  bool comments = true;  // false produces plain DDL an SQL engine accepts
};

std::string emit_ddl(const DatabaseModel& model, const DdlEmitOptions& options = {});

FkKind infer_fk_kind(const TableDef& from, const std::vector<std::string>& fk_columns);

}  // namespace pathsql
