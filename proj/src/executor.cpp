#include "pathsql/executor.hpp"

#include <sqlite3.h>

#include <cctype>
#include <cstdio>

#include "pathsql/error.hpp"

namespace pathsql {

SqliteExecutor::SqliteExecutor(const std::string& path, bool read_only) {
  const int flags = read_only ? SQLITE_OPEN_READONLY : (SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  if (sqlite3_open_v2(path.c_str(), &db_, flags | SQLITE_OPEN_NOMUTEX, nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error("sqlite: cannot open '" + path + "': " + msg);
  }
}

SqliteExecutor::~SqliteExecutor() { sqlite3_close(db_); }

void SqliteExecutor::exec(const std::string& script) {
  char* err = nullptr;
  if (sqlite3_exec(db_, script.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error("sqlite: " + msg);
  }
}

ResultSet SqliteExecutor::query(const std::string& sql) {
  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  if (sqlite3_prepare_v2(db_, sql.c_str(), static_cast<int>(sql.size()), &stmt, &tail) != SQLITE_OK)
    throw Error(std::string("sqlite: ") + sqlite3_errmsg(db_));
  if (!stmt) throw Error("sqlite: no statement in query");
  ResultSet rs;
  const int ncol = sqlite3_column_count(stmt);
  for (int i = 0; i < ncol; ++i) rs.columns.emplace_back(sqlite3_column_name(stmt, i));
  int rc;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    Row row;
    row.reserve(static_cast<std::size_t>(ncol));
    for (int i = 0; i < ncol; ++i) {
      switch (sqlite3_column_type(stmt, i)) {
        case SQLITE_NULL:
          row.emplace_back(std::nullopt);
          break;
        case SQLITE_INTEGER:
          row.emplace_back(std::to_string(sqlite3_column_int64(stmt, i)));
          break;
        case SQLITE_FLOAT: {
          char buf[40];
          std::snprintf(buf, sizeof buf, "%.17g", sqlite3_column_double(stmt, i));
          row.emplace_back(buf);
          break;
        }
        default: {
          const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, i));
          row.emplace_back(std::string(p ? p : "", static_cast<std::size_t>(sqlite3_column_bytes(stmt, i))));
        }
      }
    }
    rs.rows.push_back(std::move(row));
  }
  std::string err = rc == SQLITE_DONE ? "" : sqlite3_errmsg(db_);
  sqlite3_finalize(stmt);
  if (!err.empty()) throw Error("sqlite: " + err);
  return rs;
}

void SqliteExecutor::install_view(const std::string& view_name, const std::string& create_view_sql) {
  // "create view" -> "create temp view", case-insensitively, first occurrence.
  std::string lowered = create_view_sql;
  for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto pos = lowered.find("create view");
  if (pos == std::string::npos) throw Error("install_view: not a CREATE VIEW statement");
  std::string sql = create_view_sql;
  sql.replace(pos, 11, "create temp view");
  exec("drop view if exists temp." + view_name + ";");
  exec(sql);
}

}  // namespace pathsql
