#pragma once

#include <functional>
#include <memory>
#include <string>

#include "pathsql/eval.hpp"

struct sqlite3;

namespace pathsql {

class Executor {
 public:
  virtual ~Executor() = default;
  // Runs one or more statements, discarding results.
  virtual void exec(const std::string& script) = 0;
  virtual ResultSet query(const std::string& sql) = 0;
  // Makes a CREATE VIEW statement available to later queries on this executor
  // without persisting it.
  virtual void install_view(const std::string& view_name, const std::string& create_view_sql) = 0;
};

using ExecutorFactory = std::function<std::unique_ptr<Executor>()>;

// One connection. Views are installed as TEMP views, so file databases are
// left untouched; give each worker its own instance.
class SqliteExecutor : public Executor {
 public:
  explicit SqliteExecutor(const std::string& path = ":memory:", bool read_only = false);
  ~SqliteExecutor() override;
  SqliteExecutor(const SqliteExecutor&) = delete;
  SqliteExecutor& operator=(const SqliteExecutor&) = delete;

  void exec(const std::string& script) override;
  ResultSet query(const std::string& sql) override;
  void install_view(const std::string& view_name, const std::string& create_view_sql) override;

 private:
  sqlite3* db_ = nullptr;
};

}  // namespace pathsql
