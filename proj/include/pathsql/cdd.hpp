#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pathsql/benchmark.hpp"
#include "pathsql/executor.hpp"
#include "pathsql/model.hpp"

namespace pathsql {

// The running example: schema.sql, dbm/, seed.sql, questions.jsonl.
struct CddFixture {
  std::filesystem::path dir;
  DatabaseModel model;
  std::string ddl;
  std::string seed_sql;
  std::vector<DatasetItem> questions;
};

std::filesystem::path default_data_dir();
CddFixture load_cdd(const std::filesystem::path& dir = default_data_dir() / "cdd");

// In-memory SQLite database holding `model`'s tables plus the seed rows.
std::unique_ptr<SqliteExecutor> make_seeded_engine(const DatabaseModel& model, const std::string& seed_sql);

}  // namespace pathsql
