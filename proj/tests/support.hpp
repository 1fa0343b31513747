#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "pathsql/cdd.hpp"
#include "pathsql/dbm_json.hpp"
#include "pathsql/llm.hpp"

namespace testing {

inline std::filesystem::path test_data(const std::string& rel = {}) {
  std::filesystem::path p = PATHSQL_TEST_DATA;
  return rel.empty() ? p : p / rel;
}

inline std::filesystem::path cdd_dir() { return pathsql::default_data_dir() / "cdd"; }

inline const pathsql::CddFixture& cdd() {
  static const pathsql::CddFixture f = pathsql::load_cdd(cdd_dir());
  return f;
}

inline const pathsql::DatabaseModel& financial() {
  static const pathsql::DatabaseModel m = pathsql::load_model(std::nullopt, test_data("financial")).model;
  return m;
}

inline std::string slurp(const std::filesystem::path& p) { return pathsql::read_text_file(p); }

inline std::unique_ptr<pathsql::LlmClient> cdd_mock(int q) {
  return pathsql::load_mock(cdd_dir() / "mock" / ("q" + std::to_string(q) + ".script.json"));
}

inline std::string fenced(const std::string& sql) { return "```sql\n" + sql + "\n```"; }

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path = std::filesystem::temp_directory_path() / ("pathsql-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testing
