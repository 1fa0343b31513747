#include "pathsql/cdd.hpp"

#include "pathsql/dbm_json.hpp"
#include "pathsql/ddl.hpp"

#ifndef PATHSQL_DATA_DIR
#define PATHSQL_DATA_DIR "data"
#endif

namespace pathsql {

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("PATHSQL_DATA_DIR")) return env;
  return PATHSQL_DATA_DIR;
}

CddFixture load_cdd(const std::filesystem::path& dir) {
  CddFixture f;
  f.dir = dir;
  f.ddl = read_text_file(dir / "schema.sql");
  f.model = load_model(dir / "schema.sql", dir / "dbm").model;
  f.seed_sql = read_text_file(dir / "seed.sql");
  f.questions = read_dataset_jsonl(read_text_file(dir / "questions.jsonl"));
  return f;
}

std::unique_ptr<SqliteExecutor> make_seeded_engine(const DatabaseModel& model, const std::string& seed_sql) {
  auto exec = std::make_unique<SqliteExecutor>(":memory:");
  exec->exec(emit_ddl(model, {.comments = false}));
  exec->exec(seed_sql);
  return exec;
}

}  // namespace pathsql
