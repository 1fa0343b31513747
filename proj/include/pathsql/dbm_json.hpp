#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathsql/model.hpp"

namespace pathsql {

// The database model documents as they sit on disk.
//
//   tables         table entries keyed by table name. An entry either points
//                  at split files ("path" -> descriptions, "path_to_types" ->
//                  types) or carries them inline as "descriptions"/"types".
//   files          contents of the split files, keyed by the path string used
//                  in the table entries.
//   relationships  entries keyed "A, B" with "sqlrelation" M:1, 1:1 or M:M.
//   patterns       {"lookup": [...], "patterns": [ {"NameField": root,
//                  "type": "star"|"snowflake", child: [grandchildren] |
//                  {nested...}, ...} ]}
struct DbmDocuments {
  std::string tables;
  std::map<std::string, std::string> files;
  std::string relationships;
  std::string patterns;
};

struct DbmLoadResult {
  DatabaseModel model;
  std::vector<std::string> warnings;  // unknown keys and similar
};

// Builds a model from JSON documents. A non-empty `base` model (typically
// parsed from DDL) supplies tables and constraints; JSON table entries then
// only fill in descriptions and types that the base lacks.
DbmLoadResult load_dbm(const DbmDocuments& docs, const DatabaseModel& base = {});

// Reads tables.json, relationships.json, patterns.json (each optional) and
// every file referenced from tables.json, relative to `dir`.
DbmDocuments read_dbm_dir(const std::filesystem::path& dir);

// DDL file and/or DBM directory; at least one must be given.
DbmLoadResult load_model(const std::optional<std::filesystem::path>& ddl_file,
                         const std::optional<std::filesystem::path>& dbm_dir);

// Merged single-document rendering, accepted back by load_dbm.
DbmDocuments to_documents(const DatabaseModel& model);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace pathsql
