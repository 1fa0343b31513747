#include "pathsql/dbm_json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pathsql/ddl.hpp"
#include "pathsql/error.hpp"

namespace pathsql {

using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kNameField = "NameField";
constexpr const char* kDescriptionField = "DescriptionField";

ojson parse_json(const std::string& text, const std::string& what) {
  try {
    return ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw DbmError(what + ": invalid JSON: " + e.what());
  }
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

const ojson& require(const ojson& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw DbmError(where + ": missing required key \"" + key + "\"");
  return obj.at(key);
}

std::vector<std::string> string_list(const ojson& v, const std::string& where) {
  if (!v.is_array()) throw DbmError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw DbmError(where + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::string as_text(const ojson& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

struct TableFiles {
  ojson descriptions = ojson::object();
  ojson types = ojson::object();
};

TableFiles table_files(const std::string& name, const ojson& entry, const DbmDocuments& docs,
                       std::vector<std::string>& warnings) {
  static const std::set<std::string> known = {"type", "primary", "path", "path_to_types", "descriptions", "types"};
  for (const auto& [key, _] : entry.items())
    if (!known.count(key)) warnings.push_back("table " + name + ": ignoring unknown key \"" + key + "\"");

  auto load_file = [&](const char* key) -> ojson {
    if (!entry.contains(key)) return ojson::object();
    const auto path = as_text(entry.at(key));
    if (path.empty()) return ojson::object();
    auto it = docs.files.find(path);
    if (it == docs.files.end()) throw DbmError("table " + name + ": referenced file '" + path + "' not found");
    return parse_json(it->second, path);
  };

  TableFiles files;
  files.descriptions = entry.contains("descriptions") ? entry.at("descriptions") : load_file("path");
  files.types = entry.contains("types") ? entry.at("types") : load_file("path_to_types");
  if (!files.descriptions.is_object()) throw DbmError("table " + name + ": descriptions must be an object");
  if (!files.types.is_object()) throw DbmError("table " + name + ": types must be an object");
  return files;
}

void apply_table_entry(const std::string& name, const ojson& entry, const DbmDocuments& docs,
                       DatabaseModel& model, std::vector<std::string>& warnings) {
  if (!entry.is_object()) throw DbmError("table " + name + ": entry must be an object");
  auto files = table_files(name, entry, docs, warnings);

  if (files.descriptions.contains(kNameField) && as_text(files.descriptions.at(kNameField)) != name)
    warnings.push_back("table " + name + ": NameField is '" + as_text(files.descriptions.at(kNameField)) + "'");

  TableDef* table = model.find_table(name);
  const bool fresh = table == nullptr;
  if (fresh) {
    model.tables.push_back(TableDef{name, {}, {}, {}});
    table = &model.tables.back();
    table->primary_key = string_list(require(entry, "primary", "table " + name), "table " + name + " primary");
  } else if (entry.contains("primary")) {
    const auto pk = string_list(entry.at("primary"), "table " + name + " primary");
    if (pk != table->primary_key)
      warnings.push_back("table " + name + ": primary key differs from DDL; keeping DDL");
  }

  if (table->description.empty() && files.descriptions.contains(kDescriptionField))
    table->description = trim(as_text(files.descriptions.at(kDescriptionField)));

  auto attr_for = [&](const std::string& attr) -> AttributeDef& {
    for (auto& a : table->attributes)
      if (a.name == attr) return a;
    if (!fresh) warnings.push_back("table " + name + ": attribute '" + attr + "' not in DDL; adding it");
    table->attributes.push_back(AttributeDef{attr, {}, {}, {}});
    return table->attributes.back();
  };

  for (const auto& [key, value] : files.descriptions.items()) {
    if (key == kNameField || key == kDescriptionField) continue;
    auto& a = attr_for(key);
    if (a.description.empty()) a.description = trim(as_text(value));
  }
  for (const auto& [key, value] : files.types.items()) {
    if (key == kNameField || key == kDescriptionField) continue;
    auto& a = attr_for(key);
    if (value.is_object()) {
      if (a.sql_type.empty() && value.contains("type")) a.sql_type = as_text(value.at("type"));
      if (a.nullability_default.empty() && value.contains("default"))
        a.nullability_default = as_text(value.at("default"));
    } else if (a.sql_type.empty()) {
      a.sql_type = as_text(value);
    }
  }
}

std::pair<std::string, std::string> split_pair_key(const std::string& key) {
  const auto comma = key.find(',');
  if (comma == std::string::npos) throw DbmError("relationship key '" + key + "' must look like \"A, B\"");
  return {trim(key.substr(0, comma)), trim(key.substr(comma + 1))};
}

void apply_relationship(const std::string& key, const ojson& entry, DatabaseModel& model,
                        std::vector<std::string>& warnings) {
  const std::string where = "relationship \"" + key + "\"";
  static const std::set<std::string> known = {"type", "description", "sqlrelation", "foreign_relation", "m2m_relation"};
  for (const auto& [k, _] : entry.items())
    if (!known.count(k)) warnings.push_back(where + ": ignoring unknown key \"" + k + "\"");

  const auto [first, second] = split_pair_key(key);
  const auto relation = as_text(require(entry, "sqlrelation", where));
  if (relation == "M:1" || relation == "1:1") {
    const auto& fr = require(entry, "foreign_relation", where);
    FkConstraint fk;
    fk.from_table = first;
    fk.fk_columns = string_list(require(fr, "FOREIGN", where), where + " FOREIGN");
    fk.to_table = fr.contains("foreign_relation_ref_table") ? as_text(fr.at("foreign_relation_ref_table")) : second;
    fk.pk_columns = string_list(require(fr, "foreign_relation_ref_table_keys", where), where + " keys");
    fk.kind = relation == "1:1" ? FkKind::one_to_one : FkKind::many_to_one;
    if (fk.fk_columns.empty() || fk.fk_columns.size() != fk.pk_columns.size())
      throw DbmError(where + ": key column lists are empty or differ in length");
    for (const auto& existing : model.constraints)
      if (existing.from_table == fk.from_table && existing.to_table == fk.to_table &&
          existing.fk_columns == fk.fk_columns && existing.pk_columns == fk.pk_columns)
        return;
    model.constraints.push_back(std::move(fk));
  } else if (relation == "M:M") {
    const auto& m = require(entry, "m2m_relation", where);
    M2MTriplet t;
    t.join_table = as_text(require(m, "m2m_middle_table", where));
    t.left = first;
    t.right = second;
    if (m.contains("m2m_side_tables")) {
      auto sides = string_list(m.at("m2m_side_tables"), where + " m2m_side_tables");
      std::sort(sides.begin(), sides.end());
      std::vector<std::string> from_key = {first, second};
      std::sort(from_key.begin(), from_key.end());
      if (sides != from_key) throw DbmError(where + ": m2m_side_tables do not match the entry key");
    }
    if (std::find(model.m2m.begin(), model.m2m.end(), t) == model.m2m.end()) model.m2m.push_back(std::move(t));
  } else {
    throw DbmError(where + ": unknown sqlrelation '" + relation + "'");
  }
}

void collect_children(const std::string& parent, const ojson& value, TreePattern& p, int depth, int& max_depth,
                      const std::string& where) {
  max_depth = std::max(max_depth, depth);
  if (value.is_null()) return;
  if (value.is_string()) {
    p.children[parent].push_back(value.get<std::string>());
    max_depth = std::max(max_depth, depth + 1);
    return;
  }
  if (value.is_array()) {
    for (const auto& e : value) {
      if (e.is_string()) {
        p.children[parent].push_back(e.get<std::string>());
        max_depth = std::max(max_depth, depth + 1);
      } else if (e.is_object()) {
        collect_children(parent, e, p, depth, max_depth, where);
      } else {
        throw DbmError(where + ": pattern children must be names or objects");
      }
    }
    return;
  }
  if (value.is_object()) {
    for (const auto& [child, grand] : value.items()) {
      p.children[parent].push_back(child);
      collect_children(child, grand, p, depth + 1, max_depth, where);
    }
    return;
  }
  throw DbmError(where + ": pattern children must be names or objects");
}

TreePattern parse_pattern(const ojson& obj, std::vector<std::string>& warnings) {
  if (!obj.is_object()) throw DbmError("pattern entries must be objects");
  TreePattern p;
  p.root = as_text(require(obj, kNameField, "pattern"));
  const std::string where = "pattern " + p.root;
  std::optional<PatternKind> kind;
  int max_depth = 0;
  for (const auto& [key, value] : obj.items()) {
    if (key == kNameField || key == "description") continue;
    if (key == "type") {
      std::string k = as_text(value);
      std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
      if (k == "star") kind = PatternKind::star;
      else if (k == "snowflake") kind = PatternKind::snowflake;
      else throw DbmError(where + ": unknown pattern type '" + as_text(value) + "'");
      continue;
    }
    p.children[p.root].push_back(key);
    collect_children(key, value, p, 1, max_depth, where);
  }
  (void)warnings;
  p.kind = kind.value_or(max_depth > 1 ? PatternKind::snowflake : PatternKind::star);
  return p;
}

void check_references(const DatabaseModel& model) {
  auto need = [&](const std::string& t, const std::string& where) {
    if (!model.has_table(t)) throw DbmError(where + ": dangling table reference '" + t + "'");
  };
  for (const auto& c : model.constraints) {
    need(c.from_table, "relationship " + c.from_table + " -> " + c.to_table);
    need(c.to_table, "relationship " + c.from_table + " -> " + c.to_table);
  }
  for (const auto& m : model.m2m)
    for (const auto* t : {&m.left, &m.right, &m.join_table}) need(*t, "m2m " + m.join_table);
  for (const auto& l : model.lookup) need(l, "lookup");
  for (const auto& p : model.patterns) {
    need(p.root, "pattern " + p.root);
    for (const auto& [parent, kids] : p.children) {
      need(parent, "pattern " + p.root);
      for (const auto& k : kids) need(k, "pattern " + p.root);
    }
  }
}

ojson relationships_json(const DatabaseModel& model) {
  ojson rel = ojson::object();
  for (const auto& c : model.constraints) {
    std::string key = c.from_table + ", " + c.to_table;
    // Parallel constraints between the same pair need distinct keys.
    for (int n = 2; rel.contains(key); ++n) key = c.from_table + ", " + c.to_table + " #" + std::to_string(n);
    rel[key] = {{"type", "Relationships"},
                {"sqlrelation", to_string(c.kind)},
                {"foreign_relation",
                 {{"FOREIGN", c.fk_columns},
                  {"foreign_relation_ref_table", c.to_table},
                  {"foreign_relation_ref_table_keys", c.pk_columns}}}};
  }
  for (const auto& m : model.m2m) {
    rel[m.left + ", " + m.right] = {
        {"type", "Relationships"},
        {"sqlrelation", "M:M"},
        {"m2m_relation",
         {{"m2m_middle_table", m.join_table},
          {"m2m_side_tables", {m.left, m.right}},
          {"m2m_relation_one", {m.join_table, m.left}},
          {"m2m_relation_two", {m.join_table, m.right}}}}};
  }
  return rel;
}

ojson pattern_children_json(const TreePattern& p, const std::string& node) {
  const auto& kids = p.children_of(node);
  bool all_leaves = std::all_of(kids.begin(), kids.end(), [&](const std::string& k) { return p.is_leaf(k); });
  if (all_leaves) return ojson(kids);
  ojson obj = ojson::object();
  for (const auto& k : kids) obj[k] = p.is_leaf(k) ? ojson(nullptr) : pattern_children_json(p, k);
  return obj;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DbmLoadResult load_dbm(const DbmDocuments& docs, const DatabaseModel& base) {
  DbmLoadResult result;
  result.model = base;
  auto& model = result.model;
  auto& warnings = result.warnings;

  if (!trim(docs.tables).empty()) {
    const auto tables = parse_json(docs.tables, "tables");
    if (!tables.is_object()) throw DbmError("tables: expected an object keyed by table name");
    for (const auto& [name, entry] : tables.items()) apply_table_entry(name, entry, docs, model, warnings);
  }
  if (!trim(docs.relationships).empty()) {
    const auto rel = parse_json(docs.relationships, "relationships");
    if (!rel.is_object()) throw DbmError("relationships: expected an object");
    for (const auto& [key, entry] : rel.items()) apply_relationship(key, entry, model, warnings);
  }
  if (!trim(docs.patterns).empty()) {
    const auto pat = parse_json(docs.patterns, "patterns");
    if (!pat.is_object()) throw DbmError("patterns: expected an object");
    for (const auto& [key, value] : pat.items()) {
      if (key == "lookup") {
        for (auto& l : string_list(value, "patterns lookup"))
          if (!model.is_lookup(l)) model.lookup.push_back(l);
      } else if (key == "patterns") {
        if (!value.is_array()) throw DbmError("patterns: \"patterns\" must be an array");
        for (const auto& p : value) model.patterns.push_back(parse_pattern(p, warnings));
      } else {
        warnings.push_back("patterns: ignoring unknown key \"" + key + "\"");
      }
    }
  }
  check_references(model);
  return result;
}

DbmDocuments read_dbm_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DbmError("DBM directory '" + dir.string() + "' does not exist");
  DbmDocuments docs;
  auto maybe = [&](const char* file) {
    const auto p = dir / file;
    return std::filesystem::exists(p) ? read_text_file(p) : std::string{};
  };
  docs.tables = maybe("tables.json");
  docs.relationships = maybe("relationships.json");
  docs.patterns = maybe("patterns.json");
  if (!trim(docs.tables).empty()) {
    const auto tables = parse_json(docs.tables, "tables.json");
    for (const auto& [name, entry] : tables.items()) {
      if (!entry.is_object()) continue;
      for (const char* key : {"path", "path_to_types"}) {
        if (!entry.contains(key)) continue;
        const auto rel = as_text(entry.at(key));
        if (rel.empty() || docs.files.count(rel)) continue;
        const auto p = dir / rel;
        if (std::filesystem::exists(p)) docs.files[rel] = read_text_file(p);
      }
    }
  }
  return docs;
}

DbmLoadResult load_model(const std::optional<std::filesystem::path>& ddl_file,
                         const std::optional<std::filesystem::path>& dbm_dir) {
  if (!ddl_file && !dbm_dir) throw Error("no model given: pass a DDL file and/or a DBM directory");
  DatabaseModel base;
  if (ddl_file) base = parse_ddl(read_text_file(*ddl_file));
  if (!dbm_dir) return {std::move(base), {}};
  return load_dbm(read_dbm_dir(*dbm_dir), base);
}

DbmDocuments to_documents(const DatabaseModel& model) {
  DbmDocuments docs;
  ojson tables = ojson::object();
  for (const auto& t : model.tables) {
    ojson desc = ojson::object();
    desc[kNameField] = t.name;
    desc[kDescriptionField] = t.description;
    ojson types = ojson::object();
    for (const auto& a : t.attributes) {
      desc[a.name] = a.description;
      types[a.name] = {{"type", a.sql_type}, {"default", a.nullability_default}};
    }
    tables[t.name] = {{"type", "ManagedObject"}, {"primary", t.primary_key}, {"descriptions", desc}, {"types", types}};
  }
  docs.tables = tables.dump(2);
  docs.relationships = relationships_json(model).dump(2);

  ojson pat = ojson::object();
  pat["lookup"] = model.lookup;
  pat["patterns"] = ojson::array();
  for (const auto& p : model.patterns) {
    ojson obj = ojson::object();
    obj[kNameField] = p.root;
    obj["type"] = to_string(p.kind);
    for (const auto& child : p.children_of(p.root))
      obj[child] = p.is_leaf(child) ? ojson::array() : pattern_children_json(p, child);
    pat["patterns"].push_back(obj);
  }
  docs.patterns = pat.dump(2);
  return docs;
}

}  // namespace pathsql
