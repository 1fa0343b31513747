#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pathsql {

struct AttributeDef {
  std::string name;
  std::string sql_type;
  std::string nullability_default;  // e.g. "NOT NULL", "DEFAULT NULL"
  std::string description;

  bool operator==(const AttributeDef&) const = default;
};

struct TableDef {
  std::string name;
  std::vector<AttributeDef> attributes;
  std::vector<std::string> primary_key;
  std::string description;

  const AttributeDef* find_attribute(const std::string& attr) const;
  bool has_attribute(const std::string& attr) const { return find_attribute(attr) != nullptr; }
  std::vector<std::string> attribute_names() const;

  bool operator==(const TableDef&) const = default;
};

enum class FkKind { one_to_one, many_to_one };

const char* to_string(FkKind kind);

// from_table.fk_columns references to_table.pk_columns, pairwise in order.
struct FkConstraint {
  std::string from_table;
  std::vector<std::string> fk_columns;
  std::string to_table;
  std::vector<std::string> pk_columns;
  FkKind kind = FkKind::many_to_one;

  bool connects(const std::string& a, const std::string& b) const {
    return (from_table == a && to_table == b) || (from_table == b && to_table == a);
  }
  // Ordering used for deterministic edge choice between parallel constraints.
  bool column_order_less(const FkConstraint& other) const;

  bool operator==(const FkConstraint&) const = default;
};

struct M2MTriplet {
  std::string left;
  std::string right;
  std::string join_table;

  bool operator==(const M2MTriplet&) const = default;
};

enum class PatternKind { star, snowflake };

const char* to_string(PatternKind kind);

struct TreePattern {
  PatternKind kind = PatternKind::star;
  std::string root;
  // parent -> ordered children. Leaves have no entry.
  std::map<std::string, std::vector<std::string>> children;

  const std::vector<std::string>& children_of(const std::string& table) const;
  bool is_leaf(const std::string& table) const { return children_of(table).empty(); }
  bool contains(const std::string& table) const;
  std::optional<std::string> parent_of(const std::string& table) const;
  // Pre-order, root first, children in declaration order.
  std::vector<std::string> preorder() const;
  std::vector<std::string> inner_tables() const;
  // Tables from the root's child down to `table` (root excluded). Empty if not inner.
  std::vector<std::string> branch_to(const std::string& table) const;

  bool operator==(const TreePattern&) const = default;
};

enum class Role : std::uint8_t {
  core = 1u << 0,
  star_root = 1u << 1,
  star_inner = 1u << 2,
  snowflake_root = 1u << 3,
  snowflake_inner = 1u << 4,
  lookup = 1u << 5,
  m2m_join = 1u << 6,
};

class RoleSet {
 public:
  RoleSet() = default;
  void add(Role r) { bits_ |= static_cast<std::uint8_t>(r); }
  bool has(Role r) const { return (bits_ & static_cast<std::uint8_t>(r)) != 0; }
  std::uint8_t bits() const { return bits_; }
  std::vector<std::string> names() const;
  bool operator==(const RoleSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

struct DatabaseModel {
  std::vector<TableDef> tables;  // declaration order
  std::vector<FkConstraint> constraints;
  std::vector<M2MTriplet> m2m;
  std::vector<std::string> lookup;
  std::vector<TreePattern> patterns;

  const TableDef* find_table(const std::string& name) const;
  TableDef* find_table(const std::string& name);
  const TableDef& table(const std::string& name) const;  // throws UnknownTable
  bool has_table(const std::string& name) const { return find_table(name) != nullptr; }
  std::vector<std::string> table_names() const;

  bool is_lookup(const std::string& name) const;
  const TreePattern* pattern_rooted_at(const std::string& root) const;
  // Pattern in which `name` is an inner (non-root) node.
  const TreePattern* pattern_containing_inner(const std::string& name) const;
  bool covered_by_constraint(const std::string& a, const std::string& b) const;

  // Structural equality: order of tables, constraints, patterns and lookups does not matter.
  bool structurally_equal(const DatabaseModel& other) const;
};

RoleSet classify_table(const DatabaseModel& model, const std::string& table);
bool is_core(const DatabaseModel& model, const std::string& table);
std::vector<std::string> core_tables(const DatabaseModel& model);

struct Diagnostic {
  std::string entity;
  std::string rule;
  std::string message;
};

std::vector<Diagnostic> validate_model(const DatabaseModel& model);

}  // namespace pathsql
