#include "pathsql/model.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "pathsql/error.hpp"

namespace pathsql {

const AttributeDef* TableDef::find_attribute(const std::string& attr) const {
  for (const auto& a : attributes)
    if (a.name == attr) return &a;
  return nullptr;
}

std::vector<std::string> TableDef::attribute_names() const {
  std::vector<std::string> out;
  out.reserve(attributes.size());
  for (const auto& a : attributes) out.push_back(a.name);
  return out;
}

const char* to_string(FkKind kind) {
  return kind == FkKind::one_to_one ? "1:1" : "M:1";
}

const char* to_string(PatternKind kind) {
  return kind == PatternKind::star ? "star" : "snowflake";
}

bool FkConstraint::column_order_less(const FkConstraint& other) const {
  return std::tie(fk_columns, pk_columns, from_table, to_table) <
         std::tie(other.fk_columns, other.pk_columns, other.from_table, other.to_table);
}

const std::vector<std::string>& TreePattern::children_of(const std::string& table) const {
  static const std::vector<std::string> none;
  auto it = children.find(table);
  return it == children.end() ? none : it->second;
}

bool TreePattern::contains(const std::string& table) const {
  if (table == root) return true;
  return parent_of(table).has_value();
}

std::optional<std::string> TreePattern::parent_of(const std::string& table) const {
  for (const auto& [parent, kids] : children)
    if (std::find(kids.begin(), kids.end(), table) != kids.end()) return parent;
  return std::nullopt;
}

std::vector<std::string> TreePattern::preorder() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::function<void(const std::string&)> visit = [&](const std::string& t) {
    if (!seen.insert(t).second) return;  // guards malformed (cyclic) input
    out.push_back(t);
    for (const auto& c : children_of(t)) visit(c);
  };
  visit(root);
  return out;
}

std::vector<std::string> TreePattern::inner_tables() const {
  auto all = preorder();
  if (!all.empty()) all.erase(all.begin());
  return all;
}

std::vector<std::string> TreePattern::branch_to(const std::string& table) const {
  std::vector<std::string> path;
  std::string cur = table;
  std::set<std::string> seen;
  while (cur != root) {
    if (!seen.insert(cur).second) return {};
    auto p = parent_of(cur);
    if (!p) return {};
    path.push_back(cur);
    cur = *p;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<std::string> RoleSet::names() const {
  static const std::pair<Role, const char*> all[] = {
      {Role::core, "core"},
      {Role::star_root, "star_root"},
      {Role::star_inner, "star_inner"},
      {Role::snowflake_root, "snowflake_root"},
      {Role::snowflake_inner, "snowflake_inner"},
      {Role::lookup, "lookup"},
      {Role::m2m_join, "m2m_join"},
  };
  std::vector<std::string> out;
  for (const auto& [role, name] : all)
    if (has(role)) out.emplace_back(name);
  return out;
}

const TableDef* DatabaseModel::find_table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

TableDef* DatabaseModel::find_table(const std::string& name) {
  for (auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

const TableDef& DatabaseModel::table(const std::string& name) const {
  const auto* t = find_table(name);
  if (!t) throw UnknownTable(name);
  return *t;
}

std::vector<std::string> DatabaseModel::table_names() const {
  std::vector<std::string> out;
  for (const auto& t : tables) out.push_back(t.name);
  return out;
}

bool DatabaseModel::is_lookup(const std::string& name) const {
  return std::find(lookup.begin(), lookup.end(), name) != lookup.end();
}

const TreePattern* DatabaseModel::pattern_rooted_at(const std::string& root) const {
  for (const auto& p : patterns)
    if (p.root == root) return &p;
  return nullptr;
}

const TreePattern* DatabaseModel::pattern_containing_inner(const std::string& name) const {
  for (const auto& p : patterns)
    if (p.root != name && p.parent_of(name)) return &p;
  return nullptr;
}

bool DatabaseModel::covered_by_constraint(const std::string& a, const std::string& b) const {
  return std::any_of(constraints.begin(), constraints.end(),
                     [&](const FkConstraint& c) { return c.connects(a, b); });
}

namespace {

template <class T, class Key>
std::vector<T> sorted_by(std::vector<T> v, Key key) {
  std::sort(v.begin(), v.end(), [&](const T& a, const T& b) { return key(a) < key(b); });
  return v;
}

}  // namespace

bool DatabaseModel::structurally_equal(const DatabaseModel& other) const {
  auto tkey = [](const TableDef& t) { return t.name; };
  auto ckey = [](const FkConstraint& c) {
    return std::tie(c.from_table, c.to_table, c.fk_columns, c.pk_columns);
  };
  auto mkey = [](const M2MTriplet& m) { return std::tie(m.join_table, m.left, m.right); };
  auto pkey = [](const TreePattern& p) { return p.root; };
  auto l1 = lookup, l2 = other.lookup;
  std::sort(l1.begin(), l1.end());
  std::sort(l2.begin(), l2.end());
  return sorted_by(tables, tkey) == sorted_by(other.tables, tkey) &&
         sorted_by(constraints, ckey) == sorted_by(other.constraints, ckey) &&
         sorted_by(m2m, mkey) == sorted_by(other.m2m, mkey) && l1 == l2 &&
         sorted_by(patterns, pkey) == sorted_by(other.patterns, pkey);
}

RoleSet classify_table(const DatabaseModel& model, const std::string& table) {
  if (!model.has_table(table)) throw UnknownTable(table);
  RoleSet roles;
  for (const auto& p : model.patterns) {
    const bool star = p.kind == PatternKind::star;
    if (p.root == table) roles.add(star ? Role::star_root : Role::snowflake_root);
    else if (p.parent_of(table)) roles.add(star ? Role::star_inner : Role::snowflake_inner);
  }
  if (!roles.has(Role::star_inner) && !roles.has(Role::snowflake_inner)) roles.add(Role::core);
  if (model.is_lookup(table)) roles.add(Role::lookup);
  for (const auto& m : model.m2m)
    if (m.join_table == table) roles.add(Role::m2m_join);
  return roles;
}

bool is_core(const DatabaseModel& model, const std::string& table) {
  return classify_table(model, table).has(Role::core);
}

std::vector<std::string> core_tables(const DatabaseModel& model) {
  std::vector<std::string> out;
  for (const auto& t : model.tables)
    if (is_core(model, t.name)) out.push_back(t.name);
  return out;
}

std::vector<Diagnostic> validate_model(const DatabaseModel& model) {
  std::vector<Diagnostic> out;
  auto report = [&](std::string entity, std::string rule, std::string message) {
    out.push_back({std::move(entity), std::move(rule), std::move(message)});
  };

  std::set<std::string> table_names;
  for (const auto& t : model.tables) {
    if (t.name.empty()) report("<table>", "empty name", "table with empty name");
    if (!table_names.insert(t.name).second)
      report(t.name, "duplicate table", "table '" + t.name + "' declared twice");
    std::set<std::string> attrs;
    for (const auto& a : t.attributes) {
      if (a.name.empty()) report(t.name, "empty attribute name", "attribute with empty name");
      else if (!attrs.insert(a.name).second)
        report(t.name + "." + a.name, "duplicate attribute", "attribute declared twice");
    }
    if (t.primary_key.empty())
      report(t.name, "missing primary key", "table '" + t.name + "' has no primary key");
    for (const auto& k : t.primary_key)
      if (!attrs.count(k))
        report(t.name + "." + k, "dangling reference", "primary key column is not an attribute");
  }

  for (const auto& c : model.constraints) {
    const std::string entity = c.from_table + " -> " + c.to_table;
    if (c.fk_columns.empty() || c.fk_columns.size() != c.pk_columns.size())
      report(entity, "key arity", "foreign key and referenced key column counts differ or are empty");
    const auto* from = model.find_table(c.from_table);
    const auto* to = model.find_table(c.to_table);
    if (!from) report(entity, "dangling reference", "unknown table '" + c.from_table + "'");
    if (!to) report(entity, "dangling reference", "unknown table '" + c.to_table + "'");
    if (from)
      for (const auto& col : c.fk_columns)
        if (!from->has_attribute(col))
          report(entity, "dangling reference", "unknown column '" + c.from_table + "." + col + "'");
    if (to)
      for (const auto& col : c.pk_columns)
        if (!to->has_attribute(col))
          report(entity, "dangling reference", "unknown column '" + c.to_table + "." + col + "'");
  }

  for (const auto& m : model.m2m) {
    const std::string entity = "m2m(" + m.left + ", " + m.right + ", " + m.join_table + ")";
    bool all_known = true;
    for (const auto* name : {&m.left, &m.right, &m.join_table})
      if (!model.has_table(*name)) {
        report(entity, "dangling reference", "unknown table '" + *name + "'");
        all_known = false;
      }
    if (!all_known) continue;
    for (const auto* side : {&m.left, &m.right})
      if (!model.covered_by_constraint(*side, m.join_table))
        report(entity, "m2m pair not covered by constraints",
               "no constraint between '" + *side + "' and '" + m.join_table + "'");
  }

  for (const auto& l : model.lookup)
    if (!model.has_table(l)) report(l, "dangling reference", "unknown lookup table '" + l + "'");

  std::map<std::string, std::string> inner_owner;
  std::set<std::string> roots;
  for (const auto& p : model.patterns) {
    const std::string entity = std::string(to_string(p.kind)) + "@" + p.root;
    if (!model.has_table(p.root)) report(entity, "dangling reference", "unknown root '" + p.root + "'");
    if (!roots.insert(p.root).second) report(entity, "duplicate pattern", "two patterns share a root");
    std::map<std::string, std::string> parent;
    for (const auto& [par, kids] : p.children) {
      if (!model.has_table(par)) report(entity, "dangling reference", "unknown table '" + par + "'");
      for (const auto& kid : kids) {
        if (!model.has_table(kid)) report(entity, "dangling reference", "unknown table '" + kid + "'");
        if (kid == p.root) report(entity, "cyclic pattern", "root '" + kid + "' has a parent");
        auto [it, fresh] = parent.emplace(kid, par);
        if (!fresh && it->second != par)
          report(entity, "multiple parents", "'" + kid + "' has more than one parent");
        else if (!fresh)
          report(entity, "duplicate child", "'" + kid + "' listed twice under '" + par + "'");
        if (model.has_table(kid) && model.has_table(par) && !model.covered_by_constraint(par, kid))
          report(entity, "pattern edge not covered by constraints",
                 "no constraint between '" + par + "' and '" + kid + "'");
      }
    }
    // Every parent must be reachable from the root; anything else is a detached cycle.
    const auto reachable = p.preorder();
    const std::set<std::string> reach(reachable.begin(), reachable.end());
    for (const auto& [par, kids] : p.children) {
      if (!reach.count(par)) report(entity, "cyclic pattern", "'" + par + "' is not reachable from the root");
      for (const auto& kid : kids)
        if (kid == par) report(entity, "cyclic pattern", "'" + kid + "' is its own child");
    }
    for (const auto& inner : p.inner_tables()) {
      auto [it, fresh] = inner_owner.emplace(inner, p.root);
      if (!fresh)
        report(inner, "inner in two patterns",
               "'" + inner + "' is inner in patterns rooted at '" + it->second + "' and '" + p.root + "'");
      if (model.is_lookup(inner))
        report(inner, "lookup is pattern inner", "lookup table '" + inner + "' is inner in a pattern");
    }
  }
  return out;
}

}  // namespace pathsql
