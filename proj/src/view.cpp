#include "pathsql/view.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>

namespace pathsql {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string short_hash(const std::string& s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  char buf[9];
  std::snprintf(buf, sizeof buf, "%06x", h & 0xffffffu);
  return buf;
}

std::string fit_alias(const std::string& full, std::size_t max_len) {
  if (full.size() <= max_len) return full;
  const std::string suffix = "_" + short_hash(full);
  const std::size_t keep = max_len > suffix.size() ? max_len - suffix.size() : 1;
  return full.substr(0, keep) + suffix;
}

}  // namespace

std::string TableRef::sql_name() const {
  return occurrence > 1 ? lower(table) + "_" + std::to_string(occurrence) : lower(table);
}

std::string make_alias(const std::string& table, int occurrence, const std::string& attribute, std::size_t max_len) {
  std::string full = lower(table) + "_" + lower(attribute);
  if (occurrence > 1) full += "_" + std::to_string(occurrence);
  return fit_alias(full, std::max<std::size_t>(max_len, 8));
}

namespace {

class Planner {
 public:
  Planner(const RelevanceSet& relta, const DatabaseModel& model, const ViewOptions& options)
      : relta_(relta), model_(model), options_(options) {}

  TableRef introduce(const std::string& table) {
    TableRef ref{table, ++occurrences_[table]};
    order_.push_back(ref);
    return ref;
  }

  void join(const TableRef& source, const TableRef& target, const FkConstraint& fk, JoinKind kind) {
    JoinStep step;
    step.source = source;
    step.target = target;
    step.kind = kind;
    step.fk = fk;
    // Referenced side is whichever occurrence is the FK's target table. For a
    // self-reference the newly joined occurrence holds the foreign key.
    const bool self = fk.from_table == fk.to_table;
    const TableRef& pk_side = self ? source : (fk.to_table == source.table ? source : target);
    const TableRef& fk_side = self ? target : (fk.to_table == source.table ? target : source);
    for (std::size_t i = 0; i < fk.fk_columns.size(); ++i)
      step.on.push_back({{pk_side, fk.pk_columns[i]}, {fk_side, fk.fk_columns[i]}});
    plan_.joins.push_back(std::move(step));
  }

  ViewPlan finish() {
    std::set<std::string> used;
    for (const auto& ref : order_) {
      auto it = relta_.entries.find(ref.table);
      if (it == relta_.entries.end()) continue;
      const auto& def = model_.table(ref.table);
      std::vector<std::string> cols = def.primary_key;
      for (const auto& a : it->second)
        if (std::find(cols.begin(), cols.end(), a) == cols.end()) cols.push_back(a);
      for (const auto& c : cols) {
        std::string alias = make_alias(ref.table, ref.occurrence, c, options_.alias_max_len);
        for (int n = 2; used.count(alias); ++n) {
          const std::string tag = "_" + std::to_string(n);
          alias = make_alias(ref.table, ref.occurrence, c, options_.alias_max_len);
          alias = alias.substr(0, std::min(alias.size(), options_.alias_max_len - tag.size())) + tag;
        }
        used.insert(alias);
        plan_.projections.push_back({ref, c, alias});
      }
    }
    return std::move(plan_);
  }

  ViewPlan& plan() { return plan_; }

 private:
  const RelevanceSet& relta_;
  const DatabaseModel& model_;
  const ViewOptions& options_;
  std::map<std::string, int> occurrences_;
  std::vector<TableRef> order_;
  ViewPlan plan_;
};

}  // namespace

ViewPlan plan_view(const DecomposedPlan& dp, const RelevanceSet& relta, const DatabaseModel& model,
                   const ViewOptions& options) {
  const auto& steps = dp.core_walk.steps;
  if (steps.empty()) throw Error("cannot plan a view for an empty walk");
  if (dp.core_walk.edges.size() + 1 != steps.size()) throw Error("internal: walk edges do not match its steps");
  Planner pl(relta, model, options);
  std::vector<TableRef> refs;
  refs.push_back(pl.introduce(steps[0]));
  pl.plan().base = refs[0];
  for (std::size_t i = 1; i < steps.size(); ++i) {
    refs.push_back(pl.introduce(steps[i]));
    pl.join(refs[i - 1], refs[i], dp.core_walk.edges[i - 1], JoinKind::inner);
  }
  for (const auto& b : dp.branches) {
    auto root = std::find_if(refs.begin(), refs.end(), [&](const TableRef& r) { return r.table == b.root; });
    if (root == refs.end()) throw Error("internal: branch root '" + b.root + "' is not on the core walk");
    TableRef prev = *root;
    for (std::size_t i = 0; i < b.tables.size(); ++i) {
      TableRef cur = pl.introduce(b.tables[i]);
      pl.join(prev, cur, b.edges.at(i), JoinKind::left);
      prev = cur;
    }
  }
  return pl.finish();
}

ViewPlan plan_view(const Walk& walk, const RelevanceSet& relta, const DatabaseModel& model, const ViewOptions& options) {
  DecomposedPlan dp;
  dp.core_walk = walk;
  return plan_view(dp, relta, model, options);
}

Dialect parse_dialect(const std::string& name) {
  const auto n = lower(name);
  if (n == "ansi") return Dialect::ansi;
  if (n == "mysql") return Dialect::mysql;
  throw Error("unknown dialect '" + name + "' (expected ansi or mysql)");
}

ViewSql emit_view_sql(const ViewPlan& plan, const std::string& view_name, Dialect dialect) {
  const std::size_t limit = dialect == Dialect::mysql ? 64 : 128;
  auto id = [&](const std::string& raw) {
    std::string s = lower(raw);
    if (s.size() > limit)
      throw Error("identifier '" + s + "' exceeds the " + std::to_string(limit) + "-character dialect limit");
    return dialect == Dialect::mysql ? "`" + s + "`" : s;
  };
  auto col = [&](const ColumnRef& c) { return id(c.ref.sql_name()) + "." + id(c.column); };
  auto range = [&](const TableRef& r) {
    return r.occurrence > 1 ? id(r.table) + " as " + id(r.sql_name()) : id(r.table);
  };

  std::string sql = "create view " + id(view_name) + " as select\n";
  for (std::size_t i = 0; i < plan.projections.size(); ++i) {
    const auto& p = plan.projections[i];
    sql += "  " + col({p.ref, p.attribute}) + " as " + id(p.alias);
    sql += i + 1 < plan.projections.size() ? ",\n" : "\n";
  }
  if (plan.projections.empty()) sql += "  *\n";
  sql += "from " + range(plan.base) + "\n";
  for (const auto& j : plan.joins) {
    sql += (j.kind == JoinKind::left ? "left join " : "join ") + range(j.target) + " on ";
    for (std::size_t i = 0; i < j.on.size(); ++i)
      sql += (i ? " and " : "") + col(j.on[i].first) + " = " + col(j.on[i].second);
    sql += "\n";
  }
  return {lower(view_name), sql};
}

}  // namespace pathsql
