#pragma once
// Independent reference implementations shared by the unit tests and the
// acceptance run. Nothing here calls the code under test except for the
// plain accessors of its data types.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "pathsql/eval.hpp"
#include "pathsql/llm.hpp"
#include "pathsql/solver.hpp"
#include "support.hpp"

namespace testing {

using namespace pathsql;
using Strings = std::vector<std::string>;

inline bool contains(const Strings& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

// Written straight from the constraint definitions, without sharing code with the solver.
inline bool oracle_ok(const Strings& s, const PathProblem& p) {
  const auto n = s.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!contains(p.graph.neighbors(s[i]), s[i + 1])) return false;
  for (const auto& t : p.targets)
    if (!contains(s, t)) return false;
  for (const auto& m : p.m2m) {
    const bool both = contains(p.targets, m.left) && contains(p.targets, m.right);
    if ((both || contains(p.targets, m.join_table)) && std::count(s.begin(), s.end(), m.join_table) != 1) return false;
    if (n < 2) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] != m.join_table) continue;
      if (i == 0 || i == n - 1) return false;
      const std::set<std::string> around{s[i - 1], s[i + 1]};
      if (around != std::set<std::string>{m.left, m.right}) return false;
    }
  }
  if (n >= 2)
    for (std::size_t i = 0; i < n; ++i)
      if (contains(p.lookup, s[i]) && (i == 0 || i == n - 1 || s[i - 1] != s[i + 1])) return false;
  return true;
}

struct OracleBest {
  Strings steps;
  int cost;
  int up;
};

inline int oracle_up(const Strings& s, const PathProblem& p) {
  int up = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const auto* fk = p.graph.edge_between(s[i], s[i + 1]);
    if (fk->from_table == s[i] && fk->to_table == s[i + 1]) ++up;
  }
  return up;
}

inline std::optional<OracleBest> enumerate(const PathProblem& p, int max_len) {
  std::optional<OracleBest> best;
  Strings cur;
  std::function<void()> go = [&] {
    if (!cur.empty() && oracle_ok(cur, p)) {
      const int cost = static_cast<int>(std::count_if(cur.begin(), cur.end(), [&](const auto& t) { return !contains(p.targets, t); }));
      const int up = oracle_up(cur, p);
      if (!best || std::tie(cost, up, cur) < std::tie(best->cost, best->up, best->steps)) best = OracleBest{cur, cost, up};
    }
    if (static_cast<int>(cur.size()) == max_len) return;
    const auto next = cur.empty() ? p.graph.nodes() : p.graph.neighbors(cur.back());
    for (const auto& v : next) {
      cur.push_back(v);
      go();
      cur.pop_back();
    }
  };
  go();
  return best;
}

inline PathProblem random_problem(std::mt19937& rng) {
  const int nv = 2 + static_cast<int>(rng() % 7);
  Strings nodes;
  for (int i = 0; i < nv; ++i) nodes.push_back("t" + std::to_string(i));
  std::set<std::pair<int, int>> pairs;
  // spanning-ish tree plus extras; occasionally leave a piece disconnected
  for (int i = 1; i < nv; ++i)
    if (rng() % 10) pairs.insert({static_cast<int>(rng() % i), i});
  for (int extra = static_cast<int>(rng() % 4); extra > 0; --extra) {
    int a = static_cast<int>(rng() % nv), b = static_cast<int>(rng() % nv);
    if (a != b) pairs.insert({std::min(a, b), std::max(a, b)});
  }
  std::vector<GraphEdge> edges;
  for (const auto& [a, b] : pairs) {
    FkConstraint fk = rng() % 2 ? FkConstraint{nodes[a], {"fk"}, nodes[b], {"id"}, FkKind::many_to_one}
                                : FkConstraint{nodes[b], {"fk"}, nodes[a], {"id"}, FkKind::many_to_one};
    edges.push_back({nodes[a], nodes[b], fk});
  }
  PathProblem p;
  p.graph = SchemaGraph(nodes, edges);
  // m2m triplets over nodes with two neighbours
  std::vector<int> order(nv);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::string> used;
  const int want_m2m = static_cast<int>(rng() % 3);
  for (int j : order) {
    if (static_cast<int>(p.m2m.size()) == want_m2m) break;
    const auto nb = p.graph.neighbors(nodes[j]);
    if (nb.size() < 2) continue;
    p.m2m.push_back({nb[0], nb[1], nodes[j]});
    used.insert(nodes[j]);
  }
  const int want_lookup = static_cast<int>(rng() % 3);
  for (int j : order) {
    if (static_cast<int>(p.lookup.size()) == want_lookup) break;
    if (!used.count(nodes[j]) && rng() % 2) p.lookup.push_back(nodes[j]);
  }
  std::set<std::string> targets;
  const int nt = 1 + static_cast<int>(rng() % std::min(nv, 4));
  while (static_cast<int>(targets.size()) < nt) targets.insert(nodes[rng() % nv]);
  p.targets.assign(targets.begin(), targets.end());
  p.max_len = std::max(nt, 1 + static_cast<int>(rng() % 6));
  return p;
}


// Brute force over column choices: every injection of g's columns into f's.
inline bool oracle_match(const ResultSet& f, const ResultSet& g, bool same_arity) {
  if (same_arity && f.columns.size() != g.columns.size()) return false;
  if (g.columns.size() > f.columns.size()) return false;
  if (f.rows.size() != g.rows.size()) return false;
  auto canon_rows = [](std::vector<Row> rows) {
    for (auto& r : rows)
      for (auto& v : r) v = canonical_value(v);
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  const auto want = canon_rows(g.rows);
  std::vector<std::size_t> pick;
  std::vector<bool> used(f.columns.size());
  std::function<bool()> go = [&]() -> bool {
    if (pick.size() == g.columns.size()) {
      std::vector<Row> proj;
      for (const auto& r : f.rows) {
        Row p;
        for (auto c : pick) p.push_back(r[c]);
        proj.push_back(p);
      }
      return canon_rows(proj) == want;
    }
    for (std::size_t c = 0; c < f.columns.size(); ++c) {
      if (used[c]) continue;
      used[c] = true;
      pick.push_back(c);
      const bool ok = go();
      pick.pop_back();
      used[c] = false;
      if (ok) return true;
    }
    return false;
  };
  return go();
}

inline ResultSet random_result(std::mt19937& rng, std::size_t cols, std::size_t rows) {
  ResultSet rs;
  for (std::size_t c = 0; c < cols; ++c) rs.columns.push_back("c" + std::to_string(c));
  const Strings values{"1", "2", "1.0", "x", "y"};
  for (std::size_t r = 0; r < rows; ++r) {
    Row row;
    for (std::size_t c = 0; c < cols; ++c)
      row.push_back(rng() % 6 == 0 ? Value{} : Value{values[rng() % values.size()]});
    rs.rows.push_back(row);
  }
  return rs;
}

// Columns picked (possibly repeated or reordered) from f, rows shuffled.
inline ResultSet derive(std::mt19937& rng, const ResultSet& f, std::size_t cols) {
  std::vector<std::size_t> idx(f.columns.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(cols, idx.size()));
  ResultSet g;
  for (auto i : idx) g.columns.push_back(f.columns[i]);
  for (const auto& r : f.rows) {
    Row row;
    for (auto i : idx) row.push_back(r[i]);
    g.rows.push_back(row);
  }
  std::shuffle(g.rows.begin(), g.rows.end(), rng);
  return g;
}

// Picks client.name during retrieval; the query prompt for question q gets
// good[q] correct samples, the rest return no rows.
struct RulesLlm : LlmClient {
  std::map<std::string, int> good;
  std::vector<std::string> complete(const CompletionRequest& req) override {
    const auto& p = req.prompt;
    if (p.find("I created a view table") != std::string::npos) {
      for (const auto& [q, n] : good)
        if (p.find("question: " + q + ".") != std::string::npos) {
          Strings out(static_cast<std::size_t>(n), testing::fenced("select client_name from v"));
          out.resize(static_cast<std::size_t>(req.n_samples), testing::fenced("select client_name from v where 1 = 0"));
          return out;
        }
      throw LlmError("unknown", "", "unexpected question");
    }
    if (p.find("DescriptionField") != std::string::npos) return Strings(static_cast<std::size_t>(req.n_samples), "[name]");
    return Strings(static_cast<std::size_t>(req.n_samples), "['client']");
  }
};

}  // namespace testing
