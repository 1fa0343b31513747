#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pathsql/error.hpp"
#include "pathsql/model.hpp"
#include "pathsql/retrieve.hpp"
#include "pathsql/schema_graph.hpp"

namespace pathsql {

struct PathProblem {
  SchemaGraph graph;
  std::vector<std::string> targets;  // sorted, unique
  std::vector<M2MTriplet> m2m;
  std::vector<std::string> lookup;
  // nullopt: deepen one layer at a time up to |V| + |T| and stop at the
  // first horizon with a solution.
  std::optional<int> max_len;

  bool is_target(const std::string& t) const;
  bool is_lookup(const std::string& t) const;
  // Triplets whose join table must occur exactly once: both side tables are
  // targets, or the join table itself is.
  std::vector<M2MTriplet> triggered() const;
  int deepening_start() const;
  int deepening_limit() const;
};

struct Walk {
  std::vector<std::string> steps;
  std::vector<FkConstraint> edges;  // edges[i] joins steps[i] and steps[i+1]
  int cost = 0;

  bool operator==(const Walk&) const = default;
};

std::string to_string(const Walk& w);

class Infeasible : public Error {
 public:
  explicit Infeasible(int max_len, const std::string& detail = {})
      : Error("no walk satisfies the constraints within " + std::to_string(max_len) + " steps" +
              (detail.empty() ? "" : ": " + detail)),
        max_len_(max_len) {}
  int max_len() const { return max_len_; }

 private:
  int max_len_;
};

struct SolveStats {
  std::uint64_t states_expanded = 0;
  int depth_reached = 0;
  int horizon = 0;  // max_len in effect
};

// targets = tables(relta) (all of them must be graph nodes).
PathProblem formulate_csp(const RelevanceSet& relta, const DatabaseModel& model, std::optional<int> max_len = {});
PathProblem formulate_csp(const std::vector<std::string>& targets, const SchemaGraph& graph,
                          const DatabaseModel& model, std::optional<int> max_len = {});

// Minimum cost; ties go to fewer steps from a referencing table to the table
// it references, then to the lexicographically smallest table sequence.
// Throws Infeasible.
Walk solve_path(const PathProblem& p, SolveStats* stats = nullptr);
std::optional<Walk> try_solve_path(const PathProblem& p, SolveStats* stats = nullptr);

// Number of steps that go from the FK side to the referenced side.
int up_steps(const Walk& w);
int walk_cost(const std::vector<std::string>& steps, const PathProblem& p);

struct Violation {
  std::string rule;  // "C1".."C4", "length", "cost"
  std::string message;
};

std::vector<Violation> check_walk(const Walk& w, const PathProblem& p);

struct Branch {
  std::string root;
  std::vector<std::string> tables;  // root excluded
  std::vector<FkConstraint> edges;  // edges[i] joins (i ? tables[i-1] : root) and tables[i]

  bool operator==(const Branch&) const = default;
};

struct DecomposedPlan {
  Walk core_walk;
  std::vector<Branch> branches;
  SolveStats stats;
};

// Solves over the core subgraph with pattern roots standing in for their
// relevant inner tables, then attaches one root-to-table branch per relevant
// inner table. Branches that are a prefix of another branch are dropped.
DecomposedPlan decompose_solve(const RelevanceSet& relta, const DatabaseModel& model,
                               std::optional<int> max_len = {});

}  // namespace pathsql
