#include "pathsql/solver.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

namespace pathsql {

bool PathProblem::is_target(const std::string& t) const {
  return std::binary_search(targets.begin(), targets.end(), t);
}

bool PathProblem::is_lookup(const std::string& t) const {
  return std::find(lookup.begin(), lookup.end(), t) != lookup.end();
}

std::vector<M2MTriplet> PathProblem::triggered() const {
  std::vector<M2MTriplet> out;
  for (const auto& m : m2m)
    if ((is_target(m.left) && is_target(m.right)) || is_target(m.join_table)) out.push_back(m);
  return out;
}

int PathProblem::deepening_start() const {
  std::set<std::string> extra;
  for (const auto& m : triggered())
    if (!is_target(m.join_table)) extra.insert(m.join_table);
  return static_cast<int>(targets.size() + extra.size());
}

int PathProblem::deepening_limit() const {
  return static_cast<int>(graph.nodes().size() + targets.size());
}

std::string to_string(const Walk& w) {
  std::string out = "[";
  for (std::size_t i = 0; i < w.steps.size(); ++i) out += (i ? ", " : "") + w.steps[i];
  return out + "]";
}

PathProblem formulate_csp(const std::vector<std::string>& targets, const SchemaGraph& graph,
                          const DatabaseModel& model, std::optional<int> max_len) {
  PathProblem p;
  p.graph = graph;
  p.targets = targets;
  std::sort(p.targets.begin(), p.targets.end());
  p.targets.erase(std::unique(p.targets.begin(), p.targets.end()), p.targets.end());
  if (p.targets.empty()) throw Error("path problem has no target tables");
  for (const auto& t : p.targets)
    if (!graph.has_node(t)) throw Error("target table '" + t + "' is not in the solving graph");
  p.m2m = model.m2m;
  p.lookup = model.lookup;
  if (max_len && *max_len < static_cast<int>(p.targets.size()))
    throw Error("max_len " + std::to_string(*max_len) + " is below the number of targets");
  p.max_len = max_len;
  return p;
}

PathProblem formulate_csp(const RelevanceSet& relta, const DatabaseModel& model, std::optional<int> max_len) {
  return formulate_csp(relta.relevant_tables(), build_graph(model), model, max_len);
}

int walk_cost(const std::vector<std::string>& steps, const PathProblem& p) {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [&](const std::string& t) { return !p.is_target(t); }));
}

int up_steps(const Walk& w) {
  int up = 0;
  for (std::size_t i = 0; i < w.edges.size(); ++i)
    if (w.edges[i].from_table == w.steps[i] && w.edges[i].to_table == w.steps[i + 1]) ++up;
  return up;
}

namespace {

constexpr int kNone = -1;
constexpr int kStop = -2;  // walk began on a lookup/join table: length 1 only
constexpr int kInvalid = -3;

struct Key {
  int node;
  int pend;
  std::uint64_t tmask;
  std::uint64_t jmask;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = std::hash<std::uint64_t>{}(k.tmask * 0x9e3779b97f4a7c15ull ^ k.jmask);
    h ^= (static_cast<std::size_t>(k.node) << 20) ^ static_cast<std::size_t>(k.pend + 3) * 0x51ed27;
    return h;
  }
};

struct Entry {
  Key key;
  int cost;
  int up;
  int parent;  // index into previous layer, -1 on the first
  int rank = 0;
};

struct Arc {
  int to;
  bool up;
};

class LayeredSearch {
 public:
  explicit LayeredSearch(const PathProblem& p) : p_(p), names_(p.graph.nodes()) {
    const int n = static_cast<int>(names_.size());
    auto idx = [&](const std::string& t) -> int {
      auto i = p_.graph.index_of(t);
      return i ? static_cast<int>(*i) : -1;
    };
    tbit_.assign(n, -1);
    jbit_.assign(n, -1);
    lookup_.assign(n, false);
    sides_.assign(n, {});
    join_.assign(n, false);
    for (std::size_t i = 0; i < p_.targets.size(); ++i) tbit_[idx(p_.targets[i])] = static_cast<int>(i);
    for (const auto& l : p_.lookup)
      if (int i = idx(l); i >= 0) lookup_[i] = true;
    for (const auto& m : p_.m2m) {
      const int j = idx(m.join_table);
      if (j < 0) continue;
      join_[j] = true;
      sides_[j].emplace_back(idx(m.left), idx(m.right));
    }
    int jb = 0;
    for (const auto& m : p_.triggered()) {
      const int j = idx(m.join_table);
      if (j >= 0 && jbit_[j] < 0) jbit_[j] = jb++;
    }
    if (p_.targets.size() > 63 || jb > 63) throw Error("too many targets for the solver");
    full_t_ = (p_.targets.size() == 64) ? ~0ull : ((1ull << p_.targets.size()) - 1);
    full_j_ = (1ull << jb) - 1;
    if (jb > static_cast<int>(p_.triggered().size())) throw Error("internal: join bit overflow");
    // A triggered join table outside the graph can never be visited.
    for (const auto& m : p_.triggered())
      if (idx(m.join_table) < 0) unreachable_join_ = true;

    adj_.assign(n, {});
    for (int u = 0; u < n; ++u)
      for (const auto& nb : p_.graph.neighbors(names_[u])) {
        const int v = idx(nb);
        const auto* fk = p_.graph.edge_between(names_[u], nb);
        adj_[u].push_back({v, fk->from_table == names_[u] && fk->to_table == nb});
      }
  }

  std::optional<Walk> run(SolveStats* stats) {
    const bool deepen = !p_.max_len.has_value();
    const int horizon = deepen ? p_.deepening_limit() : *p_.max_len;
    SolveStats st;
    st.horizon = horizon;

    std::optional<Walk> best;
    int best_cost = 0, best_up = 0;
    if (!unreachable_join_) {
      for (int layer = 1; layer <= horizon; ++layer) {
        if (layer == 1) seed();
        else if (!extend()) break;
        st.depth_reached = layer;
        st.states_expanded += layers_.back().size();
        if (auto cand = best_terminal()) {
          const auto& e = layers_.back()[*cand];
          Walk w = materialize(static_cast<int>(layers_.size()) - 1, *cand);
          if (!best || std::tie(e.cost, e.up) < std::tie(best_cost, best_up) ||
              (std::tie(e.cost, e.up) == std::tie(best_cost, best_up) && w.steps < best->steps)) {
            best = std::move(w);
            best_cost = e.cost;
            best_up = e.up;
          }
          if (deepen) break;
        }
      }
    }
    if (stats) *stats = st;
    return best;
  }

 private:
  int requirement(int pred, int v) const {
    int req = kNone;
    if (lookup_[v]) req = pred;
    for (const auto& [l, r] : sides_[v]) {
      int need;
      if (pred == l && l >= 0) need = r;
      else if (pred == r && r >= 0) need = l;
      else return kInvalid;
      if (need < 0) return kInvalid;
      if (req != kNone && req != need) return kInvalid;
      req = need;
    }
    return req;
  }

  void seed() {
    layers_.emplace_back();
    auto& layer = layers_.back();
    for (int v = 0; v < static_cast<int>(names_.size()); ++v) {
      Key k{v, (lookup_[v] || join_[v]) ? kStop : kNone, tbit_[v] >= 0 ? 1ull << tbit_[v] : 0,
            jbit_[v] >= 0 ? 1ull << jbit_[v] : 0};
      layer.push_back({k, tbit_[v] >= 0 ? 0 : 1, 0, -1, v});
    }
  }

  bool extend() {
    const auto& prev = layers_.back();
    std::vector<Entry> next;
    std::unordered_map<Key, int, KeyHash> where;
    for (int pi = 0; pi < static_cast<int>(prev.size()); ++pi) {
      const auto& e = prev[pi];
      if (e.key.pend == kStop) continue;
      for (const auto& arc : adj_[e.key.node]) {
        const int v = arc.to;
        if (e.key.pend >= 0 && v != e.key.pend) continue;
        if (jbit_[v] >= 0 && (e.key.jmask >> jbit_[v] & 1)) continue;
        const int pend = requirement(e.key.node, v);
        if (pend == kInvalid) continue;
        Key k{v, pend, e.key.tmask | (tbit_[v] >= 0 ? 1ull << tbit_[v] : 0),
              e.key.jmask | (jbit_[v] >= 0 ? 1ull << jbit_[v] : 0)};
        const int cost = e.cost + (tbit_[v] >= 0 ? 0 : 1);
        const int up = e.up + (arc.up ? 1 : 0);
        auto [it, fresh] = where.emplace(k, static_cast<int>(next.size()));
        if (fresh) {
          next.push_back({k, cost, up, pi});
          continue;
        }
        auto& cur = next[it->second];
        if (std::make_tuple(cost, up, e.rank) < std::make_tuple(cur.cost, cur.up, prev[cur.parent].rank)) {
          cur.cost = cost;
          cur.up = up;
          cur.parent = pi;
        }
      }
    }
    if (next.empty()) return false;
    // Rank = lexicographic order of the kept prefixes.
    std::vector<int> order(next.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::make_pair(prev[next[a].parent].rank, next[a].key.node) <
             std::make_pair(prev[next[b].parent].rank, next[b].key.node);
    });
    for (int r = 0; r < static_cast<int>(order.size()); ++r) next[order[r]].rank = r;
    layers_.push_back(std::move(next));
    return true;
  }

  std::optional<int> best_terminal() const {
    const auto& layer = layers_.back();
    std::optional<int> best;
    for (int i = 0; i < static_cast<int>(layer.size()); ++i) {
      const auto& e = layer[i];
      if (e.key.pend >= 0 || e.key.tmask != full_t_ || e.key.jmask != full_j_) continue;
      if (!best || std::make_tuple(e.cost, e.up, e.rank) <
                       std::make_tuple(layer[*best].cost, layer[*best].up, layer[*best].rank))
        best = i;
    }
    return best;
  }

  Walk materialize(int layer, int i) const {
    std::vector<int> seq;
    for (int l = layer; l >= 0; --l) {
      seq.push_back(layers_[l][i].key.node);
      i = layers_[l][i].parent;
    }
    std::reverse(seq.begin(), seq.end());
    Walk w;
    for (std::size_t s = 0; s < seq.size(); ++s) {
      w.steps.push_back(names_[seq[s]]);
      if (s) w.edges.push_back(*p_.graph.edge_between(names_[seq[s - 1]], names_[seq[s]]));
    }
    w.cost = walk_cost(w.steps, p_);
    return w;
  }

  const PathProblem& p_;
  const std::vector<std::string>& names_;
  std::vector<int> tbit_, jbit_;
  std::vector<bool> lookup_, join_;
  std::vector<std::vector<std::pair<int, int>>> sides_;
  std::vector<std::vector<Arc>> adj_;
  std::uint64_t full_t_ = 0, full_j_ = 0;
  bool unreachable_join_ = false;
  std::vector<std::vector<Entry>> layers_;
};

}  // namespace

std::optional<Walk> try_solve_path(const PathProblem& p, SolveStats* stats) {
  if (p.targets.empty()) throw Error("path problem has no target tables");
  return LayeredSearch(p).run(stats);
}

Walk solve_path(const PathProblem& p, SolveStats* stats) {
  SolveStats local;
  auto w = try_solve_path(p, &local);
  if (stats) *stats = local;
  if (!w) {
    std::string targets;
    for (const auto& t : p.targets) targets += (targets.empty() ? "" : ", ") + t;
    throw Infeasible(local.horizon, "targets {" + targets + "}");
  }
  return *w;
}

std::vector<Violation> check_walk(const Walk& w, const PathProblem& p) {
  std::vector<Violation> out;
  const auto& s = w.steps;
  const std::size_t n = s.size();
  const int horizon = p.max_len.value_or(p.deepening_limit());

  if (n == 0) out.push_back({"length", "walk is empty"});
  if (static_cast<int>(n) > horizon)
    out.push_back({"length", "walk has " + std::to_string(n) + " steps, horizon is " + std::to_string(horizon)});

  // C1
  for (const auto& t : s)
    if (!p.graph.has_node(t)) out.push_back({"C1", "'" + t + "' is not a graph node"});
  if (n > 0 && w.edges.size() != n - 1) out.push_back({"C1", "edge count does not match step count"});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!p.graph.adjacent(s[i], s[i + 1])) {
      out.push_back({"C1", "'" + s[i] + "' and '" + s[i + 1] + "' are not adjacent"});
      continue;
    }
    if (i < w.edges.size()) {
      const auto& e = w.edges[i];
      const bool known = std::any_of(p.graph.edges().begin(), p.graph.edges().end(),
                                     [&](const GraphEdge& g) { return g.fk == e; });
      if (!e.connects(s[i], s[i + 1]) || !known)
        out.push_back({"C1", "step " + std::to_string(i + 1) + " does not use a graph edge between its tables"});
    }
  }

  // C2
  for (const auto& t : p.targets)
    if (std::find(s.begin(), s.end(), t) == s.end()) out.push_back({"C2", "target '" + t + "' is not visited"});

  // C3
  for (const auto& m : p.triggered()) {
    const auto occ = std::count(s.begin(), s.end(), m.join_table);
    if (occ != 1)
      out.push_back({"C3", "join table '" + m.join_table + "' occurs " + std::to_string(occ) + " times, expected 1"});
  }
  if (n >= 2) {
    for (const auto& m : p.m2m)
      for (std::size_t i = 0; i < n; ++i) {
        if (s[i] != m.join_table) continue;
        const bool flanked = i > 0 && i + 1 < n &&
                             ((s[i - 1] == m.left && s[i + 1] == m.right) || (s[i - 1] == m.right && s[i + 1] == m.left));
        if (!flanked)
          out.push_back({"C3", "join table '" + m.join_table + "' at step " + std::to_string(i + 1) +
                                   " is not between '" + m.left + "' and '" + m.right + "'"});
      }
  }

  // C4
  if (n >= 2)
    for (std::size_t i = 0; i < n; ++i) {
      if (!p.is_lookup(s[i])) continue;
      if (i == 0 || i + 1 == n || s[i - 1] != s[i + 1])
        out.push_back({"C4", "lookup '" + s[i] + "' at step " + std::to_string(i + 1) +
                                 " is not entered and left through the same table"});
    }

  const int cost = walk_cost(s, p);
  if (cost != w.cost)
    out.push_back({"cost", "walk cost " + std::to_string(w.cost) + " differs from recomputed " + std::to_string(cost)});
  return out;
}

DecomposedPlan decompose_solve(const RelevanceSet& relta, const DatabaseModel& model, std::optional<int> max_len) {
  const auto graph = build_graph(model);
  const auto core = core_subgraph(graph, model);

  std::vector<std::string> targets;
  std::vector<std::pair<const TreePattern*, std::string>> inner;
  for (const auto& t : relta.relevant_tables()) {
    if (is_core(model, t)) {
      targets.push_back(t);
      continue;
    }
    const auto* p = model.pattern_containing_inner(t);
    if (!is_core(model, p->root))
      throw Error("pattern root '" + p->root + "' of relevant table '" + t + "' is not a core table");
    targets.push_back(p->root);
    inner.emplace_back(p, t);
  }

  DecomposedPlan plan;
  plan.core_walk = solve_path(formulate_csp(targets, core, model, max_len), &plan.stats);

  // One branch per relevant inner table; prefixes of longer branches go.
  struct Candidate {
    const TreePattern* pattern;
    std::vector<std::string> path;
  };
  std::vector<Candidate> cands;
  for (const auto& [p, t] : inner) cands.push_back({p, p->branch_to(t)});
  auto is_proper_prefix = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return a.size() < b.size() && std::equal(a.begin(), a.end(), b.begin());
  };
  std::vector<Candidate> kept;
  for (const auto& c : cands) {
    const bool covered = std::any_of(cands.begin(), cands.end(), [&](const Candidate& o) {
      return o.pattern == c.pattern && is_proper_prefix(c.path, o.path);
    });
    const bool dup = std::any_of(kept.begin(), kept.end(),
                                 [&](const Candidate& o) { return o.pattern == c.pattern && o.path == c.path; });
    if (!covered && !dup) kept.push_back(c);
  }
  auto root_pos = [&](const Candidate& c) {
    const auto& st = plan.core_walk.steps;
    return std::find(st.begin(), st.end(), c.pattern->root) - st.begin();
  };
  auto pre_pos = [](const Candidate& c) {
    const auto order = c.pattern->preorder();
    return std::find(order.begin(), order.end(), c.path.back()) - order.begin();
  };
  std::stable_sort(kept.begin(), kept.end(), [&](const Candidate& a, const Candidate& b) {
    return std::make_pair(root_pos(a), pre_pos(a)) < std::make_pair(root_pos(b), pre_pos(b));
  });

  for (const auto& c : kept) {
    Branch b;
    b.root = c.pattern->root;
    b.tables = c.path;
    std::string prev = b.root;
    for (const auto& t : c.path) {
      const auto* fk = graph.edge_between(prev, t);
      if (!fk) throw Error("pattern edge '" + prev + "' - '" + t + "' has no constraint");
      b.edges.push_back(*fk);
      prev = t;
    }
    plan.branches.push_back(std::move(b));
  }
  return plan;
}

}  // namespace pathsql
