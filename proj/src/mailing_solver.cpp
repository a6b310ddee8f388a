#include "oritrans/error.hpp"
#include "oritrans/solvers.hpp"

#include "format.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <tuple>

namespace oritrans {

namespace {

constexpr std::size_t kMaxMailingTerminals = 5;

struct Candidate {
  std::size_t steiner = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<long long>> theta;
  std::vector<double> weights;
};

struct TopologySearch {
  const MailingInstance& inst;
  const PhiNorm& phi;
  const Alpha& alpha;
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> commodities;
  std::vector<std::vector<std::vector<std::size_t>>> paths;  // per commodity: node sequences
  std::vector<std::size_t> units;
  std::vector<std::size_t> choice;
  std::size_t max_leaves = 0;
  std::size_t leaves = 0;
  std::vector<Candidate> candidates;
  std::map<std::vector<std::tuple<std::size_t, std::size_t, double>>, std::size_t> seen;

  // Steiner nodes must first appear in increasing order, which removes
  // relabelled duplicates. Returns the new count of Steiner nodes in use.
  std::optional<std::size_t> admit(const std::vector<std::size_t>& path, std::size_t used) const {
    for (std::size_t v : path) {
      if (v < n) continue;
      if (v - n > used) return std::nullopt;
      if (v - n == used) ++used;
    }
    return used;
  }

  void leaf() {
    if (++leaves > max_leaves) throw BudgetExceeded("mailing topology enumeration exceeds the budget");
    std::map<std::pair<std::size_t, std::size_t>, std::vector<long long>> flow;
    for (std::size_t u = 0; u < units.size(); ++u) {
      const auto& path = paths[units[u]][choice[u]];
      const auto [i, j] = commodities[units[u]];
      for (std::size_t s = 0; s + 1 < path.size(); ++s) {
        const std::size_t a = std::min(path[s], path[s + 1]);
        const std::size_t b = std::max(path[s], path[s + 1]);
        auto& theta = flow.try_emplace({a, b}, n * n, 0).first->second;
        theta[inst.channel(i, j)] += path[s] < path[s + 1] ? 1 : -1;
      }
    }
    Candidate cand;
    std::map<std::size_t, std::size_t> degree;
    for (auto& [e, theta] : flow) {
      if (std::all_of(theta.begin(), theta.end(), [](long long x) { return x == 0; })) continue;
      ++degree[e.first];
      ++degree[e.second];
      cand.edges.push_back(e);
      cand.theta.push_back(theta);
    }
    // Steiner nodes of degree < 3 are bends or unused: an equivalent
    // candidate without them is enumerated elsewhere.
    std::vector<std::size_t> relabel;
    for (const auto& [v, deg] : degree) {
      if (v < n) continue;
      if (deg < 3) return;
      relabel.push_back(v);
    }
    cand.steiner = relabel.size();
    for (auto& [a, b] : cand.edges) {
      if (a >= n) a = n + static_cast<std::size_t>(std::find(relabel.begin(), relabel.end(), a) - relabel.begin());
      if (b >= n) b = n + static_cast<std::size_t>(std::find(relabel.begin(), relabel.end(), b) - relabel.begin());
    }
    std::vector<std::tuple<std::size_t, std::size_t, double>> key;
    for (std::size_t e = 0; e < cand.edges.size(); ++e) {
      std::vector<double> t(cand.theta[e].begin(), cand.theta[e].end());
      cand.weights.push_back(mailing_cost(t, phi, alpha));
      key.emplace_back(cand.edges[e].first, cand.edges[e].second, cand.weights.back());
    }
    std::sort(key.begin(), key.end());
    if (seen.emplace(std::move(key), candidates.size()).second) candidates.push_back(std::move(cand));
  }

  void go(std::size_t u, std::size_t used) {
    if (u == units.size()) {
      leaf();
      return;
    }
    const std::size_t c = units[u];
    const std::size_t first = (u > 0 && units[u - 1] == c) ? choice[u - 1] : 0;
    for (std::size_t r = first; r < paths[c].size(); ++r) {
      const auto next = admit(paths[c][r], used);
      if (!next) continue;
      choice[u] = r;
      go(u + 1, *next);
    }
  }
};

void simple_paths(std::size_t nv, std::size_t at, std::size_t target, std::vector<char>& seen,
                  std::vector<std::size_t>& cur, std::vector<std::vector<std::size_t>>& out, std::size_t limit) {
  if (at == target) {
    out.push_back(cur);
    if (out.size() > limit) throw BudgetExceeded("path enumeration exceeds the budget");
    return;
  }
  for (std::size_t w = 0; w < nv; ++w) {
    if (seen[w]) continue;
    seen[w] = 1;
    cur.push_back(w);
    simple_paths(nv, w, target, seen, cur, out, limit);
    cur.pop_back();
    seen[w] = 0;
  }
}

}  // namespace

SolveReport solve_mailing_topology(const MailingInstance& inst, const PhiNorm& phi, const Alpha& alpha,
                                   std::size_t max_steiner, const Budget& budget, double tol) {
  const std::size_t n = inst.n();
  if (n > std::min(budget.max_terminals, kMaxMailingTerminals)) {
    throw BudgetExceeded(std::to_string(n) + " points exceed the mailing solver limit");
  }
  if (max_steiner > budget.max_steiner) {
    throw BudgetExceeded(std::to_string(max_steiner) + " Steiner nodes exceed the limit of " +
                         std::to_string(budget.max_steiner));
  }
  TopologySearch s{inst, phi, alpha, n, {}, {}, {}, {}, budget.max_enumeration, 0, {}, {}};
  const std::size_t nv = n + max_steiner;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (inst.g(i, j) == 0) continue;
      std::vector<std::vector<std::size_t>> found;
      std::vector<char> seen(nv, 0);
      seen[i] = 1;
      std::vector<std::size_t> cur{i};
      simple_paths(nv, i, j, seen, cur, found, budget.max_enumeration);
      std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
      for (long long k = 0; k < inst.g(i, j); ++k) s.units.push_back(s.commodities.size());
      s.commodities.emplace_back(i, j);
      s.paths.push_back(std::move(found));
    }
  }
  s.choice.assign(s.units.size(), 0);
  s.go(0, 0);

  SolveReport report;
  report.method = "topology";
  report.enumerated = s.leaves;
  report.evaluated = s.candidates.size();
  report.config = {{"phi", phi.name()},
                   {"alpha", format_number(alpha.value())},
                   {"max_steiner", std::to_string(max_steiner)},
                   {"tol", format_number(tol)}};
  const std::size_t m = n * n;
  if (s.units.empty()) {
    report.value = 0.0;
    report.current = PolyCurrent1(m, Ring::kInteger);
    report.family = PathFamily(inst, {});
    report.winner = "empty";
    return report;
  }

  std::vector<std::vector<double>> coords;
  for (const auto& p : inst.points()) coords.push_back(p.to_doubles());
  std::vector<PositionResult> solved(s.candidates.size());
  parallel_for(s.candidates.size(), [&](std::size_t c) {
    const Candidate& cand = s.candidates[c];
    solved[c] = optimize_weighted_positions(n, cand.steiner, cand.edges, cand.weights, coords, tol,
                                            budget.max_iterations, budget.seed + c);
  });
  std::size_t best = 0;
  for (std::size_t c = 1; c < solved.size(); ++c) {
    if (solved[c].value < solved[best].value) best = c;
  }

  const Candidate& cand = s.candidates[best];
  const PositionResult& pos = solved[best];
  std::vector<Point> where;
  for (std::size_t v = 0; v < pos.positions.size(); ++v) {
    const std::size_t r = pos.root[v];
    where.push_back(r < n ? inst.points()[r] : Point::from_doubles(pos.positions[r]));
  }
  std::vector<PolyCurrent1::Atom> raw;
  for (std::size_t e = 0; e < cand.edges.size(); ++e) {
    const Point& a = where[cand.edges[e].first];
    const Point& b = where[cand.edges[e].second];
    if (a == b) continue;
    Coef coef(m);
    for (std::size_t k = 0; k < m; ++k) coef[k] = cand.theta[e][k];
    raw.push_back({Segment(a, b), std::move(coef)});
  }
  PolyCurrent1 current = remove_cycles(PolyCurrent1(m, Ring::kInteger, std::move(raw)));
  report.value = energy(current, phi, alpha);
  report.family = current_to_family(current, inst).family;
  report.current = std::move(current);
  report.winner = "candidate " + std::to_string(best);
  report.converged = pos.converged;
  report.residual = pos.subgradient;
  return report;
}

}  // namespace oritrans
