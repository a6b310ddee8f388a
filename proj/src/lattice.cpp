#include "oritrans/error.hpp"
#include "oritrans/solvers.hpp"

#include "format.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>

namespace oritrans {

std::size_t worker_count() {
  std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ORITRANS_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

Point LatticeGrid::node(std::size_t ix, std::size_t iy) const {
  return Point{x0 + step * static_cast<long>(ix), y0 + step * static_cast<long>(iy)};
}

std::optional<std::size_t> LatticeGrid::locate(const Point& p) const {
  if (p.dim() != 2) return std::nullopt;
  const Rational fx = (p[0] - x0) / step;
  const Rational fy = (p[1] - y0) / step;
  if (boost::multiprecision::denominator(fx) != 1 || boost::multiprecision::denominator(fy) != 1) {
    return std::nullopt;
  }
  if (fx < 0 || fy < 0 || fx >= static_cast<long>(nx) || fy >= static_cast<long>(ny)) return std::nullopt;
  return static_cast<std::size_t>(fy.convert_to<long>()) * nx + static_cast<std::size_t>(fx.convert_to<long>());
}

namespace {

struct Lattice {
  std::vector<Point> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (low id, high id), row-major
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj;  // (neighbour, edge)
};

Lattice make_lattice(const LatticeGrid& g) {
  Lattice l;
  l.adj.resize(g.nx * g.ny);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) l.nodes.push_back(g.node(ix, iy));
  }
  auto add = [&](std::size_t a, std::size_t b) {
    l.adj[a].emplace_back(b, l.edges.size());
    l.adj[b].emplace_back(a, l.edges.size());
    l.edges.emplace_back(a, b);
  };
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const std::size_t v = iy * g.nx + ix;
      if (ix + 1 < g.nx) add(v, v + 1);
      if (iy + 1 < g.ny) add(v, v + g.nx);
    }
  }
  return l;
}

std::vector<std::size_t> check_lattice_instance(const MailingInstance& inst, const LatticeGrid& grid,
                                                const Budget& budget) {
  if (grid.step <= 0) throw InvalidArgument("lattice step must be positive");
  if (grid.nx == 0 || grid.ny == 0) throw InvalidArgument("lattice must have at least one node");
  if (grid.nx > budget.max_grid || grid.ny > budget.max_grid) {
    throw BudgetExceeded("lattice " + std::to_string(grid.nx) + "x" + std::to_string(grid.ny) + " exceeds " +
                         std::to_string(budget.max_grid) + "x" + std::to_string(budget.max_grid));
  }
  if (inst.total() > budget.max_units) {
    throw BudgetExceeded("total demand " + std::to_string(inst.total()) + " exceeds " +
                         std::to_string(budget.max_units));
  }
  std::vector<std::size_t> at;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const auto id = grid.locate(inst.points()[i]);
    if (!id) throw InvalidArgument("point " + std::to_string(i + 1) + " is not a lattice node");
    at.push_back(*id);
  }
  return at;
}

// cost[a][b] = phi(a^alpha, b^alpha)
std::vector<std::vector<double>> cost_table(long long n, const PhiNorm& phi, const Alpha& alpha) {
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(n + 1));
  for (long long a = 0; a <= n; ++a) {
    for (long long b = 0; b <= n; ++b) c[a][b] = oriented_cost(phi, alpha, static_cast<double>(a), static_cast<double>(b));
  }
  return c;
}

using Histogram = std::map<std::pair<long long, long long>, long long>;

void add_to_histogram(Histogram& h, long long a, long long b) {
  if (a == 0 && b == 0) return;
  ++h[{std::min(a, b), std::max(a, b)}];
}

// Both oracles score through this function, so equal histograms give
// bit-equal values.
double histogram_value(const Histogram& h, const std::vector<std::vector<double>>& cost, double step) {
  double total = 0.0;
  for (const auto& [key, count] : h) total += static_cast<double>(count) * cost[key.first][key.second];
  return total * step;
}

constexpr double kPruneSlack = 1e-9;

struct Route {
  std::vector<std::size_t> nodes;
  std::vector<std::pair<std::size_t, int>> steps;  // (edge, +1 along low->high)
};

void enumerate_routes(const Lattice& l, std::size_t at, std::size_t target, std::vector<char>& seen, Route& cur,
                      std::vector<Route>& out, std::size_t& budget_left) {
  if (budget_left == 0) throw BudgetExceeded("lattice path enumeration exceeds the enumeration budget");
  --budget_left;
  if (at == target) {
    out.push_back(cur);
    return;
  }
  for (const auto& [w, e] : l.adj[at]) {
    if (seen[w]) continue;
    seen[w] = 1;
    cur.nodes.push_back(w);
    cur.steps.emplace_back(e, l.edges[e].first == at ? 1 : -1);
    enumerate_routes(l, w, target, seen, cur, out, budget_left);
    cur.steps.pop_back();
    cur.nodes.pop_back();
    seen[w] = 0;
  }
}

struct FamilySearch {
  const MailingInstance& inst;
  const Lattice& lattice;
  const std::vector<std::vector<double>>& cost;
  double step;
  const FamilyVisitor& visit;
  std::vector<std::pair<std::size_t, std::size_t>> commodities;
  std::vector<std::vector<Route>> routes;  // per commodity
  std::vector<std::size_t> units;          // commodity per unit
  std::vector<long long> pos;
  std::vector<long long> neg;
  std::vector<std::size_t> choice;
  double partial = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_choice;
  std::size_t nodes_visited = 0;
  std::size_t leaves = 0;
  std::size_t best_leaf = 0;
  std::size_t max_nodes = 0;

  PathFamily family_of(const std::vector<std::size_t>& pick) const {
    std::vector<LabeledPath> paths;
    for (std::size_t u = 0; u < units.size(); ++u) {
      const auto& r = routes[units[u]][pick[u]];
      std::vector<Point> pts;
      for (std::size_t v : r.nodes) pts.push_back(lattice.nodes[v]);
      paths.push_back({commodities[units[u]].first, commodities[units[u]].second, Polyline(std::move(pts))});
    }
    return PathFamily(inst, std::move(paths));
  }

  double edge_cost(std::size_t e) const { return cost[pos[e]][neg[e]]; }

  void go(std::size_t u) {
    if (++nodes_visited > max_nodes) throw BudgetExceeded("lattice family search exceeds the enumeration budget");
    if (u == units.size()) {
      Histogram h;
      for (std::size_t e = 0; e < pos.size(); ++e) add_to_histogram(h, pos[e], neg[e]);
      const double value = histogram_value(h, cost, step);
      ++leaves;
      if (visit) visit(family_of(choice), value);
      if (value < best) {
        best = value;
        best_choice = choice;
        best_leaf = leaves;
      }
      return;
    }
    const std::size_t c = units[u];
    const std::size_t first = (u > 0 && units[u - 1] == c) ? choice[u - 1] : 0;
    for (std::size_t r = first; r < routes[c].size(); ++r) {
      const Route& route = routes[c][r];
      double delta = 0.0;
      for (const auto& [e, dir] : route.steps) {
        const double before = edge_cost(e);
        (dir > 0 ? pos[e] : neg[e]) += 1;
        delta += (edge_cost(e) - before) * step;
      }
      if (partial + delta <= best + kPruneSlack) {
        const double saved = partial;
        partial += delta;
        choice[u] = r;
        go(u + 1);
        partial = saved;
      }
      for (const auto& [e, dir] : route.steps) (dir > 0 ? pos[e] : neg[e]) -= 1;
    }
  }
};

std::vector<std::pair<std::string, std::string>> lattice_config(const LatticeGrid& grid, const PhiNorm& phi,
                                                                const Alpha& alpha) {
  return {{"grid", std::to_string(grid.nx) + "x" + std::to_string(grid.ny)},
          {"step", to_string(grid.step)},
          {"phi", phi.name()},
          {"alpha", format_number(alpha.value())}};
}

}  // namespace

SolveReport brute_force_lattice_mailing(const MailingInstance& inst, const LatticeGrid& grid, const PhiNorm& phi,
                                        const Alpha& alpha, const Budget& budget, const FamilyVisitor& visit) {
  const auto at = check_lattice_instance(inst, grid, budget);
  const Lattice lattice = make_lattice(grid);
  const auto cost = cost_table(inst.total(), phi, alpha);
  FamilySearch s{inst, lattice, cost, to_double(grid.step), visit, {}, {}, {}, {}, {}, {}, 0.0,
                 std::numeric_limits<double>::infinity(), {}, 0, 0, 0, budget.max_enumeration};
  std::size_t budget_left = budget.max_enumeration;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    for (std::size_t j = 0; j < inst.n(); ++j) {
      if (inst.g(i, j) == 0) continue;
      std::vector<Route> found;
      std::vector<char> seen(lattice.nodes.size(), 0);
      seen[at[i]] = 1;
      Route cur;
      cur.nodes.push_back(at[i]);
      enumerate_routes(lattice, at[i], at[j], seen, cur, found, budget_left);
      std::stable_sort(found.begin(), found.end(),
                       [](const Route& a, const Route& b) { return a.steps.size() < b.steps.size(); });
      for (long long k = 0; k < inst.g(i, j); ++k) s.units.push_back(s.commodities.size());
      s.commodities.emplace_back(i, j);
      s.routes.push_back(std::move(found));
    }
  }
  s.pos.assign(lattice.edges.size(), 0);
  s.neg.assign(lattice.edges.size(), 0);
  s.choice.assign(s.units.size(), 0);
  s.go(0);
  if (s.best_choice.size() != s.units.size()) throw Infeasible("no lattice family is compatible with the instance");

  SolveReport report;
  report.method = "lattice-family";
  report.value = s.best;
  report.family = s.family_of(s.best_choice);
  report.enumerated = s.nodes_visited;
  report.evaluated = s.leaves;
  report.winner = "leaf " + std::to_string(s.best_leaf);
  report.config = lattice_config(grid, phi, alpha);
  return report;
}

namespace {

struct CurrentSearch {
  const MailingInstance& inst;
  const Lattice& lattice;
  const std::vector<std::vector<double>>& cost;
  double step;
  const CurrentVisitor& visit;
  std::vector<std::pair<std::size_t, std::size_t>> channels;
  std::vector<long long> cap;                 // g per channel
  std::vector<std::vector<long long>> options;  // per option, theta per channel
  std::vector<std::pair<long long, long long>> option_pm;
  std::vector<double> option_cost;
  std::vector<std::vector<long long>> need;     // node x channel: required net inflow
  std::vector<std::vector<long long>> balance;  // node x channel: current net inflow
  std::vector<std::size_t> remaining;           // unassigned incident edges
  std::vector<std::size_t> choice;
  double partial = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_choice;
  std::size_t nodes_visited = 0;
  std::size_t leaves = 0;
  std::size_t best_leaf = 0;
  std::size_t max_nodes = 0;

  PolyCurrent1 current_of(const std::vector<std::size_t>& pick) const {
    const std::size_t m = inst.n() * inst.n();
    std::vector<PolyCurrent1::Atom> raw;
    for (std::size_t e = 0; e < pick.size(); ++e) {
      const auto& theta = options[pick[e]];
      Coef coef(m, Rational(0));
      bool any = false;
      for (std::size_t c = 0; c < channels.size(); ++c) {
        coef[inst.channel(channels[c].first, channels[c].second)] = theta[c];
        any = any || theta[c] != 0;
      }
      if (!any) continue;
      raw.push_back({Segment(lattice.nodes[lattice.edges[e].first], lattice.nodes[lattice.edges[e].second]),
                     std::move(coef)});
    }
    return PolyCurrent1(m, Ring::kInteger, std::move(raw));
  }

  bool admissible(std::size_t v) const {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const long long gap = need[v][c] - balance[v][c];
      if (std::abs(gap) > static_cast<long long>(remaining[v]) * cap[c]) return false;
    }
    return true;
  }

  void apply(std::size_t e, std::size_t opt, int sign) {
    const auto [lo, hi] = lattice.edges[e];
    for (std::size_t c = 0; c < channels.size(); ++c) {
      balance[hi][c] += sign * options[opt][c];
      balance[lo][c] -= sign * options[opt][c];
    }
  }

  void go(std::size_t e) {
    if (++nodes_visited > max_nodes) throw BudgetExceeded("lattice current search exceeds the enumeration budget");
    if (e == lattice.edges.size()) {
      for (std::size_t v = 0; v < need.size(); ++v) {
        if (need[v] != balance[v]) return;
      }
      Histogram h;
      for (std::size_t k = 0; k < choice.size(); ++k) {
        add_to_histogram(h, option_pm[choice[k]].first, option_pm[choice[k]].second);
      }
      const double value = histogram_value(h, cost, step);
      ++leaves;
      if (visit) visit(current_of(choice), value);
      if (value < best) {
        best = value;
        best_choice = choice;
        best_leaf = leaves;
      }
      return;
    }
    const auto [lo, hi] = lattice.edges[e];
    --remaining[lo];
    --remaining[hi];
    for (std::size_t opt = 0; opt < options.size(); ++opt) {
      const double add = option_cost[opt] * step;
      if (partial + add > best + kPruneSlack) break;  // options are sorted by cost
      apply(e, opt, 1);
      if (admissible(lo) && admissible(hi)) {
        const double saved = partial;
        partial += add;
        choice[e] = opt;
        go(e + 1);
        partial = saved;
      }
      apply(e, opt, -1);
    }
    ++remaining[lo];
    ++remaining[hi];
  }
};

}  // namespace

SolveReport brute_force_lattice_current(const MailingInstance& inst, const LatticeGrid& grid, const PhiNorm& phi,
                                        const Alpha& alpha, const Budget& budget, const CurrentVisitor& visit) {
  const auto at = check_lattice_instance(inst, grid, budget);
  const Lattice lattice = make_lattice(grid);
  const auto cost = cost_table(inst.total(), phi, alpha);
  CurrentSearch s{inst, lattice, cost, to_double(grid.step), visit, {}, {}, {}, {}, {}, {}, {}, {}, {}, 0.0,
                  std::numeric_limits<double>::infinity(), {}, 0, 0, 0, budget.max_enumeration};
  for (std::size_t i = 0; i < inst.n(); ++i) {
    for (std::size_t j = 0; j < inst.n(); ++j) {
      if (inst.g(i, j) == 0) continue;
      s.channels.emplace_back(i, j);
      s.cap.push_back(inst.g(i, j));
    }
  }
  const std::size_t k = s.channels.size();

  // Every theta with |theta_c| <= g_c, ordered by cost.
  std::vector<long long> theta(k);
  for (std::size_t c = 0; c < k; ++c) theta[c] = -s.cap[c];
  while (true) {
    s.options.push_back(theta);
    std::size_t c = 0;
    while (c < k && theta[c] == s.cap[c]) {
      theta[c] = -s.cap[c];
      ++c;
    }
    if (c == k) break;
    ++theta[c];
  }
  std::vector<std::size_t> order(s.options.size());
  std::vector<double> raw_cost(s.options.size());
  std::vector<std::pair<long long, long long>> raw_pm(s.options.size());
  for (std::size_t o = 0; o < s.options.size(); ++o) {
    long long p = 0;
    long long q = 0;
    for (long long x : s.options[o]) (x > 0 ? p : q) += std::abs(x);
    raw_pm[o] = {p, q};
    raw_cost[o] = cost[p][q];
    order[o] = o;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw_cost[a] < raw_cost[b]; });
  std::vector<std::vector<long long>> sorted;
  for (std::size_t o : order) {
    sorted.push_back(s.options[o]);
    s.option_pm.push_back(raw_pm[o]);
    s.option_cost.push_back(raw_cost[o]);
  }
  s.options = std::move(sorted);

  const std::size_t nv = lattice.nodes.size();
  s.need.assign(nv, std::vector<long long>(k, 0));
  s.balance.assign(nv, std::vector<long long>(k, 0));
  for (std::size_t c = 0; c < k; ++c) {
    s.need[at[s.channels[c].second]][c] += s.cap[c];
    s.need[at[s.channels[c].first]][c] -= s.cap[c];
  }
  s.remaining.assign(nv, 0);
  for (const auto& [a, b] : lattice.edges) {
    ++s.remaining[a];
    ++s.remaining[b];
  }
  s.choice.assign(lattice.edges.size(), 0);
  s.go(0);
  if (s.best_choice.size() != lattice.edges.size()) throw Infeasible("no lattice current has boundary B");

  SolveReport report;
  report.method = "lattice-current";
  report.value = s.best;
  report.current = s.current_of(s.best_choice);
  report.enumerated = s.nodes_visited;
  report.evaluated = s.leaves;
  report.winner = "leaf " + std::to_string(s.best_leaf);
  report.config = lattice_config(grid, phi, alpha);
  return report;
}

}  // namespace oritrans
