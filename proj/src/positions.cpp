#include "oritrans/error.hpp"
#include "oritrans/solvers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace oritrans {

namespace {

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

struct State {
  std::size_t terminals;
  const std::vector<std::pair<std::size_t, std::size_t>>& edges;
  const std::vector<double>& weights;
  std::vector<std::vector<double>> pos;
  std::vector<std::size_t> parent;
  std::vector<std::vector<std::size_t>> incident;  // positive-weight edges per node
  double eps = 0.0;                                // coincidence threshold
  double escape = 0.0;                             // step used to leave a neighbour

  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }

  bool fixed(std::size_t root) const { return root < terminals; }

  const std::vector<double>& at(std::size_t v) { return pos[find(v)]; }

  double objective() {
    double total = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (weights[e] > 0.0) total += weights[e] * dist(at(edges[e].first), at(edges[e].second));
    }
    return total;
  }

  // Minimum-norm subgradient of the objective with respect to the position
  // of cluster `root`.
  double residual(std::size_t root) {
    std::vector<double> g(pos[root].size(), 0.0);
    double slack = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (weights[e] <= 0.0) continue;
      const std::size_t a = find(edges[e].first);
      const std::size_t b = find(edges[e].second);
      if ((a == root) == (b == root)) continue;
      const std::size_t other = a == root ? b : a;
      const double d = dist(pos[root], pos[other]);
      if (d <= eps) {
        slack += weights[e];
        continue;
      }
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += weights[e] * (pos[root][k] - pos[other][k]) / d;
    }
    double norm = 0.0;
    for (double x : g) norm += x * x;
    return std::max(0.0, std::sqrt(norm) - slack);
  }

  // Merges Steiner node v into neighbour u when x_v = x_u is optimal for v
  // with every other node held fixed.
  void snap(std::size_t v) {
    for (std::size_t e : incident[v]) {
      const std::size_t u = edges[e].first == v ? edges[e].second : edges[e].first;
      if (find(u) == find(v)) continue;
      const std::vector<double> y = at(u);
      std::vector<double> pull(y.size(), 0.0);
      double slack = 0.0;
      for (std::size_t f : incident[v]) {
        const std::size_t w = edges[f].first == v ? edges[f].second : edges[f].first;
        const auto& pw = at(w);
        const double d = dist(y, pw);
        if (d <= eps) {
          slack += weights[f];
          continue;
        }
        for (std::size_t k = 0; k < y.size(); ++k) pull[k] += weights[f] * (y[k] - pw[k]) / d;
      }
      double norm = 0.0;
      for (double x : pull) norm += x * x;
      norm = std::sqrt(norm);
      if (norm <= slack) {
        parent[v] = find(u);
        return;
      }
      // Sitting on u without being optimal there: step off along the descent
      // direction, otherwise the w / d weights would pin the node.
      if (dist(pos[v], y) <= eps) {
        for (std::size_t k = 0; k < y.size(); ++k) pos[v][k] = y[k] - escape * pull[k] / norm;
        return;
      }
    }
  }
};

}  // namespace

PositionResult optimize_weighted_positions(std::size_t terminals, std::size_t steiner,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                           const std::vector<double>& weights,
                                           const std::vector<std::vector<double>>& terminal_coords, double tol,
                                           std::size_t max_iterations, std::uint64_t seed) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (terminal_coords.size() != terminals || terminals == 0) throw InvalidArgument("terminal coordinates missing");
  if (weights.size() != edges.size()) throw InvalidArgument("one weight per edge is required");
  const std::size_t nv = terminals + steiner;
  const std::size_t d = terminal_coords.front().size();
  for (const auto& [a, b] : edges) {
    if (a >= nv || b >= nv || a == b) throw InvalidArgument("topology edge is invalid");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("edge weights must be finite and nonnegative");
  }

  State s{terminals, edges, weights, {}, {}, {}, 0.0, 0.0};
  s.pos = terminal_coords;
  s.pos.resize(nv, std::vector<double>(d, 0.0));
  s.parent.resize(nv);
  std::iota(s.parent.begin(), s.parent.end(), 0);
  s.incident.resize(nv);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (weights[e] <= 0.0) continue;
    s.incident[edges[e].first].push_back(e);
    s.incident[edges[e].second].push_back(e);
  }
  double scale = 0.0;
  std::vector<double> centroid(d, 0.0);
  for (std::size_t t = 0; t < terminals; ++t) {
    for (std::size_t k = 0; k < d; ++k) centroid[k] += terminal_coords[t][k] / static_cast<double>(terminals);
    for (std::size_t u = 0; u < t; ++u) scale = std::max(scale, dist(terminal_coords[t], terminal_coords[u]));
  }
  if (scale == 0.0) scale = 1.0;
  s.eps = 1e-13 * scale;
  s.escape = 1e-7 * scale;

  // Start every Steiner node at the centroid, relax towards its neighbours,
  // then perturb so that no edge starts at zero length.
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 12345);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (std::size_t v = terminals; v < nv; ++v) s.pos[v] = centroid;
  for (int sweep = 0; sweep < 30; ++sweep) {
    for (std::size_t v = terminals; v < nv; ++v) {
      if (s.incident[v].empty()) continue;
      std::vector<double> avg(d, 0.0);
      for (std::size_t e : s.incident[v]) {
        const std::size_t u = edges[e].first == v ? edges[e].second : edges[e].first;
        for (std::size_t k = 0; k < d; ++k) avg[k] += s.pos[u][k] / static_cast<double>(s.incident[v].size());
      }
      s.pos[v] = avg;
    }
  }
  for (std::size_t v = terminals; v < nv; ++v) {
    for (std::size_t k = 0; k < d; ++k) s.pos[v][k] += 1e-2 * scale * jitter(rng);
  }

  PositionResult out;
  double value = s.objective();
  std::size_t stalled = 0;
  std::size_t it = 0;
  for (; it < max_iterations; ++it) {
    // Merges are recomputed from scratch so that a node can leave a cluster
    // once its neighbours have moved.
    std::iota(s.parent.begin(), s.parent.end(), 0);
    for (std::size_t v = terminals; v < nv; ++v) s.snap(v);
    for (std::size_t v = terminals; v < nv; ++v) s.pos[v] = s.pos[s.find(v)];
    value = s.objective();

    std::vector<std::size_t> free_roots;
    std::vector<long> index(nv, -1);
    for (std::size_t v = terminals; v < nv; ++v) {
      if (s.find(v) == v) {
        index[v] = static_cast<long>(free_roots.size());
        free_roots.push_back(v);
      }
    }
    double worst = 0.0;
    for (std::size_t r : free_roots) worst = std::max(worst, s.residual(r));
    out.subgradient = worst;
    if (worst <= tol) {
      out.converged = true;
      break;
    }

    // Majorize-minimize step: weighted least squares with weights w_e / d_e.
    const std::size_t nf = free_roots.size();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(static_cast<long>(nf), static_cast<long>(nf));
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<long>(nf), static_cast<long>(d));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (weights[e] <= 0.0) continue;
      const std::size_t a = s.find(edges[e].first);
      const std::size_t b = s.find(edges[e].second);
      if (a == b) continue;
      const double c = weights[e] / std::max(dist(s.pos[a], s.pos[b]), s.eps);
      const long ia = index[a];
      const long ib = index[b];
      if (ia >= 0) lap(ia, ia) += c;
      if (ib >= 0) lap(ib, ib) += c;
      if (ia >= 0 && ib >= 0) {
        lap(ia, ib) -= c;
        lap(ib, ia) -= c;
      } else if (ia >= 0) {
        for (std::size_t k = 0; k < d; ++k) rhs(ia, static_cast<long>(k)) += c * s.pos[b][k];
      } else if (ib >= 0) {
        for (std::size_t k = 0; k < d; ++k) rhs(ib, static_cast<long>(k)) += c * s.pos[a][k];
      }
    }
    // A small proximal term keeps components without a fixed node solvable.
    const double ridge = 1e-14 * (1.0 + lap.diagonal().cwiseAbs().maxCoeff());
    for (std::size_t f = 0; f < nf; ++f) {
      lap(static_cast<long>(f), static_cast<long>(f)) += ridge;
      for (std::size_t k = 0; k < d; ++k) {
        rhs(static_cast<long>(f), static_cast<long>(k)) += ridge * s.pos[free_roots[f]][k];
      }
    }
    const Eigen::MatrixXd next = lap.ldlt().solve(rhs);
    const auto saved = s.pos;
    for (std::size_t f = 0; f < nf; ++f) {
      for (std::size_t k = 0; k < d; ++k) s.pos[free_roots[f]][k] = next(static_cast<long>(f), static_cast<long>(k));
    }
    for (std::size_t v = terminals; v < nv; ++v) s.pos[v] = s.pos[s.find(v)];
    const double updated = s.objective();
    if (!(updated <= value * (1.0 + 1e-14))) {
      s.pos = saved;
      ++stalled;
    } else {
      // Near the optimum the objective decrease is quadratic in the step and
      // drops below rounding long before the positions settle.
      double step = 0.0;
      for (std::size_t r : free_roots) step = std::max(step, dist(s.pos[r], saved[r]));
      stalled = step <= 1e-15 * scale ? stalled + 1 : 0;
      value = updated;
    }
    if (stalled >= 50) break;
  }
  out.iterations = it;
  out.value = s.objective();
  out.positions = s.pos;
  out.root.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) out.root[v] = s.find(v);
  return out;
}

PositionResult optimize_positions(const Topology& topology, const std::vector<Point>& terminals, const PhiNorm& phi,
                                  const Alpha& alpha, double tol, const Budget& budget, std::uint64_t seed) {
  if (terminals.size() != topology.terminals) throw InvalidArgument("terminal count differs from the topology");
  if (topology.multiplicity.size() != topology.edges.size()) {
    throw InvalidArgument("one multiplicity per topology edge is required");
  }
  std::vector<double> weights;
  for (const auto& theta : topology.multiplicity) {
    std::vector<double> t(theta.begin(), theta.end());
    weights.push_back(mailing_cost(t, phi, alpha));
  }
  std::vector<std::vector<double>> coords;
  for (const auto& p : terminals) coords.push_back(p.to_doubles());
  PositionResult r = optimize_weighted_positions(topology.terminals, topology.steiner, topology.edges, weights, coords,
                                                 tol, budget.max_iterations, seed);
  if (!r.converged) {
    throw NonConvergence("position optimization stopped with subgradient " + std::to_string(r.subgradient) +
                         " after " + std::to_string(r.iterations) + " iterations");
  }
  return r;
}

}  // namespace oritrans
