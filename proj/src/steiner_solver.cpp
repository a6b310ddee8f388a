#include "oritrans/error.hpp"
#include "oritrans/solvers.hpp"

#include "format.hpp"
#include "parallel.hpp"

#include <bit>
#include <functional>
#include <limits>
#include <map>
#include <set>

namespace oritrans {

namespace {

using Edges = std::vector<std::pair<std::size_t, std::size_t>>;

// All full topologies on t >= 3 terminals (nodes 0..t-1) with Steiner nodes
// t..2t-3, built by inserting terminal k on every edge of each topology on
// the first k terminals.
std::vector<Edges> full_topologies(std::size_t t) {
  std::vector<Edges> current{{{t, 0}, {t, 1}, {t, 2}}};
  for (std::size_t k = 3; k < t; ++k) {
    const std::size_t steiner = t + k - 2;
    std::vector<Edges> next;
    for (const auto& topo : current) {
      for (std::size_t e = 0; e < topo.size(); ++e) {
        Edges grown = topo;
        const auto [a, b] = topo[e];
        grown[e] = {a, steiner};
        grown.emplace_back(steiner, b);
        grown.emplace_back(steiner, k);
        next.push_back(std::move(grown));
      }
    }
    current = std::move(next);
  }
  return current;
}

struct FullTree {
  double length = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> positions;  // local nodes, terminals first
  std::vector<std::size_t> root;
  Edges edges;
  std::size_t local_terminals = 0;
};

struct Choice {
  double length = std::numeric_limits<double>::infinity();
  std::size_t split = std::numeric_limits<std::size_t>::max();  // terminal, or none for a full tree
  unsigned left = 0;
  unsigned right = 0;
};

}  // namespace

SteinerTree steiner_minimal_tree(const std::vector<Point>& terminals, double tol, const Budget& budget) {
  const std::size_t t = terminals.size();
  if (t > budget.max_terminals) {
    throw BudgetExceeded(std::to_string(t) + " terminals exceed the limit of " + std::to_string(budget.max_terminals));
  }
  if (t > 16) throw BudgetExceeded("too many terminals for subset enumeration");
  SteinerTree out;
  if (t < 2) return out;
  std::vector<std::vector<double>> coords;
  for (const auto& p : terminals) coords.push_back(p.to_doubles());

  const unsigned full = (1u << t) - 1;
  std::vector<FullTree> fst(full + 1);
  struct Job {
    unsigned mask;
    std::size_t topology;
  };
  std::vector<Job> jobs;
  std::map<std::size_t, std::vector<Edges>> topologies;
  for (unsigned mask = 1; mask <= full; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size < 3) continue;
    auto& list = topologies[size];
    if (list.empty()) list = full_topologies(size);
    for (std::size_t k = 0; k < list.size(); ++k) jobs.push_back({mask, k});
  }
  if (jobs.size() > budget.max_enumeration) throw BudgetExceeded("Steiner topology enumeration exceeds the budget");

  std::vector<PositionResult> solved(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const unsigned mask = jobs[j].mask;
    std::vector<std::vector<double>> local;
    for (std::size_t i = 0; i < t; ++i) {
      if (mask & (1u << i)) local.push_back(coords[i]);
    }
    const auto& edges = topologies.at(local.size())[jobs[j].topology];
    solved[j] = optimize_weighted_positions(local.size(), local.size() - 2, edges,
                                            std::vector<double>(edges.size(), 1.0), local, tol,
                                            budget.max_iterations, budget.seed + j);
  });
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    FullTree& best = fst[jobs[j].mask];
    if (solved[j].value < best.length) {
      const auto size = static_cast<std::size_t>(std::popcount(jobs[j].mask));
      best = {solved[j].value, std::move(solved[j].positions), std::move(solved[j].root),
              topologies.at(size)[jobs[j].topology], size};
    }
  }
  out.topologies = jobs.size();

  std::vector<Choice> choice(full + 1);
  for (unsigned mask = 1; mask <= full; ++mask) {
    const auto size = std::popcount(mask);
    if (size < 2) continue;
    Choice& c = choice[mask];
    if (size == 2) {
      const auto a = static_cast<std::size_t>(std::countr_zero(mask));
      const auto b = static_cast<std::size_t>(std::countr_zero(mask & (mask - 1)));
      c.length = distance(terminals[a], terminals[b]);
      continue;
    }
    c.length = fst[mask].length;
    for (std::size_t s = 0; s < t; ++s) {
      if (!(mask & (1u << s))) continue;
      const unsigned rest = mask & ~(1u << s);
      for (unsigned a = (rest - 1) & rest; a > 0; a = (a - 1) & rest) {
        const unsigned b = rest & ~a;
        if (a < b) continue;
        const double len = choice[a | (1u << s)].length + choice[b | (1u << s)].length;
        if (len < c.length) c = {len, s, a | (1u << s), b | (1u << s)};
      }
    }
  }

  // Rebuild the winning tree with global node ids.
  std::function<void(unsigned)> emit = [&](unsigned mask) {
    const Choice& c = choice[mask];
    if (std::popcount(mask) == 2) {
      out.edges.emplace_back(std::countr_zero(mask), std::countr_zero(mask & (mask - 1)));
      return;
    }
    if (c.split != std::numeric_limits<std::size_t>::max()) {
      emit(c.left);
      emit(c.right);
      return;
    }
    const FullTree& f = fst[mask];
    std::vector<std::size_t> global(f.positions.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i < t; ++i) {
      if (mask & (1u << i)) global[r++] = i;
    }
    for (std::size_t v = f.local_terminals; v < f.positions.size(); ++v) {
      if (f.root[v] == v) {
        global[v] = t + out.steiner_points.size();
        out.steiner_points.push_back(f.positions[v]);
      }
    }
    for (std::size_t v = f.local_terminals; v < f.positions.size(); ++v) global[v] = global[f.root[v]];
    for (const auto& [a, b] : f.edges) {
      if (global[a] != global[b]) out.edges.emplace_back(global[a], global[b]);
    }
  };
  emit(full);
  out.length = choice[full].length;
  return out;
}

SolveReport solve_partitioned_steiner(const PartitionedInstance& inst, const Budget& budget, double tol) {
  if (inst.n() > budget.max_terminals) {
    throw BudgetExceeded(std::to_string(inst.n()) + " points exceed the limit of " +
                         std::to_string(budget.max_terminals));
  }
  const std::size_t k = inst.k();
  std::map<unsigned, SteinerTree> trees;  // by terminal mask
  auto tree_of = [&](unsigned mask) -> const SteinerTree& {
    auto it = trees.find(mask);
    if (it == trees.end()) {
      std::vector<Point> pts;
      for (std::size_t i = 0; i < inst.n(); ++i) {
        if (mask & (1u << i)) pts.push_back(inst.points()[i]);
      }
      it = trees.emplace(mask, steiner_minimal_tree(pts, tol, budget)).first;
    }
    return it->second;
  };

  // Coarsenings of the groups as restricted growth strings.
  std::vector<std::size_t> label(k, 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<unsigned> best_blocks;
  std::size_t coarsenings = 0;
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t pos, std::size_t used) {
    if (pos == k) {
      ++coarsenings;
      std::vector<unsigned> blocks(used, 0);
      for (std::size_t g = 0; g < k; ++g) {
        for (std::size_t p : inst.groups()[g]) blocks[label[g]] |= 1u << p;
      }
      double total = 0.0;
      for (unsigned mask : blocks) total += tree_of(mask).length;
      if (total < best) {
        best = total;
        best_blocks = blocks;
      }
      return;
    }
    for (std::size_t l = 0; l <= used && l < k; ++l) {
      label[pos] = l;
      walk(pos + 1, std::max(used, l + 1));
    }
  };
  walk(0, 0);

  Forest forest;
  forest.vertices = inst.points();
  std::map<Point, std::size_t> index;
  for (std::size_t i = 0; i < inst.n(); ++i) index.emplace(inst.points()[i], i);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::size_t topologies = 0;
  std::string winner;
  for (unsigned mask : best_blocks) {
    const SteinerTree& tree = tree_of(mask);
    topologies += tree.topologies;
    std::vector<std::size_t> members;
    winner += "{";
    for (std::size_t i = 0; i < inst.n(); ++i) {
      if (mask & (1u << i)) {
        winner += (members.empty() ? "" : ",") + std::to_string(i + 1);
        members.push_back(i);
      }
    }
    winner += "}";
    std::vector<std::size_t> global = members;
    for (const auto& sp : tree.steiner_points) {
      const Point p = Point::from_doubles(sp);
      auto [it, inserted] = index.try_emplace(p, forest.vertices.size());
      if (inserted) forest.vertices.push_back(p);
      global.push_back(it->second);
    }
    for (const auto& [a, b] : tree.edges) {
      const std::size_t u = std::min(global[a], global[b]);
      const std::size_t v = std::max(global[a], global[b]);
      if (u != v && seen.insert({u, v}).second) forest.edges.emplace_back(u, v);
    }
  }

  SolveReport report;
  report.method = "partitioned-steiner";
  report.current = tree_to_current(forest, inst);
  report.value = forest.length();
  report.forest = std::move(forest);
  report.enumerated = coarsenings;
  report.evaluated = topologies;
  report.winner = winner;
  report.config = {{"tol", format_number(tol)}, {"max_terminals", std::to_string(budget.max_terminals)}};
  return report;
}

}  // namespace oritrans
