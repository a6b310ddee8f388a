#pragma once

#include "oritrans/coefficients.hpp"
#include "oritrans/currents.hpp"
#include "oritrans/geometry.hpp"
#include "oritrans/mailing.hpp"
#include "oritrans/steiner.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace oritrans {

struct Budget {
  std::size_t max_grid = 5;               // lattice nodes per side
  long long max_units = 4;                // N = sum g_ij for the lattice oracles
  std::size_t max_enumeration = 20000000; // search nodes / candidates
  std::size_t max_terminals = 6;
  std::size_t max_steiner = 3;
  std::size_t max_iterations = 200000;
  std::uint64_t seed = 0;                 // base seed of the randomized position starts
};

// Worker threads used by the enumerating solvers; ORITRANS_THREADS caps it.
std::size_t worker_count();

struct SolveReport {
  double value = 0.0;
  std::optional<PathFamily> family;
  std::optional<PolyCurrent1> current;
  std::optional<Forest> forest;
  std::string method;
  std::size_t enumerated = 0;  // search nodes or candidates generated
  std::size_t evaluated = 0;   // complete candidates scored
  std::string winner;          // id of the best candidate
  bool converged = true;
  double residual = 0.0;
  std::vector<std::pair<std::string, std::string>> config;
};

// Square lattice {origin + step * (ix, iy)} with nx * ny nodes in the plane.
struct LatticeGrid {
  Rational x0 = 0;
  Rational y0 = 0;
  Rational step = 1;
  std::size_t nx = 1;
  std::size_t ny = 1;

  Point node(std::size_t ix, std::size_t iy) const;
  // Node index iy * nx + ix of p, or nullopt when p is not a lattice node.
  std::optional<std::size_t> locate(const Point& p) const;
};

// Called on every complete candidate the search reaches, with its value.
using FamilyVisitor = std::function<void(const PathFamily&, double)>;
using CurrentVisitor = std::function<void(const PolyCurrent1&, double)>;

// Global optimum over families of simple lattice paths (branch and bound).
SolveReport brute_force_lattice_mailing(const MailingInstance& inst, const LatticeGrid& grid, const PhiNorm& phi,
                                        const Alpha& alpha, const Budget& budget = {},
                                        const FamilyVisitor& visit = {});

// Global optimum over integer lattice currents with boundary B and
// |theta_ij| <= g_ij on every lattice edge.
SolveReport brute_force_lattice_current(const MailingInstance& inst, const LatticeGrid& grid, const PhiNorm& phi,
                                        const Alpha& alpha, const Budget& budget = {},
                                        const CurrentVisitor& visit = {});

// Graph on `terminals` fixed nodes followed by `steiner` free nodes, with an
// n x n integer multiplicity per edge (flattened row-major).
struct Topology {
  std::size_t terminals = 0;
  std::size_t steiner = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<long long>> multiplicity;
};

struct PositionResult {
  std::vector<std::vector<double>> positions;  // every node, terminals first
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double subgradient = 0.0;  // largest min-norm subgradient over free nodes
  // Node each node was merged into (itself when not merged); merged nodes
  // share their root's coordinates exactly.
  std::vector<std::size_t> root;
};

// Minimizes sum_e w_e |x_u - x_v| over the free nodes (convex). Steiner
// nodes that reach a neighbour are merged into it.
PositionResult optimize_weighted_positions(std::size_t terminals, std::size_t steiner,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                           const std::vector<double>& weights,
                                           const std::vector<std::vector<double>>& terminal_coords, double tol,
                                           std::size_t max_iterations, std::uint64_t seed = 0);

// Edge weights C(theta_e). Throws NonConvergence when the subgradient does
// not reach tol within the iteration budget.
PositionResult optimize_positions(const Topology& topology, const std::vector<Point>& terminals, const PhiNorm& phi,
                                  const Alpha& alpha, double tol, const Budget& budget = {},
                                  std::uint64_t seed = 0);

// Best network over enumerated graphs on the terminals plus at most
// max_steiner Steiner nodes, all unit path assignments and optimized positions.
SolveReport solve_mailing_topology(const MailingInstance& inst, const PhiNorm& phi, const Alpha& alpha,
                                   std::size_t max_steiner, const Budget& budget = {}, double tol = 1e-9);

// Steiner minimal tree of a terminal set, by full topologies joined at
// terminals. Exposed for tests.
struct SteinerTree {
  std::vector<std::vector<double>> steiner_points;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // terminals first, in input order
  double length = 0.0;
  std::size_t topologies = 0;
};
SteinerTree steiner_minimal_tree(const std::vector<Point>& terminals, double tol = 1e-10, const Budget& budget = {});

// Minimum over coarsenings of the partition of the sum of Steiner minimal trees.
SolveReport solve_partitioned_steiner(const PartitionedInstance& inst, const Budget& budget = {},
                                      double tol = 1e-10);

// min sum_e |e| ||theta_e|| over real coefficients on the support graph with
// boundary `b`. Douglas-Rachford for l^inf / l^1, averaged projected
// subgradient otherwise. The returned current is feasible up to rounding.
SolveReport solve_real_relaxation(const std::vector<Segment>& support, const AtomicMeasure0& b, const NormSpec& spec,
                                  double tol = 1e-6, const Budget& budget = {});

}  // namespace oritrans
