#pragma once

#include "oritrans/currents.hpp"
#include "oritrans/geometry.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace oritrans {

// Points p_1..p_n split into k groups of size >= 2. Within a group the last
// listed member is the hub: it receives minus the sum of the others' vectors.
class PartitionedInstance {
 public:
  PartitionedInstance(std::vector<Point> points, std::vector<std::vector<std::size_t>> groups);

  std::size_t n() const { return points_.size(); }
  std::size_t k() const { return groups_.size(); }
  // Coefficient dimension n - k.
  std::size_t m() const { return n() - k(); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
  std::size_t group_of(std::size_t point) const { return group_of_[point]; }
  // First basis index used by group i.
  std::size_t block_start(std::size_t group) const { return block_start_[group]; }

 private:
  std::vector<Point> points_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> group_of_;
  std::vector<std::size_t> block_start_;
};

// g_l for every point l (indexed like the points), in Z^{n-k}.
std::vector<Coef> build_g_vectors(const PartitionedInstance& inst);

AtomicMeasure0 build_boundary_steiner(const PartitionedInstance& inst);

// A straight-edge network. Vertices 0..n-1 are the terminals in instance
// order; further vertices are Steiner points.
struct Forest {
  std::vector<Point> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  double length() const;
};

// Throws InvalidArgument unless the forest is acyclic, its first n vertices
// are the terminals and every group lies in one component.
void validate_forest(const Forest& forest, const PartitionedInstance& inst);

// For each group, the unique forest path from the hub to every other member
// carries that member's basis vector.
PolyCurrent1 tree_to_current(const Forest& forest, const PartitionedInstance& inst);

}  // namespace oritrans
