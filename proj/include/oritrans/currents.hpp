#pragma once

#include "oritrans/coefficients.hpp"
#include "oritrans/geometry.hpp"
#include "oritrans/rational.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace oritrans {

enum class Ring { kInteger, kReal };

using Coef = std::vector<Rational>;

Coef unit_coef(std::size_t m, std::size_t index);
bool is_zero(const Coef& c);

// Polyhedral 1-current with coefficients in Z^m or R^m. Always stored
// normalized: atoms come from the overlay of the input segments, carry the
// orientation-corrected sum of coefficients, and zero atoms are dropped.
class PolyCurrent1 {
 public:
  struct Atom {
    Segment segment;
    Coef coef;
  };

  PolyCurrent1(std::size_t m, Ring ring);
  PolyCurrent1(std::size_t m, Ring ring, std::vector<Atom> raw);

  std::size_t m() const { return m_; }
  Ring ring() const { return ring_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }

  PolyCurrent1 operator+(const PolyCurrent1& other) const;
  PolyCurrent1 operator-() const;
  PolyCurrent1 operator-(const PolyCurrent1& other) const { return *this + (-other); }

  // Restriction to one coefficient channel, as an m = 1 current.
  PolyCurrent1 channel(std::size_t index) const;

 private:
  std::size_t m_;
  Ring ring_;
  std::vector<Atom> atoms_;
};

// Same current as a measure-theoretic object, regardless of subdivision.
bool equivalent(const PolyCurrent1& lhs, const PolyCurrent1& rhs);

// Current carried by a polyline with a constant coefficient.
PolyCurrent1 polyline_current(const Polyline& path, const Coef& coef, Ring ring = Ring::kInteger);

// Finite sum of weighted Dirac masses, merged by point, zero atoms dropped,
// sorted by point.
class AtomicMeasure0 {
 public:
  struct Atom {
    Point point;
    Coef coef;
  };

  explicit AtomicMeasure0(std::size_t m);
  AtomicMeasure0(std::size_t m, std::vector<Atom> raw);

  std::size_t m() const { return m_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  // Coefficient at p (zero when p carries no mass).
  Coef at(const Point& p) const;

  AtomicMeasure0 operator+(const AtomicMeasure0& other) const;
  AtomicMeasure0 operator-() const;

  friend bool operator==(const AtomicMeasure0& lhs, const AtomicMeasure0& rhs);

 private:
  std::size_t m_;
  std::vector<Atom> atoms_;
};

// Points p_1..p_n and a nonnegative integer demand matrix with zero diagonal.
class MailingInstance {
 public:
  MailingInstance(std::vector<Point> points, std::vector<std::vector<long long>> demand);

  std::size_t n() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  long long g(std::size_t i, std::size_t j) const { return demand_[i][j]; }
  const std::vector<std::vector<long long>>& demand() const { return demand_; }
  long long total() const;  // N = sum g_ij
  // Coefficient channel of pair (i, j) in Z^{n x n}, row-major.
  std::size_t channel(std::size_t i, std::size_t j) const { return i * n() + j; }

 private:
  std::vector<Point> points_;
  std::vector<std::vector<long long>> demand_;
};

// Ordering I_1..I_{n^2} of the pairs together with the block of basis
// indices of Z^N assigned to each pair.
class PairOrdering {
 public:
  struct Block {
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t start = 0;  // 0-based first basis index
    std::size_t size = 0;   // g_ij
  };

  // Row-major order of (i, j).
  explicit PairOrdering(const MailingInstance& inst);
  // `order` must list every pair (i, j) exactly once.
  PairOrdering(const MailingInstance& inst, const std::vector<std::pair<std::size_t, std::size_t>>& order);

  std::size_t n() const { return n_; }
  std::size_t total() const { return total_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block_of(std::size_t i, std::size_t j) const;
  // theta_I: the sum of the block's basis vectors.
  Coef theta(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::size_t total_ = 0;
  std::vector<Block> blocks_;
  std::vector<std::size_t> index_;  // pair channel -> position in blocks_
};

AtomicMeasure0 boundary(const PolyCurrent1& t);

double mass(const PolyCurrent1& t, const NormSpec& spec);

// Integral of C(theta) over the current; theta is read as an n x n matrix.
double energy(const PolyCurrent1& t, const PhiNorm& phi, const Alpha& alpha);

// B = sum_t G^t delta_{p_t}, coefficients in Z^{n x n}.
AtomicMeasure0 build_boundary_mailing(const MailingInstance& inst);

// The relaxed boundary sum_l theta_{I_l} (delta_{p_j} - delta_{p_i}) in Z^N.
AtomicMeasure0 build_boundary_relaxed(const MailingInstance& inst, const PairOrdering& ord);

struct FlowDecomposition {
  // Unit paths oriented along the flow, each from a source to a sink.
  std::vector<Polyline> paths;
  // Closed vertex loops (first vertex repeated at the end) with their
  // multiplicity.
  std::vector<std::pair<std::vector<Point>, long long>> cycles;
  double cycle_length = 0.0;  // sum of multiplicity * length over cycles
};

// Splits an m = 1 integer current into unit source-to-sink paths and cycles.
// Greedy extraction from sources, lowest edge id first, then cycle peeling.
FlowDecomposition decompose_component(const PolyCurrent1& t);

// Drops every cycle of every channel; the boundary is unchanged and the
// (alpha, phi)-energy does not increase.
PolyCurrent1 remove_cycles(const PolyCurrent1& t);

struct CycleRemoval {
  PolyCurrent1 current;
  double dropped_cycle_length = 0.0;
};
CycleRemoval remove_cycles_with_report(const PolyCurrent1& t);

// Canonical Z^N current of a cycle-reduced Z^{n x n} current: the l-th path of
// channel (i, j) carries the l-th basis vector of that pair's block.
PolyCurrent1 lift_to_relaxed(const PolyCurrent1& t, const MailingInstance& inst, const PairOrdering& ord);

// Reverse map: sums each block back into its (i, j) entry.
PolyCurrent1 project_relaxed(const PolyCurrent1& r, const PairOrdering& ord);

}  // namespace oritrans
