#pragma once

#include "oritrans/coefficients.hpp"
#include "oritrans/currents.hpp"
#include "oritrans/geometry.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace oritrans {

// One trajectory of commodity (i, j): a polyline from p_i to p_j.
struct LabeledPath {
  std::size_t i = 0;
  std::size_t j = 0;
  Polyline path;
};

class PathFamily {
 public:
  PathFamily(MailingInstance instance, std::vector<LabeledPath> paths);

  const MailingInstance& instance() const { return instance_; }
  const std::vector<LabeledPath>& paths() const { return paths_; }

 private:
  MailingInstance instance_;
  std::vector<LabeledPath> paths_;
};

// Reason the family is not compatible with (S, G), or nullopt.
std::optional<std::string> compatibility_problem(const PathFamily& f);
bool check_compatible(const PathFamily& f);

// theta^+ and theta^- on the atoms of the overlay of all path segments,
// relative to each atom's stored orientation sigma.
struct ThetaAtom {
  Segment segment;
  long long plus = 0;
  long long minus = 0;
  // Indices of the covering paths that run with / against sigma.
  std::vector<std::size_t> with;
  std::vector<std::size_t> against;
};

struct ThetaField {
  std::vector<ThetaAtom> atoms;

  // Reverses sigma on atom k: the segment and both counts swap.
  void flip(std::size_t k);
};

ThetaField theta_pm(const PathFamily& f);

// sum over atoms of phi(theta_-^alpha, theta_+^alpha) * length.
double energy_theta(const ThetaField& theta, const PhiNorm& phi, const Alpha& alpha);
double energy_family(const PathFamily& f, const PhiNorm& phi, const Alpha& alpha);

// T_F = sum over paths of [gamma] E_ij, coefficients in Z^{n x n}.
PolyCurrent1 family_to_current(const PathFamily& f);

struct FamilyFromCurrent {
  PathFamily family;
  double dropped_cycle_length = 0.0;
};

// Splits every channel of T into unit paths p_i -> p_j and drops the cycles.
FamilyFromCurrent current_to_family(const PolyCurrent1& t, const MailingInstance& inst);

}  // namespace oritrans
