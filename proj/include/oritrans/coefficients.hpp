#pragma once

#include "oritrans/rational.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace oritrans {

// Symmetric monotone norm on R^2, evaluated on the nonnegative quadrant.
struct PhiNorm {
  enum class Kind { kL1, kLinf, kLr };
  Kind kind = Kind::kL1;
  double r = 2.0;  // only for kLr, r > 1

  static PhiNorm l1() { return {Kind::kL1, 2.0}; }
  static PhiNorm linf() { return {Kind::kLinf, 2.0}; }
  static PhiNorm lr(double r);

  std::string name() const;
};

double phi_eval(const PhiNorm& phi, double x, double y);

// Exponent alpha in [0, 1]; p = 1/alpha for the lifted norm, with the
// convention 0^alpha = 0 for every alpha including 0.
class Alpha {
 public:
  Alpha() = default;
  explicit Alpha(double value);
  explicit Alpha(const Rational& value);

  double value() const { return value_; }
  // x^alpha with 0^alpha = 0.
  double power(double x) const;

 private:
  double value_ = 1.0;
};

// phi(pos^alpha, neg^alpha): the per-point oriented mailing cost for a total
// forward count pos and backward count neg.
double oriented_cost(const PhiNorm& phi, const Alpha& alpha, double pos, double neg);

// C(theta) for an n x n integer matrix flattened row-major. Only the sums of
// positive and of negative entries matter.
double mailing_cost(std::span<const Rational> theta, const PhiNorm& phi, const Alpha& alpha);
double mailing_cost(std::span<const double> theta, const PhiNorm& phi, const Alpha& alpha);

// ||t||_{phi,alpha} = phi(||t^+||_p, ||t^-||_p) with p = 1/alpha.
double norm_phi_alpha(std::span<const double> t, const PhiNorm& phi, const Alpha& alpha);

struct NormSpec {
  enum class Kind { kLinf, kL1, kPhiAlpha };
  Kind kind = Kind::kLinf;
  PhiNorm phi;
  Alpha alpha;
  std::size_t dim = 0;  // 0 leaves the coefficient dimension unchecked

  static NormSpec linf(std::size_t m = 0) { return {Kind::kLinf, {}, Alpha(1.0), m}; }
  static NormSpec l1(std::size_t m = 0) { return {Kind::kL1, {}, Alpha(1.0), m}; }
  static NormSpec phi_alpha(PhiNorm phi, Alpha alpha, std::size_t m = 0) {
    return {Kind::kPhiAlpha, phi, alpha, m};
  }
};

double coeff_norm(std::span<const double> v, const NormSpec& spec);
double coeff_norm(std::span<const Rational> v, const NormSpec& spec);
double dual_norm(std::span<const double> v, const NormSpec& spec);

// R^m-valued 1-covector on R^d stored as a d x m matrix W (row-major);
// omega(tau, theta) = tau^T W theta, so column j is the vector w_j in R^d.
class CovectorMatrix {
 public:
  CovectorMatrix(std::size_t d, std::size_t m);
  CovectorMatrix(std::size_t d, std::size_t m, std::vector<double> row_major);

  std::size_t d() const { return d_; }
  std::size_t m() const { return m_; }
  double& operator()(std::size_t row, std::size_t col) { return entries_[row * m_ + col]; }
  double operator()(std::size_t row, std::size_t col) const { return entries_[row * m_ + col]; }
  const std::vector<double>& entries() const { return entries_; }

  // W^T tau: the coefficient functional omega(tau, .).
  std::vector<double> apply(std::span<const double> tau) const;
  double evaluate(std::span<const double> tau, std::span<const double> theta) const;
  std::vector<double> column(std::size_t j) const;

 private:
  std::size_t d_;
  std::size_t m_;
  std::vector<double> entries_;
};

struct ComassResult {
  double value = 0.0;
  // True when the value comes from a closed form or a finite enumeration;
  // otherwise it is a sampled lower estimate accurate to `tolerance`.
  bool exact = true;
  double tolerance = 0.0;
};

// Largest coefficient dimension accepted by the sign/subset enumerations.
inline constexpr std::size_t kMaxEnumeratedChannels = 20;

ComassResult comass(const CovectorMatrix& w, const NormSpec& spec, double tol = 1e-9);

// Dense sampling of the unit sphere with local refinement; usable for every
// norm kind. Exposed so the exact paths can be cross-checked.
ComassResult comass_sampled(const CovectorMatrix& w, const NormSpec& spec, double tol = 1e-9);

}  // namespace oritrans
