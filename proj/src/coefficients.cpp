#include "oritrans/coefficients.hpp"

#include "oritrans/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oritrans {

namespace {

// ||x||_p for a nonnegative vector with p = 1/inv_p (inv_p = 0 is the max
// norm). Scaled by the largest entry so that 0/1 vectors evaluate to
// count^inv_p with no rounding beyond the final power.
double lp_nonneg(std::span<const double> x, double inv_p) {
  double largest = 0.0;
  for (double v : x) largest = std::max(largest, v);
  if (largest == 0.0) return 0.0;
  if (inv_p == 0.0) return largest;
  if (inv_p == 1.0) {
    double sum = 0.0;
    for (double v : x) sum += v;
    return sum;
  }
  const double p = 1.0 / inv_p;
  double sum = 0.0;
  for (double v : x) {
    if (v > 0.0) sum += v == largest ? 1.0 : std::pow(v / largest, p);
  }
  return largest * std::pow(sum, inv_p);
}

void split_signs(std::span<const double> v, std::vector<double>& pos, std::vector<double>& neg) {
  pos.clear();
  neg.clear();
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument("non-finite coefficient");
    if (x > 0.0) pos.push_back(x);
    if (x < 0.0) neg.push_back(-x);
  }
}

double dual_phi(const PhiNorm& phi, double a, double b) {
  switch (phi.kind) {
    case PhiNorm::Kind::kL1:
      return std::max(a, b);
    case PhiNorm::Kind::kLinf:
      return a + b;
    case PhiNorm::Kind::kLr: {
      const double conj = phi.r / (phi.r - 1.0);
      return phi_eval(PhiNorm::lr(conj), a, b);
    }
  }
  return 0.0;
}

void check_dim(std::size_t got, const NormSpec& spec) {
  if (spec.dim != 0 && got != spec.dim) {
    throw InvalidArgument("coefficient dimension " + std::to_string(got) + " does not match norm dimension " +
                          std::to_string(spec.dim));
  }
}

double euclid(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

PhiNorm PhiNorm::lr(double r) {
  if (!(r > 1.0) || !std::isfinite(r)) throw InvalidArgument("phi = l^r needs 1 < r < inf");
  return {Kind::kLr, r};
}

std::string PhiNorm::name() const {
  switch (kind) {
    case Kind::kL1:
      return "l1";
    case Kind::kLinf:
      return "linf";
    case Kind::kLr:
      return "l" + std::to_string(r);
  }
  return "?";
}

double phi_eval(const PhiNorm& phi, double x, double y) {
  if (x < 0.0 || y < 0.0) throw InvalidArgument("phi is evaluated on the nonnegative quadrant only");
  switch (phi.kind) {
    case PhiNorm::Kind::kL1:
      return x + y;
    case PhiNorm::Kind::kLinf:
      return std::max(x, y);
    case PhiNorm::Kind::kLr: {
      const double big = std::max(x, y);
      if (big == 0.0) return 0.0;
      // Symmetric in (x, y) bit for bit: both terms are formed the same way.
      return big * std::pow(std::pow(x / big, phi.r) + std::pow(y / big, phi.r), 1.0 / phi.r);
    }
  }
  return 0.0;
}

Alpha::Alpha(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
}

Alpha::Alpha(const Rational& value) : Alpha(to_double(value)) {}

double Alpha::power(double x) const {
  if (x == 0.0) return 0.0;
  if (value_ == 0.0) return 1.0;
  if (value_ == 1.0) return x;
  return std::pow(x, value_);
}

double oriented_cost(const PhiNorm& phi, const Alpha& alpha, double pos, double neg) {
  return phi_eval(phi, alpha.power(pos), alpha.power(neg));
}

double mailing_cost(std::span<const Rational> theta, const PhiNorm& phi, const Alpha& alpha) {
  Rational pos = 0;
  Rational neg = 0;
  for (const auto& t : theta) {
    if (t > 0) pos += t;
    if (t < 0) neg -= t;
  }
  return oriented_cost(phi, alpha, to_double(pos), to_double(neg));
}

double mailing_cost(std::span<const double> theta, const PhiNorm& phi, const Alpha& alpha) {
  double pos = 0.0;
  double neg = 0.0;
  for (double t : theta) {
    if (t > 0.0) pos += t;
    if (t < 0.0) neg -= t;
  }
  return oriented_cost(phi, alpha, pos, neg);
}

double norm_phi_alpha(std::span<const double> t, const PhiNorm& phi, const Alpha& alpha) {
  std::vector<double> pos;
  std::vector<double> neg;
  split_signs(t, pos, neg);
  return phi_eval(phi, lp_nonneg(pos, alpha.value()), lp_nonneg(neg, alpha.value()));
}

double coeff_norm(std::span<const double> v, const NormSpec& spec) {
  check_dim(v.size(), spec);
  switch (spec.kind) {
    case NormSpec::Kind::kLinf: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
    case NormSpec::Kind::kL1: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    case NormSpec::Kind::kPhiAlpha:
      return norm_phi_alpha(v, spec.phi, spec.alpha);
  }
  return 0.0;
}

double coeff_norm(std::span<const Rational> v, const NormSpec& spec) {
  std::vector<double> d;
  d.reserve(v.size());
  for (const auto& x : v) d.push_back(to_double(x));
  return coeff_norm(d, spec);
}

double dual_norm(std::span<const double> v, const NormSpec& spec) {
  check_dim(v.size(), spec);
  switch (spec.kind) {
    case NormSpec::Kind::kLinf: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    case NormSpec::Kind::kL1: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
    case NormSpec::Kind::kPhiAlpha: {
      std::vector<double> pos;
      std::vector<double> neg;
      split_signs(v, pos, neg);
      // q is the conjugate of p = 1/alpha, so 1/q = 1 - alpha.
      const double inv_q = 1.0 - spec.alpha.value();
      return dual_phi(spec.phi, lp_nonneg(pos, inv_q), lp_nonneg(neg, inv_q));
    }
  }
  return 0.0;
}

CovectorMatrix::CovectorMatrix(std::size_t d, std::size_t m) : d_(d), m_(m), entries_(d * m, 0.0) {}

CovectorMatrix::CovectorMatrix(std::size_t d, std::size_t m, std::vector<double> row_major)
    : d_(d), m_(m), entries_(std::move(row_major)) {
  if (entries_.size() != d * m) throw InvalidArgument("covector matrix has wrong number of entries");
  for (double x : entries_) {
    if (!std::isfinite(x)) throw InvalidArgument("covector matrix has non-finite entry");
  }
}

std::vector<double> CovectorMatrix::apply(std::span<const double> tau) const {
  if (tau.size() != d_) throw InvalidArgument("tangent dimension mismatch");
  std::vector<double> out(m_, 0.0);
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) out[j] += tau[i] * (*this)(i, j);
  }
  return out;
}

double CovectorMatrix::evaluate(std::span<const double> tau, std::span<const double> theta) const {
  if (theta.size() != m_) throw InvalidArgument("coefficient dimension mismatch");
  const auto y = apply(tau);
  double s = 0.0;
  for (std::size_t j = 0; j < m_; ++j) s += y[j] * theta[j];
  return s;
}

std::vector<double> CovectorMatrix::column(std::size_t j) const {
  std::vector<double> out(d_);
  for (std::size_t i = 0; i < d_; ++i) out[i] = (*this)(i, j);
  return out;
}

namespace {

// max over s in {+-1}^m of |sum_j s_j w_j|; s_0 = +1 by symmetry.
double sign_enumeration(const CovectorMatrix& w) {
  const std::size_t m = w.m();
  if (m == 0) return 0.0;
  if (m > kMaxEnumeratedChannels) throw InvalidArgument("comass sign enumeration limited to 20 channels");
  double best = 0.0;
  std::vector<double> acc(w.d());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (m - 1)); ++mask) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const double s = (j > 0 && ((mask >> (j - 1)) & 1U)) ? -1.0 : 1.0;
      for (std::size_t i = 0; i < w.d(); ++i) acc[i] += s * w(i, j);
    }
    best = std::max(best, euclid(acc));
  }
  return best;
}

// max over subsets J of |sum_{j in J} w_j|.
double subset_enumeration(const CovectorMatrix& w) {
  const std::size_t m = w.m();
  if (m > kMaxEnumeratedChannels) throw InvalidArgument("comass subset enumeration limited to 20 channels");
  double best = 0.0;
  std::vector<double> acc(w.d());
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if ((mask >> j) & 1U) {
        for (std::size_t i = 0; i < w.d(); ++i) acc[i] += w(i, j);
      }
    }
    best = std::max(best, euclid(acc));
  }
  return best;
}

double max_column(const CovectorMatrix& w) {
  double best = 0.0;
  for (std::size_t j = 0; j < w.m(); ++j) best = std::max(best, euclid(w.column(j)));
  return best;
}

double max_column_or_difference(const CovectorMatrix& w) {
  double best = max_column(w);
  for (std::size_t i = 0; i < w.m(); ++i) {
    for (std::size_t j = i + 1; j < w.m(); ++j) {
      auto a = w.column(i);
      const auto b = w.column(j);
      for (std::size_t k = 0; k < a.size(); ++k) a[k] -= b[k];
      best = std::max(best, euclid(a));
    }
  }
  return best;
}

double dual_at(const CovectorMatrix& w, const NormSpec& spec, std::span<const double> tau) {
  return dual_norm(w.apply(tau), spec);
}

double golden_max(const CovectorMatrix& w, const NormSpec& spec, double lo, double hi, double tol) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double angle) {
    const double tau[2] = {std::cos(angle), std::sin(angle)};
    return dual_at(w, spec, tau);
  };
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = f(x1);
    }
  }
  return std::max({f1, f2, f(0.5 * (lo + hi))});
}

ComassResult sampled_2d(const CovectorMatrix& w, const NormSpec& spec, double tol) {
  constexpr int kSamples = 4096;
  const double step = std::numbers::pi / kSamples;
  std::vector<std::pair<double, double>> values;
  values.reserve(kSamples);
  for (int k = 0; k < kSamples; ++k) {
    const double angle = k * step;
    const double tau[2] = {std::cos(angle), std::sin(angle)};
    values.emplace_back(dual_at(w, spec, tau), angle);
  }
  std::partial_sort(values.begin(), values.begin() + 8, values.end(), std::greater<>());
  double best = values.front().first;
  for (int k = 0; k < 8; ++k) {
    const double center = values[k].second;
    best = std::max(best, golden_max(w, spec, center - step, center + step, std::max(tol, 1e-14)));
  }
  return {best, false, tol};
}

std::vector<double> sphere(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

ComassResult sampled_3d(const CovectorMatrix& w, const NormSpec& spec, double tol) {
  constexpr int kSamples = 20000;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<std::pair<double, std::pair<double, double>>> values;
  values.reserve(kSamples);
  for (int k = 0; k < kSamples; ++k) {
    // Upper hemisphere suffices: the dual norm is even in tau.
    const double z = 1.0 - (k + 0.5) / kSamples;
    const double polar = std::acos(z);
    const double azimuth = golden * k;
    values.push_back({dual_at(w, spec, sphere(polar, azimuth)), {polar, azimuth}});
  }
  std::partial_sort(values.begin(), values.begin() + 8, values.end(),
                    [](const auto& l, const auto& r) { return l.first > r.first; });
  double best = values.front().first;
  for (int k = 0; k < 8; ++k) {
    auto [polar, azimuth] = values[k].second;
    double current = values[k].first;
    double h = 0.05;
    while (h > std::max(tol, 1e-13)) {
      bool moved = false;
      for (auto [dp, da] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}) {
        const double v = dual_at(w, spec, sphere(polar + dp, azimuth + da));
        if (v > current) {
          current = v;
          polar += dp;
          azimuth += da;
          moved = true;
        }
      }
      if (!moved) h *= 0.5;
    }
    best = std::max(best, current);
  }
  return {best, false, tol};
}

}  // namespace

ComassResult comass_sampled(const CovectorMatrix& w, const NormSpec& spec, double tol) {
  if (w.m() == 0) return {0.0, true, 0.0};
  if (w.d() == 2) return sampled_2d(w, spec, tol);
  if (w.d() == 3) return sampled_3d(w, spec, tol);
  throw InvalidArgument("comass is implemented for d = 2 and d = 3");
}

ComassResult comass(const CovectorMatrix& w, const NormSpec& spec, double tol) {
  check_dim(w.m(), spec);
  switch (spec.kind) {
    case NormSpec::Kind::kLinf:
      // sup_{|tau|=1} sum_j |<tau, w_j>| = max_s |sum_j s_j w_j|
      return {sign_enumeration(w), true, 0.0};
    case NormSpec::Kind::kL1:
      return {max_column(w), true, 0.0};
    case NormSpec::Kind::kPhiAlpha: {
      const double a = spec.alpha.value();
      const auto kind = spec.phi.kind;
      if (a == 0.0 && kind == PhiNorm::Kind::kL1) return {subset_enumeration(w), true, 0.0};
      if (a == 0.0 && kind == PhiNorm::Kind::kLinf) return {sign_enumeration(w), true, 0.0};
      if (a == 1.0 && kind == PhiNorm::Kind::kL1) return {max_column(w), true, 0.0};
      if (a == 1.0 && kind == PhiNorm::Kind::kLinf) return {max_column_or_difference(w), true, 0.0};
      return comass_sampled(w, spec, tol);
    }
  }
  return {};
}

}  // namespace oritrans
