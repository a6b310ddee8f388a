#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oritrans/coefficients.hpp"
#include "oritrans/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace oritrans;

namespace {

const std::vector<PhiNorm> kPhis{PhiNorm::l1(), PhiNorm::linf(), PhiNorm::lr(2.0), PhiNorm::lr(3.5)};

// Independent evaluation: phi(||t+||_p, ||t-||_p) with p = 1/alpha.
double oracle_phi(const PhiNorm& phi, double x, double y) {
  switch (phi.kind) {
    case PhiNorm::Kind::kL1:
      return x + y;
    case PhiNorm::Kind::kLinf:
      return std::max(x, y);
    case PhiNorm::Kind::kLr:
      return std::pow(std::pow(x, phi.r) + std::pow(y, phi.r), 1.0 / phi.r);
  }
  return 0.0;
}

double oracle_pnorm(const std::vector<double>& v, double alpha) {
  if (alpha == 0.0) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), 1.0 / alpha);
  return std::pow(s, alpha);
}

double oracle_norm(const std::vector<double>& t, const PhiNorm& phi, double alpha) {
  std::vector<double> pos;
  std::vector<double> neg;
  for (double x : t) (x > 0 ? pos : neg).push_back(x);
  return oracle_phi(phi, oracle_pnorm(pos, alpha), oracle_pnorm(neg, alpha));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

std::vector<NormSpec> all_specs(std::size_t m) {
  std::vector<NormSpec> out{NormSpec::linf(m), NormSpec::l1(m)};
  for (const auto& phi : kPhis) {
    for (double a : {0.0, 1.0 / 3.0, 0.5, 1.0}) out.push_back(NormSpec::phi_alpha(phi, Alpha(a), m));
  }
  return out;
}

}  // namespace

TEST_CASE("phi evaluation") {
  CHECK(phi_eval(PhiNorm::l1(), 1, 1) == 2.0);
  CHECK(phi_eval(PhiNorm::linf(), 2, 3) == 3.0);
  CHECK(phi_eval(PhiNorm::lr(2), 3, 4) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(phi_eval(PhiNorm::l1(), -1, 0), InvalidArgument);
  CHECK_THROWS_AS(PhiNorm::lr(1.0), InvalidArgument);
  for (const auto& phi : kPhis) {
    CHECK(phi_eval(phi, 0.3, 1.7) == doctest::Approx(phi_eval(phi, 1.7, 0.3)));
    CHECK(phi_eval(phi, 0.3, 1.7) <= phi_eval(phi, 0.4, 1.7));
  }
}

TEST_CASE("mailing cost") {
  // theta as 2 x 2 matrices, row-major.
  const std::vector<double> e12{0, 1, 0, 0};
  for (const auto& phi : kPhis) {
    for (double a : {0.0, 0.5, 1.0}) CHECK(mailing_cost(e12, phi, Alpha(a)) == doctest::Approx(phi_eval(phi, 1, 0)));
  }
  const std::vector<double> mixed{0, 2, -1, 0};
  CHECK(mailing_cost(mixed, PhiNorm::l1(), Alpha(0.5)) == doctest::Approx(std::sqrt(2.0) + 1.0).epsilon(1e-15));
  const std::vector<double> opposite{0, 1, -1, 0};
  for (double a : {0.0, 0.25, 1.0}) CHECK(mailing_cost(opposite, PhiNorm::linf(), Alpha(a)) == 1.0);
  const std::vector<double> zero{0, 0, 0, 0};
  CHECK(mailing_cost(zero, PhiNorm::l1(), Alpha(0.0)) == 0.0);
  std::vector<double> neg = mixed;
  for (double& x : neg) x = -x;
  CHECK(mailing_cost(neg, PhiNorm::lr(3), Alpha(0.3)) == mailing_cost(mixed, PhiNorm::lr(3), Alpha(0.3)));
}

TEST_CASE("phi-alpha norm values") {
  const std::vector<double> t{1, 1, -1, 0};
  CHECK(norm_phi_alpha(t, PhiNorm::l1(), Alpha(0.5)) == doctest::Approx(std::sqrt(2.0) + 1.0).epsilon(1e-15));
  const std::vector<double> z{0, 0, 0};
  CHECK(norm_phi_alpha(z, PhiNorm::l1(), Alpha(0.0)) == 0.0);
  const std::vector<double> u{2, -1};
  CHECK(norm_phi_alpha(u, PhiNorm::linf(), Alpha(1.0)) == 2.0);
  CHECK_THROWS_AS(Alpha(1.5), InvalidArgument);
}

TEST_CASE("phi-alpha norm agrees with an independent evaluation") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> x(-3, 3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> t(5);
    for (double& v : t) v = x(rng);
    for (const auto& phi : kPhis) {
      for (double a : {0.0, 0.2, 0.5, 0.9, 1.0}) {
        CHECK(norm_phi_alpha(t, phi, Alpha(a)) == doctest::Approx(oracle_norm(t, phi, a)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("unit-vector identity and the link with the mailing cost") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> entry(-1, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> t(7);
    int plus = 0;
    int minus = 0;
    for (double& v : t) {
      v = entry(rng);
      plus += v > 0;
      minus += v < 0;
    }
    for (const auto& phi : kPhis) {
      for (const Alpha a : {Alpha(0.0), Alpha(Rational(1, 3)), Alpha(0.5), Alpha(1.0)}) {
        const double expected = phi_eval(phi, a.power(plus), a.power(minus));
        CHECK(norm_phi_alpha(t, phi, a) == expected);
        // A matrix with the same positive and negative totals has the same cost.
        const std::vector<double> theta{0, static_cast<double>(plus), -static_cast<double>(minus), 0};
        CHECK(mailing_cost(theta, phi, a) == expected);
      }
    }
  }
}

TEST_CASE("coefficient norms") {
  const std::vector<double> a{1, -1};
  const std::vector<double> h{0.5, -0.5};
  CHECK(coeff_norm(a, NormSpec::linf()) == 1.0);
  CHECK(coeff_norm(h, NormSpec::linf()) == 0.5);
  CHECK(coeff_norm(a, NormSpec::l1()) == 2.0);
  CHECK_THROWS_AS(coeff_norm(a, NormSpec::linf(3)), InvalidArgument);
  const std::vector<Rational> q{Rational(1, 2), Rational(-3, 2)};
  CHECK(coeff_norm(q, NormSpec::l1()) == 2.0);
}

TEST_CASE("dual norm closed forms") {
  const std::vector<double> v{1, -2, 3};
  CHECK(dual_norm(v, NormSpec::linf()) == 6.0);
  CHECK(dual_norm(v, NormSpec::l1()) == 3.0);
  const std::vector<double> w{2, -3};
  CHECK(dual_norm(w, NormSpec::phi_alpha(PhiNorm::l1(), Alpha(1.0))) == 3.0);
  const std::vector<double> zero{0, 0};
  for (const auto& spec : all_specs(0)) CHECK(dual_norm(zero, spec) == 0.0);

  // Brute force over a lattice of t in [-5, 5]^2.
  double best = 0.0;
  for (int i = -50; i <= 50; ++i) {
    for (int j = -50; j <= 50; ++j) {
      if (i == 0 && j == 0) continue;
      const std::vector<double> t{i / 10.0, j / 10.0};
      best = std::max(best, dot(w, t) / norm_phi_alpha(t, PhiNorm::l1(), Alpha(1.0)));
    }
  }
  CHECK(best == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("dual norm satisfies the generalized Cauchy-Schwarz inequality and is attained") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> x(-2, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::vector<double> v{x(rng), x(rng)};
    for (const auto& spec : all_specs(2)) {
      const double dual = dual_norm(v, spec);
      for (int k = 0; k < 50; ++k) {
        const std::vector<double> t{x(rng), x(rng)};
        CHECK(dot(v, t) <= dual * coeff_norm(t, spec) + 1e-12);
      }
      // In two dimensions the sup over directions is found by sampling the
      // circle and refining around the best sample.
      auto ratio = [&](double th) {
        const std::vector<double> t{std::cos(th), std::sin(th)};
        return dot(v, t) / coeff_norm(t, spec);
      };
      const int samples = 20000;
      double best_th = 0.0;
      double best = -1.0;
      for (int s = 0; s < samples; ++s) {
        const double th = 2 * std::numbers::pi * s / samples;
        if (ratio(th) > best) {
          best = ratio(th);
          best_th = th;
        }
      }
      double lo = best_th - 2 * std::numbers::pi / samples;
      double hi = best_th + 2 * std::numbers::pi / samples;
      for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3;
        const double m2 = hi - (hi - lo) / 3;
        if (ratio(m1) < ratio(m2)) {
          lo = m1;
        } else {
          hi = m2;
        }
      }
      best = std::max(best, ratio((lo + hi) / 2));
      CHECK(best == doctest::Approx(dual).epsilon(1e-6));
    }
  }
}

TEST_CASE("norms are homogeneous and subadditive") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> x(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(4);
    std::vector<double> b(4);
    for (double& v : a) v = x(rng);
    for (double& v : b) v = x(rng);
    std::vector<double> sum(4);
    std::vector<double> scaled(4);
    const double lambda = x(rng);
    for (int k = 0; k < 4; ++k) {
      sum[k] = a[k] + b[k];
      scaled[k] = lambda * a[k];
    }
    for (const auto& spec : all_specs(4)) {
      CHECK(coeff_norm(sum, spec) <= coeff_norm(a, spec) + coeff_norm(b, spec) + 1e-12);
      CHECK(coeff_norm(scaled, spec) == doctest::Approx(std::abs(lambda) * coeff_norm(a, spec)).epsilon(1e-12));
      CHECK(dual_norm(sum, spec) <= dual_norm(a, spec) + dual_norm(b, spec) + 1e-12);
    }
  }
}

TEST_CASE("comass values") {
  CHECK(comass(CovectorMatrix(2, 3), NormSpec::linf()).value == 0.0);
  CHECK(comass(CovectorMatrix(2, 1, {0.6, 0.8}), NormSpec::linf()).value == doctest::Approx(1.0).epsilon(1e-15));
  const CovectorMatrix uu(2, 2, {0.6, 0.6, 0.8, 0.8});
  const auto r = comass(uu, NormSpec::linf());
  CHECK(r.exact);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(comass_sampled(uu, NormSpec::linf()).value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_THROWS_AS(comass(CovectorMatrix(2, 21), NormSpec::linf()), InvalidArgument);
  CHECK(comass(CovectorMatrix(2, 1, {0.0, 2.0}), NormSpec::linf()).value == 2.0);
}

TEST_CASE("exact comass routes agree with sampling") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> x(-1, 1);
  const std::vector<NormSpec> specs{NormSpec::linf(), NormSpec::l1(),
                                    NormSpec::phi_alpha(PhiNorm::l1(), Alpha(0.0)),
                                    NormSpec::phi_alpha(PhiNorm::linf(), Alpha(0.0)),
                                    NormSpec::phi_alpha(PhiNorm::l1(), Alpha(1.0)),
                                    NormSpec::phi_alpha(PhiNorm::linf(), Alpha(1.0))};
  for (int trial = 0; trial < 30; ++trial) {
    for (std::size_t d : {2u, 3u}) {
      const std::size_t m = 1 + trial % 4;
      std::vector<double> e(d * m);
      for (double& v : e) v = x(rng);
      const CovectorMatrix w(d, m, e);
      for (const auto& spec : specs) {
        const auto exact = comass(w, spec);
        CHECK(exact.exact);
        const auto sampled = comass_sampled(w, spec, 1e-9);
        CHECK(std::abs(exact.value - sampled.value) <= 1e-7 + sampled.tolerance);
      }
    }
  }
}

TEST_CASE("sampled comass for general phi-alpha norms is tolerance qualified") {
  const CovectorMatrix w(2, 2, {1.0, 0.0, 0.0, 1.0});
  const auto r = comass(w, NormSpec::phi_alpha(PhiNorm::lr(2.0), Alpha(0.5)));
  CHECK_FALSE(r.exact);
  CHECK(r.tolerance > 0.0);
  // Brute force over directions and the dual norm.
  double best = 0.0;
  for (int s = 0; s < 100000; ++s) {
    const double th = 2 * std::numbers::pi * s / 100000;
    const std::vector<double> tau{std::cos(th), std::sin(th)};
    best = std::max(best, dual_norm(w.apply(tau), NormSpec::phi_alpha(PhiNorm::lr(2.0), Alpha(0.5))));
  }
  CHECK(std::abs(r.value - best) <= 1e-6);
}
