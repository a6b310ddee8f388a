#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oritrans/error.hpp"
#include "oritrans/mailing.hpp"

#include "support.hpp"

#include <cmath>
#include <map>

using namespace oritrans;
using namespace testing_support;

namespace {

Polyline L(std::initializer_list<Point> v) { return Polyline(std::vector<Point>(v)); }

const std::vector<PhiNorm> kPhis{PhiNorm::l1(), PhiNorm::linf(), PhiNorm::lr(2), PhiNorm::lr(1.5)};
const std::vector<double> kAlphas{0.0, 1.0 / 3.0, 0.5, 1.0};

// Per unit-lattice-edge counts, computed without any overlay: each path is
// cut into its unit steps, and steps are keyed by their lower endpoint.
double lattice_energy_oracle(const PathFamily& f, const PhiNorm& phi, double alpha) {
  std::map<std::pair<std::pair<int, int>, std::pair<int, int>>, std::pair<long long, long long>> counts;
  for (const auto& lp : f.paths()) {
    const auto& v = lp.path.vertices();
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      auto a = coords(v[k]);
      auto b = coords(v[k + 1]);
      const int steps = std::abs(b.first - a.first) + std::abs(b.second - a.second);
      const int dx = (b.first - a.first) / steps;
      const int dy = (b.second - a.second) / steps;
      for (int s = 0; s < steps; ++s) {
        const std::pair<int, int> p{a.first + s * dx, a.second + s * dy};
        const std::pair<int, int> q{p.first + dx, p.second + dy};
        auto& c = counts[std::minmax(p, q)];
        (p < q ? c.first : c.second) += 1;
      }
    }
  }
  double total = 0.0;
  for (const auto& [edge, c] : counts) {
    auto pw = [&](long long x) { return x == 0 ? 0.0 : std::pow(static_cast<double>(x), alpha); };
    total += phi_eval(phi, pw(c.second), pw(c.first));
  }
  return total;
}

}  // namespace

TEST_CASE("compatibility") {
  const MailingInstance inst({P(0, 0), P(2, 0), P(0, 2)}, {{0, 1, 0}, {0, 0, 0}, {1, 0, 0}});
  const PathFamily ok(inst, {{0, 1, L({P(0, 0), P(2, 0)})}, {2, 0, L({P(0, 2), P(0, 0)})}});
  CHECK(check_compatible(ok));
  CHECK_FALSE(compatibility_problem(ok));

  const PathFamily missing(inst, {{0, 1, L({P(0, 0), P(2, 0)})}});
  CHECK_FALSE(check_compatible(missing));

  const PathFamily wrong_end(inst, {{0, 1, L({P(0, 0), P(1, 0)})}, {2, 0, L({P(0, 2), P(0, 0)})}});
  CHECK_FALSE(check_compatible(wrong_end));

  const PathFamily not_simple(
      inst, {{0, 1, L({P(0, 0), P(1, 0), P(1, 1), P(0, 1), P(0, 0), P(2, 0)})}, {2, 0, L({P(0, 2), P(0, 0)})}});
  CHECK_FALSE(check_compatible(not_simple));
  CHECK(compatibility_problem(not_simple).has_value());

  const PathFamily extra(inst, {{0, 1, L({P(0, 0), P(2, 0)})},
                                {0, 1, L({P(0, 0), P(1, 1), P(2, 0)})},
                                {2, 0, L({P(0, 2), P(0, 0)})}});
  CHECK_FALSE(check_compatible(extra));
}

TEST_CASE("theta counts on shared segments") {
  const MailingInstance inst({P(0, 0), P(2, 0)}, {{0, 2}, {1, 0}});
  const PathFamily f(inst, {{0, 1, L({P(0, 0), P(2, 0)})},
                            {0, 1, L({P(0, 0), P(1, 1), P(2, 0)})},
                            {1, 0, L({P(2, 0), P(0, 0)})}});
  const auto theta = theta_pm(f);
  REQUIRE(theta.atoms.size() == 3);
  for (const auto& a : theta.atoms) {
    if (a.segment == Segment(P(0, 0), P(2, 0)) || a.segment == Segment(P(2, 0), P(0, 0))) {
      CHECK(a.plus == 1);
      CHECK(a.minus == 1);
      CHECK(a.with.size() + a.against.size() == 2);
    } else {
      CHECK(a.plus + a.minus == 1);
    }
  }
  // Segment of length 2 with one unit each way, two unit-slope legs.
  const double legs = 2.0 * std::sqrt(2.0);
  CHECK(energy_family(f, PhiNorm::l1(), Alpha(1.0)) == doctest::Approx(4.0 + legs).epsilon(1e-15));
  CHECK(energy_family(f, PhiNorm::linf(), Alpha(1.0)) == doctest::Approx(2.0 + legs).epsilon(1e-15));
  CHECK(energy_family(f, PhiNorm::l1(), Alpha(0.0)) == doctest::Approx(4.0 + legs).epsilon(1e-15));
}

TEST_CASE("flipping an atom keeps the energy") {
  const MailingInstance inst({P(0, 0), P(3, 0)}, {{0, 2}, {1, 0}});
  const PathFamily f(inst, {{0, 1, L({P(0, 0), P(3, 0)})},
                            {0, 1, L({P(0, 0), P(3, 0)})},
                            {1, 0, L({P(3, 0), P(0, 0)})}});
  auto theta = theta_pm(f);
  REQUIRE(theta.atoms.size() == 1);
  const long long p = theta.atoms[0].plus;
  const long long m = theta.atoms[0].minus;
  CHECK(p + m == 3);
  CHECK(std::max(p, m) == 2);
  const double before = energy_theta(theta, PhiNorm::lr(3), Alpha(0.5));
  theta.flip(0);
  CHECK(theta.atoms[0].plus == m);
  CHECK(theta.atoms[0].minus == p);
  CHECK(energy_theta(theta, PhiNorm::lr(3), Alpha(0.5)) == before);
  CHECK(before == doctest::Approx(3.0 * phi_eval(PhiNorm::lr(3), std::sqrt(2.0), 1.0)).epsilon(1e-15));
}

TEST_CASE("family to current and back") {
  const MailingInstance inst({P(0, 0), P(2, 0)}, {{0, 1}, {0, 0}});
  const PathFamily f(inst, {{0, 1, L({P(0, 0), P(1, 1), P(2, 0)})}});
  const auto t = family_to_current(f);
  CHECK(boundary(t) == build_boundary_mailing(inst));
  CHECK(energy(t, PhiNorm::l1(), Alpha(0.5)) == doctest::Approx(energy_family(f, PhiNorm::l1(), Alpha(0.5))));
  const auto back = current_to_family(t, inst);
  CHECK(back.dropped_cycle_length == 0.0);
  REQUIRE(back.family.paths().size() == 1);
  CHECK(back.family.paths()[0].path.vertices() == f.paths()[0].path.vertices());
}

TEST_CASE("opposite commodities stay in separate channels") {
  const MailingInstance inst({P(0, 0), P(3, 0), P(1, 2)}, {{0, 1, 0}, {0, 0, 0}, {0, 0, 0}});
  const PathFamily f(inst, {{0, 1, L({P(0, 0), P(0, 1), P(3, 1), P(3, 0)})}});
  const auto t = family_to_current(f);
  const MailingInstance g2({P(0, 0), P(3, 0)}, {{0, 1}, {1, 0}});
  const PathFamily cancel(g2, {{0, 1, L({P(0, 0), P(1, 0), P(2, 0), P(3, 0)})},
                               {1, 0, L({P(3, 0), P(2, 0), P(1, 0), P(0, 0)})}});
  const auto tc = family_to_current(cancel);
  // Different channels never cancel; the current keeps both.
  REQUIRE(tc.atoms().size() == 3);
  for (const auto& a : tc.atoms()) {
    CHECK(a.coef[1] != 0);
    CHECK(a.coef[1] + a.coef[2] == 0);
  }
  CHECK(energy(tc, PhiNorm::l1(), Alpha(1.0)) == energy_family(cancel, PhiNorm::l1(), Alpha(1.0)));
  CHECK(energy(t, PhiNorm::l1(), Alpha(1.0)) == 5.0);
}

TEST_CASE("same-commodity paths in opposite directions over a segment") {
  // Commodity 0 -> 1 twice; one path runs through a segment that the other
  // crosses in the opposite direction, so that the current cancels there.
  const MailingInstance inst({P(0, 0), P(0, 2)}, {{0, 2}, {0, 0}});
  const PathFamily f(inst, {{0, 1, L({P(0, 0), P(1, 0), P(1, 1), P(2, 1), P(2, 2), P(0, 2)})},
                            {0, 1, L({P(0, 0), P(2, 0), P(2, 1), P(1, 1), P(1, 2), P(0, 2)})}});
  REQUIRE(check_compatible(f));
  const auto t = family_to_current(f);
  // The shared unit step (1,1)-(2,1) cancels in the current.
  for (const auto& a : t.atoms()) {
    CHECK_FALSE((a.segment == Segment(P(1, 1), P(2, 1)) || a.segment == Segment(P(2, 1), P(1, 1))));
  }
  for (const auto& phi : kPhis) {
    for (double al : kAlphas) {
      const Alpha a(al);
      CHECK(energy(t, phi, a) < energy_family(f, phi, a));
    }
  }
  const auto back = current_to_family(t, inst);
  CHECK(check_compatible(back.family));
  CHECK(equivalent(family_to_current(back.family), t));
}

TEST_CASE("decomposition of a current into a family") {
  const MailingInstance inst({P(0, 0), P(4, 0), P(2, 2)}, {{0, 1, 1}, {0, 0, 0}, {0, 0, 0}});
  const PathFamily f(inst, {{0, 1, L({P(0, 0), P(2, 0), P(4, 0)})}, {0, 2, L({P(0, 0), P(2, 0), P(2, 2)})}});
  const auto t = family_to_current(f);
  const auto back = current_to_family(t, inst);
  CHECK(check_compatible(back.family));
  for (const auto& phi : kPhis) {
    CHECK(energy_family(back.family, phi, Alpha(0.5)) == doctest::Approx(energy(t, phi, Alpha(0.5))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(current_to_family(segment_current(P(0, 0), P(4, 0), E(3, 0, 1)), inst), BoundaryMismatch);
}

TEST_CASE("energy matches a per-edge oracle and a current sandwich on random lattice families") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 80; ++trial) {
    const auto inst = random_lattice_instance(rng, 4, 4, 4, 4);
    const auto f = random_family(rng, inst, 4, 4);
    REQUIRE(check_compatible(f));
    const auto t = family_to_current(f);
    CHECK(boundary(t) == build_boundary_mailing(inst));
    const auto reduced = remove_cycles(t);
    const auto back = current_to_family(t, inst);
    CHECK(check_compatible(back.family));
    for (const auto& phi : kPhis) {
      for (double al : kAlphas) {
        const Alpha a(al);
        const double ef = energy_family(f, phi, a);
        CHECK(ef == doctest::Approx(lattice_energy_oracle(f, phi, al)).epsilon(1e-12));
        // E(T_F) <= E(F) and the extracted family costs no more than T_F.
        CHECK(energy(t, phi, a) <= ef + 1e-12);
        CHECK(energy_family(back.family, phi, a) <= energy(reduced, phi, a) + 1e-9);
        CHECK(energy(reduced, phi, a) <= energy(t, phi, a) + 1e-12);
      }
    }
  }
}

TEST_CASE("theta counts sum to the number of covering paths") {
  std::mt19937 rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_lattice_instance(rng, 3, 4, 5, 4);
    const auto f = random_family(rng, inst, 5, 4);
    const auto theta = theta_pm(f);
    for (const auto& a : theta.atoms) {
      CHECK(a.plus == static_cast<long long>(a.with.size()));
      CHECK(a.minus == static_cast<long long>(a.against.size()));
      CHECK(a.plus + a.minus > 0);
    }
  }
}

TEST_CASE("energy is invariant under reorienting atoms") {
  std::mt19937 rng(71);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = random_lattice_instance(rng, 3, 3, 4, 4);
    const auto f = random_family(rng, inst, 4, 4);
    auto theta = theta_pm(f);
    const double before = energy_theta(theta, PhiNorm::lr(2), Alpha(0.5));
    for (std::size_t k = 0; k < theta.atoms.size(); ++k) {
      if (coin(rng)) theta.flip(k);
    }
    CHECK(energy_theta(theta, PhiNorm::lr(2), Alpha(0.5)) == before);
  }
}

TEST_CASE("splitting a shared trunk never lowers the cost for alpha < 1") {
  // Two units from p1 leave together; the merged trunk is cheaper than two
  // separate copies of it.
  for (double al : {0.0, 0.5}) {
    const Alpha a(al);
    const MailingInstance inst({P(0, 0), P(4, 1), P(4, -1)}, {{0, 1, 1}, {0, 0, 0}, {0, 0, 0}});
    const PathFamily merged(inst, {{0, 1, L({P(0, 0), P(3, 0), P(4, 1)})}, {0, 2, L({P(0, 0), P(3, 0), P(4, -1)})}});
    const double shared = energy_family(merged, PhiNorm::l1(), a);
    CHECK(shared == doctest::Approx(std::pow(2.0, al) * 3.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(shared < 2.0 * 3.0 + 2.0 * std::sqrt(2.0));
  }
}
