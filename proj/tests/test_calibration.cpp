#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oritrans/calibration.hpp"
#include "oritrans/error.hpp"
#include "oritrans/io.hpp"
#include "oritrans/solvers.hpp"

#include "support.hpp"

#include <cmath>
#include <filesystem>

using namespace oritrans;
using namespace testing_support;

namespace {

std::string data(const std::string& name) { return std::string(ORITRANS_DATA_DIR) + "/" + name; }

CalibrationCertificate load_certificate(const std::string& name) {
  return certificate_from_json(read_json_file(data(name)));
}

PolyCurrent1 fermat_tree() { return current_from_json(read_json_file(data("fermat_tree.json"))); }

// Same current with every atom cut at its midpoint and listed backwards with
// negated coefficients.
PolyCurrent1 subdivided_and_flipped(const PolyCurrent1& t) {
  std::vector<PolyCurrent1::Atom> raw;
  for (const auto& a : t.atoms()) {
    std::vector<Rational> mid;
    for (std::size_t k = 0; k < a.segment.dim(); ++k) mid.push_back((a.segment.a()[k] + a.segment.b()[k]) / 2);
    const Point m(mid);
    Coef neg = a.coef;
    for (auto& x : neg) x = -x;
    raw.push_back({Segment(m, a.segment.a()), neg});
    raw.push_back({Segment(a.segment.b(), m), neg});
  }
  return PolyCurrent1(t.m(), t.ring(), std::move(raw));
}

std::vector<Point> box(long long x0, long long y0, long long x1, long long y1) {
  return {P(x0, y0), P(x1, y0), P(x1, y1), P(x0, y1)};
}

CalibrationCell cell(std::vector<Point> polygon, std::size_t d, std::size_t m, std::vector<double> w) {
  return {std::move(polygon), CovectorMatrix(d, m, std::move(w))};
}

PolyCurrent1 square_tree() {
  const PartitionedInstance inst({P(1, 1), P(1, -1), P(-1, -1), P(-1, 1)}, {{0, 2}, {1, 3}});
  const auto r = solve_partitioned_steiner(inst);
  REQUIRE(r.forest);
  return tree_to_current(*r.forest, inst);
}

}  // namespace

TEST_CASE("Fermat certificate calibrates the tree") {
  const auto cert = load_certificate("fermat_certificate.json");
  const auto t = fermat_tree();
  const auto r = verify_calibration(cert, t);
  CHECK(r.verdict == Verdict::kCalibrated);
  CHECK(r.closed.closed);
  CHECK(r.comass.exact);
  CHECK(r.comass.bound == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.equality.max_violation < 1e-12);
  CHECK(mass(t, cert.norm()) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("the quadrant split of the Fermat certificate is equivalent") {
  const auto cert = load_certificate("fermat_certificate_quadrants.json");
  CHECK(cert.cells().size() == 4);
  const auto r = verify_calibration(cert, fermat_tree());
  CHECK(r.verdict == Verdict::kCalibrated);
  CHECK(r.closed.closed);
  CHECK(r.equality.max_violation < 1e-12);
}

TEST_CASE("a perturbed tree is not calibrated") {
  auto j = read_json_file(data("fermat_tree.json"));
  // Move the junction off the Fermat point.
  for (auto& atom : j["atoms"]) {
    for (const char* end : {"a", "b"}) {
      if (atom[end] == Json::array({0, 0})) atom[end] = Json::array({"0.05", 0});
    }
  }
  const auto moved = current_from_json(j);
  CHECK(boundary(moved) == boundary(fermat_tree()));
  const auto r = verify_calibration(load_certificate("fermat_certificate.json"), moved);
  CHECK(r.verdict == Verdict::kViolated);
  CHECK(r.reason == "equality");
  CHECK(r.equality.max_violation > 1e-4);
  REQUIRE(r.equality.worst);
  CHECK(mass(moved, NormSpec::phi_alpha(PhiNorm::l1(), Alpha(0.0))) > 3.0);
}

TEST_CASE("verdict ignores subdivision and orientation of the current") {
  const auto cert = load_certificate("fermat_certificate.json");
  const auto t = fermat_tree();
  const auto s = subdivided_and_flipped(t);
  CHECK(equivalent(s, t));
  const auto a = verify_calibration(cert, t);
  const auto b = verify_calibration(cert, s);
  CHECK(a.verdict == b.verdict);
  CHECK(b.equality.max_violation == doctest::Approx(a.equality.max_violation).epsilon(1e-12));
  const auto q = verify_calibration(load_certificate("fermat_certificate_quadrants.json"), s);
  CHECK(q.verdict == Verdict::kCalibrated);
}

TEST_CASE("closedness across a shared edge") {
  const NormSpec spec = NormSpec::linf(1);
  // The interface x = 0 has tangent (0, 1): only the second row must agree.
  const CalibrationCertificate closed(2, 1, spec, {cell(box(-2, -2, 0, 2), 2, 1, {0.3, 0.5}),
                                                   cell(box(0, -2, 2, 2), 2, 1, {-0.7, 0.5})});
  CHECK(check_closed(closed).closed);
  const CalibrationCertificate open(2, 1, spec, {cell(box(-2, -2, 0, 2), 2, 1, {0.3, 0.5}),
                                                 cell(box(0, -2, 2, 2), 2, 1, {0.3, 0.25})});
  const auto c = check_closed(open);
  CHECK_FALSE(c.closed);
  REQUIRE(c.witness);
  CHECK(c.witness->channel == 0);
  CHECK(std::abs(c.witness->jump) == doctest::Approx(0.25));
  // Cells meeting at a single corner share no edge.
  const CalibrationCertificate corner(2, 1, spec, {cell(box(-2, -2, 0, 0), 2, 1, {1, 0}),
                                                   cell(box(0, 0, 2, 2), 2, 1, {0, 1})});
  CHECK(check_closed(corner).closed);
}

TEST_CASE("the bounded halves certificate is not closed") {
  const auto r = verify_calibration(load_certificate("square_certificates/halves.json"), square_tree());
  CHECK(r.verdict == Verdict::kViolated);
  CHECK(r.reason == "closedness");
}

TEST_CASE("comass of constant forms") {
  SUBCASE("half-rotation pair") {
    const auto cert = load_certificate("square_certificates/relaxation_dual.json");
    const auto c = check_comass(cert);
    CHECK(c.exact);
    CHECK(c.bound == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.ok);
  }
  SUBCASE("a column of norm two") {
    const CalibrationCertificate cert(2, 2, NormSpec::l1(2), {cell({}, 2, 2, {2, 0, 0, 1})});
    const auto c = check_comass(cert);
    CHECK(c.bound == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(c.ok);
  }
  SUBCASE("zero form") {
    const auto c = check_comass(load_certificate("square_certificates/zero.json"));
    CHECK(c.bound == 0.0);
    CHECK(c.ok);
  }
  SUBCASE("sampled norms report their accuracy") {
    const CalibrationCertificate cert(2, 2, NormSpec::phi_alpha(PhiNorm::lr(2), Alpha(0.5), 2),
                                      {cell({}, 2, 2, {0.5, 0, 0, 0.5})});
    const auto c = check_comass(cert);
    CHECK_FALSE(c.exact);
    CHECK(c.tolerance > 0.0);
  }
}

TEST_CASE("equality on the square tree") {
  const auto t = square_tree();
  SUBCASE("zero form fails equality") {
    const auto r = verify_calibration(load_certificate("square_certificates/zero.json"), t);
    CHECK(r.verdict == Verdict::kViolated);
    CHECK(r.reason == "equality");
    CHECK(r.equality.max_violation == doctest::Approx(1.0));
  }
  SUBCASE("the equality form has comass sqrt 3 under l-infinity") {
    const auto r = verify_calibration(load_certificate("square_certificates/tree_equality.json"), t);
    CHECK(r.equality.max_violation < 1e-6);
    CHECK(r.comass.exact);
    CHECK(r.comass.bound == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
    CHECK(r.verdict == Verdict::kViolated);
    CHECK(r.reason == "comass");
  }
  SUBCASE("scaling it down breaks equality") {
    const auto r = verify_calibration(load_certificate("square_certificates/tree_equality_scaled.json"), t);
    CHECK(r.comass.ok);
    CHECK(r.verdict == Verdict::kViolated);
    CHECK(r.reason == "equality");
  }
}

TEST_CASE("every bundled square certificate is rejected") {
  const auto t = square_tree();
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(data("square_certificates"))) {
    const auto cert = certificate_from_json(read_json_file(entry.path().string()));
    CAPTURE(entry.path().filename().string());
    CHECK(verify_calibration(cert, t).verdict == Verdict::kViolated);
    ++count;
  }
  CHECK(count >= 8);
}

TEST_CASE("a current outside every cell is an error") {
  const CalibrationCertificate cert(2, 1, NormSpec::linf(1), {cell(box(0, 0, 1, 1), 2, 1, {1, 0})});
  CHECK(cert.locate(P(1, 1)) == std::optional<std::size_t>(0));
  CHECK_FALSE(cert.locate(P(2, 1)));
  CHECK_THROWS_AS(check_equality(cert, segment_current(P(0, 0), P(3, 0), {1})), InvalidArgument);
}

TEST_CASE("malformed certificates") {
  const NormSpec spec = NormSpec::linf(1);
  CHECK_THROWS_AS(CalibrationCertificate(4, 1, spec, {cell({}, 4, 1, {1, 0, 0, 0})}), InvalidArgument);
  CHECK_THROWS_AS(CalibrationCertificate(2, 1, spec, {cell({}, 2, 2, {1, 0, 0, 0})}), InvalidArgument);
  CHECK_THROWS_AS(CalibrationCertificate(2, 1, spec, {cell({}, 2, 1, {std::nan(""), 0})}), InvalidArgument);
  // Whole-space cell next to another cell.
  CHECK_THROWS_AS(CalibrationCertificate(2, 1, spec, {cell({}, 2, 1, {1, 0}), cell(box(0, 0, 1, 1), 2, 1, {1, 0})}),
                  InvalidArgument);
  // Overlapping interiors.
  CHECK_THROWS_AS(CalibrationCertificate(2, 1, spec, {cell(box(0, 0, 2, 2), 2, 1, {1, 0}),
                                                      cell(box(1, 1, 3, 3), 2, 1, {1, 0})}),
                  InvalidArgument);
  // Not convex.
  CHECK_THROWS_AS(CalibrationCertificate(2, 1, spec, {cell({P(0, 0), P(2, 0), P(1, 1), P(2, 2), P(0, 2)}, 2, 1, {1, 0})}),
                  InvalidArgument);
  // Several cells are not supported in space.
  CHECK_THROWS_AS(CalibrationCertificate(3, 1, spec, {cell({P(0, 0), P(1, 0), P(0, 1)}, 3, 1, {1, 0, 0})}),
                  InvalidArgument);
  CHECK_NOTHROW(CalibrationCertificate(3, 1, spec, {cell({}, 3, 1, {1, 0, 0})}));
  // Clockwise input is accepted and normalized.
  CHECK_NOTHROW(CalibrationCertificate(2, 1, spec, {cell({P(0, 0), P(0, 1), P(1, 1), P(1, 0)}, 2, 1, {1, 0})}));
}
