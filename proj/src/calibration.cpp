#include "oritrans/calibration.hpp"

#include "oritrans/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oritrans {

namespace {

Rational cross2(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Validates strict convexity and returns the polygon counter-clockwise.
std::vector<Point> normalize_polygon(std::vector<Point> poly, std::size_t index) {
  const std::string where = "cell " + std::to_string(index) + ": ";
  if (poly.size() < 3) throw InvalidArgument(where + "polygon needs at least three vertices");
  for (const auto& p : poly) {
    if (p.dim() != 2) throw InvalidArgument(where + "polygon vertices must be planar");
  }
  int orientation = 0;
  const std::size_t k = poly.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Rational c = cross2(poly[i], poly[(i + 1) % k], poly[(i + 2) % k]);
    const int s = sign(c);
    if (s == 0) throw InvalidArgument(where + "polygon has collinear or repeated vertices");
    if (orientation == 0) orientation = s;
    if (s != orientation) throw InvalidArgument(where + "polygon is not convex");
  }
  if (orientation < 0) std::reverse(poly.begin(), poly.end());
  return poly;
}

// Separating axis test on exact coordinates: true when the interiors of the
// two convex polygons are disjoint.
bool interiors_disjoint(const std::vector<Point>& p, const std::vector<Point>& q) {
  for (const auto* poly : {&p, &q}) {
    const std::size_t k = poly->size();
    for (std::size_t i = 0; i < k; ++i) {
      const Point& a = (*poly)[i];
      const Point& b = (*poly)[(i + 1) % k];
      const Rational nx = a[1] - b[1];
      const Rational ny = b[0] - a[0];
      auto range = [&](const std::vector<Point>& s) {
        Rational lo = nx * s[0][0] + ny * s[0][1];
        Rational hi = lo;
        for (const auto& v : s) {
          const Rational x = nx * v[0] + ny * v[1];
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        return std::pair{lo, hi};
      };
      const auto [plo, phi] = range(p);
      const auto [qlo, qhi] = range(q);
      if (phi <= qlo || qhi <= plo) return true;
    }
  }
  return false;
}

std::vector<Segment> edges_of(const std::vector<Point>& poly) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < poly.size(); ++i) out.emplace_back(poly[i], poly[(i + 1) % poly.size()]);
  return out;
}

std::vector<double> to_doubles(const Coef& c) {
  std::vector<double> out;
  out.reserve(c.size());
  for (const auto& x : c) out.push_back(to_double(x));
  return out;
}

}  // namespace

CalibrationCertificate::CalibrationCertificate(std::size_t d, std::size_t m, NormSpec norm,
                                               std::vector<CalibrationCell> cells)
    : d_(d), m_(m), norm_(norm), cells_(std::move(cells)) {
  if (d != 2 && d != 3) throw InvalidArgument("certificate dimension must be 2 or 3");
  if (m == 0) throw InvalidArgument("certificate needs at least one coefficient channel");
  if (norm_.dim != 0 && norm_.dim != m) throw InvalidArgument("norm dimension differs from the certificate");
  norm_.dim = m;
  if (cells_.empty()) throw InvalidArgument("certificate has no cells");
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& cell = cells_[c];
    if (cell.w.d() != d || cell.w.m() != m) {
      throw InvalidArgument("cell " + std::to_string(c) + ": W must be " + std::to_string(d) + " x " +
                            std::to_string(m));
    }
    for (double x : cell.w.entries()) {
      if (!std::isfinite(x)) throw InvalidArgument("cell " + std::to_string(c) + ": W has a non-finite entry");
    }
    if (cell.polygon.empty()) {
      if (cells_.size() != 1) throw InvalidArgument("an unbounded cell must be the only cell");
      continue;
    }
    if (d == 3) throw InvalidArgument("cells in R^3 must be a single constant form");
    cell.polygon = normalize_polygon(std::move(cell.polygon), c);
  }
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    for (std::size_t b = a + 1; b < cells_.size(); ++b) {
      if (!interiors_disjoint(cells_[a].polygon, cells_[b].polygon)) {
        throw InvalidArgument("cells " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
      }
    }
  }
}

std::optional<std::size_t> CalibrationCertificate::locate(const Point& p) const {
  if (p.dim() != d_) throw InvalidArgument("point dimension differs from the certificate");
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& poly = cells_[c].polygon;
    if (poly.empty()) return c;
    bool inside = true;
    for (std::size_t i = 0; i < poly.size() && inside; ++i) {
      inside = cross2(poly[i], poly[(i + 1) % poly.size()], p) >= 0;
    }
    if (inside) return c;
  }
  return std::nullopt;
}

ClosedCheck check_closed(const CalibrationCertificate& cert, double tol) {
  ClosedCheck out;
  double worst = -1.0;
  const auto& cells = cert.cells();
  for (std::size_t a = 0; a < cells.size(); ++a) {
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      for (const auto& ea : edges_of(cells[a].polygon)) {
        for (const auto& eb : edges_of(cells[b].polygon)) {
          const auto hit = intersect(ea, eb);
          if (hit.kind != SegmentIntersection::Kind::kOverlap) continue;
          const auto u = ea.tangent();
          const auto ra = cells[a].w.apply(u);
          const auto rb = cells[b].w.apply(u);
          for (std::size_t c = 0; c < cert.m(); ++c) {
            const double jump = std::abs(ra[c] - rb[c]);
            if (jump > tol && jump > worst) {
              worst = jump;
              out.closed = false;
              out.witness = InterfaceWitness{a, b, c, Segment(ea.at(hit.lo), ea.at(hit.hi)), jump};
            }
          }
        }
      }
    }
  }
  return out;
}

ComassCheck check_comass(const CalibrationCertificate& cert, double tol) {
  ComassCheck out;
  for (const auto& cell : cert.cells()) {
    const ComassResult r = comass(cell.w, cert.norm(), tol);
    out.bound = std::max(out.bound, r.value);
    out.exact = out.exact && r.exact;
    out.tolerance = std::max(out.tolerance, r.tolerance);
  }
  out.ok = out.bound <= 1.0 + tol;
  return out;
}

EqualityCheck check_equality(const CalibrationCertificate& cert, const PolyCurrent1& t, double tol) {
  if (t.m() != cert.m()) throw InvalidArgument("current and certificate differ in coefficient dimension");
  std::vector<Segment> cuts_by;
  for (const auto& cell : cert.cells()) {
    for (const auto& e : edges_of(cell.polygon)) cuts_by.push_back(e);
  }
  EqualityCheck out;
  for (const auto& atom : t.atoms()) {
    if (atom.segment.dim() != cert.d()) throw InvalidArgument("current and certificate differ in dimension");
    std::vector<Rational> cuts{Rational(0), Rational(1)};
    for (const auto& e : cuts_by) {
      const auto hit = intersect(atom.segment, e);
      if (hit.kind == SegmentIntersection::Kind::kNone) continue;
      cuts.push_back(hit.lo);
      cuts.push_back(hit.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const auto theta = to_doubles(atom.coef);
    const double norm = coeff_norm(theta, cert.norm());
    const auto tau = atom.segment.tangent();
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const Segment piece(atom.segment.at(cuts[k]), atom.segment.at(cuts[k + 1]));
      const auto cell = cert.locate(piece.midpoint());
      if (!cell) throw InvalidArgument("current is not covered by the certificate cells");
      const double violation = std::abs(cert.cells()[*cell].w.evaluate(tau, theta) - norm);
      if (violation > out.max_violation || !out.worst) {
        out.max_violation = std::max(out.max_violation, violation);
        out.worst = piece;
      }
    }
  }
  out.ok = out.max_violation <= tol;
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kCalibrated:
      return "CALIBRATED";
    case Verdict::kViolated:
      return "VIOLATED";
    case Verdict::kInconclusive:
      return "INCONCLUSIVE";
  }
  return "?";
}

CalibrationReport verify_calibration(const CalibrationCertificate& cert, const PolyCurrent1& t,
                                     const CalibrationTolerances& tol) {
  CalibrationReport r;
  r.closed = check_closed(cert, tol.closed);
  r.comass = check_comass(cert, tol.comass);
  r.equality = check_equality(cert, t, tol.equality);
  if (!r.closed.closed) {
    r.verdict = Verdict::kViolated;
    r.reason = "closedness";
  } else if (r.comass.exact ? r.comass.bound > 1.0 + 1e-12 : !r.comass.ok) {
    r.verdict = Verdict::kViolated;
    r.reason = "comass";
  } else if (!r.equality.ok) {
    r.verdict = Verdict::kViolated;
    r.reason = "equality";
  } else if (!r.comass.exact && r.comass.bound + r.comass.tolerance > 1.0 + 1e-12) {
    // A sampled comass is a lower estimate; it cannot certify the bound.
    r.verdict = Verdict::kInconclusive;
    r.reason = "comass within sampling tolerance of 1";
  } else {
    r.verdict = Verdict::kCalibrated;
    r.reason = "calibrated in the piecewise-constant class";
  }
  return r;
}

}  // namespace oritrans
