#pragma once

#include "oritrans/coefficients.hpp"
#include "oritrans/currents.hpp"
#include "oritrans/geometry.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace oritrans {

// A cell of a piecewise-constant R^m-valued 1-form. In the plane the cell is
// a convex polygon; an empty polygon stands for the whole space and is only
// allowed as the single cell of a certificate (the only form accepted in R^3).
struct CalibrationCell {
  std::vector<Point> polygon;
  CovectorMatrix w;
};

class CalibrationCertificate {
 public:
  CalibrationCertificate(std::size_t d, std::size_t m, NormSpec norm, std::vector<CalibrationCell> cells);

  std::size_t d() const { return d_; }
  std::size_t m() const { return m_; }
  const NormSpec& norm() const { return norm_; }
  const std::vector<CalibrationCell>& cells() const { return cells_; }
  // First cell containing p (boundary included).
  std::optional<std::size_t> locate(const Point& p) const;

 private:
  std::size_t d_;
  std::size_t m_;
  NormSpec norm_;
  std::vector<CalibrationCell> cells_;
};

struct InterfaceWitness {
  std::size_t cell_a = 0;
  std::size_t cell_b = 0;
  std::size_t channel = 0;
  Segment interface;
  double jump = 0.0;
};

struct ClosedCheck {
  bool closed = true;
  std::optional<InterfaceWitness> witness;
};

// Tangential continuity u^T W_c = u^T W_c' across every shared cell edge.
ClosedCheck check_closed(const CalibrationCertificate& cert, double tol = 1e-12);

struct ComassCheck {
  double bound = 0.0;
  bool exact = true;
  double tolerance = 0.0;  // sampling accuracy when not exact
  bool ok = true;          // bound <= 1 + tol
};

ComassCheck check_comass(const CalibrationCertificate& cert, double tol = 1e-9);

struct EqualityCheck {
  double max_violation = 0.0;  // max over atom pieces of |tau^T W theta - ||theta|||
  bool ok = true;
  std::optional<Segment> worst;
};

EqualityCheck check_equality(const CalibrationCertificate& cert, const PolyCurrent1& t, double tol = 1e-9);

enum class Verdict { kCalibrated, kViolated, kInconclusive };
std::string to_string(Verdict v);

struct CalibrationTolerances {
  double closed = 1e-12;
  double comass = 1e-9;
  double equality = 1e-9;
};

struct CalibrationReport {
  ClosedCheck closed;
  ComassCheck comass;
  EqualityCheck equality;
  Verdict verdict = Verdict::kInconclusive;
  std::string reason;
};

CalibrationReport verify_calibration(const CalibrationCertificate& cert, const PolyCurrent1& t,
                                     const CalibrationTolerances& tol = {});

}  // namespace oritrans
