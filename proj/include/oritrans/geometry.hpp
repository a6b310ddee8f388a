#pragma once

#include "oritrans/rational.hpp"

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace oritrans {

// A point in R^d with exact rational coordinates, d in {2, 3}.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<Rational> coords);
  Point(std::initializer_list<Rational> coords);

  static Point from_doubles(std::span<const double> coords);

  std::size_t dim() const { return coords_.size(); }
  const Rational& operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<Rational>& coords() const { return coords_; }
  std::vector<double> to_doubles() const;

  friend bool operator==(const Point& lhs, const Point& rhs) = default;
  // Lexicographic; only meaningful between points of the same dimension.
  friend bool operator<(const Point& lhs, const Point& rhs) { return lhs.coords_ < rhs.coords_; }

 private:
  std::vector<Rational> coords_;
};

std::vector<Rational> operator-(const Point& lhs, const Point& rhs);

// Oriented segment a -> b with a != b.
class Segment {
 public:
  Segment(Point a, Point b);

  const Point& a() const { return a_; }
  const Point& b() const { return b_; }
  std::size_t dim() const { return a_.dim(); }

  Segment reversed() const { return Segment(b_, a_); }
  // a + t (b - a)
  Point at(const Rational& t) const;
  Point midpoint() const;
  // Unit tangent (b - a) / |b - a| in floating point.
  std::vector<double> tangent() const;

  friend bool operator==(const Segment& lhs, const Segment& rhs) = default;

 private:
  Point a_;
  Point b_;
};

Rational squared_length(const Segment& s);
double length(const Segment& s);
double distance(const Point& p, const Point& q);

// Polyline with at least two vertices and no repeated consecutive vertex.
// Simplicity is a separate predicate so that callers can report it.
class Polyline {
 public:
  explicit Polyline(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& front() const { return vertices_.front(); }
  const Point& back() const { return vertices_.back(); }
  std::size_t segment_count() const { return vertices_.size() - 1; }
  Segment segment(std::size_t i) const { return Segment(vertices_[i], vertices_[i + 1]); }
  std::vector<Segment> segments() const;
  Polyline reversed() const;
  double length() const;

 private:
  std::vector<Point> vertices_;
};

bool is_simple(const Polyline& p);

struct SegmentIntersection {
  enum class Kind { kNone, kPoint, kOverlap };
  Kind kind = Kind::kNone;
  // Parameters along the first segment, in [0, 1]. For kPoint lo == hi.
  Rational lo;
  Rational hi;
};

SegmentIntersection intersect(const Segment& s, const Segment& t);

// Parameter of p along s if p lies on the closed segment.
std::optional<Rational> parameter_on(const Segment& s, const Point& p);

struct Coverage {
  std::size_t input = 0;
  int sign = 1;  // +1 when the input runs along the atom's orientation
  friend bool operator==(const Coverage&, const Coverage&) = default;
};

struct OverlayAtom {
  Segment segment;
  std::vector<Coverage> coverage;
};

struct OverlayDecomposition {
  std::vector<OverlayAtom> atoms;
};

// Splits collinear overlapping inputs into shared atoms. Atoms are oriented
// canonically along their supporting line, so the geometry does not depend on
// input orientation. Transversal crossings are left alone.
OverlayDecomposition overlay(std::span<const Segment> inputs);

}  // namespace oritrans
