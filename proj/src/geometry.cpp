#include "oritrans/geometry.hpp"

#include "oritrans/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>

namespace oritrans {

namespace {

using Vec3 = std::array<Rational, 3>;

Vec3 lift3(const std::vector<Rational>& v) {
  Vec3 out{Rational(0), Rational(0), Rational(0)};
  for (std::size_t i = 0; i < v.size() && i < 3; ++i) out[i] = v[i];
  return out;
}

Vec3 cross(const Vec3& u, const Vec3& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

Rational dot(const Vec3& u, const Vec3& v) { return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]; }

bool is_zero(const Vec3& v) { return v[0] == 0 && v[1] == 0 && v[2] == 0; }

Vec3 diff(const Point& p, const Point& q) { return lift3(p - q); }

void check_dim(std::size_t d) {
  if (d != 2 && d != 3) throw InvalidArgument("points must have dimension 2 or 3");
}

}  // namespace

Point::Point(std::vector<Rational> coords) : coords_(std::move(coords)) { check_dim(coords_.size()); }

Point::Point(std::initializer_list<Rational> coords) : coords_(coords) { check_dim(coords_.size()); }

Point Point::from_doubles(std::span<const double> coords) {
  std::vector<Rational> out;
  out.reserve(coords.size());
  for (double c : coords) out.push_back(rational_from_double(c));
  return Point(std::move(out));
}

std::vector<double> Point::to_doubles() const {
  std::vector<double> out;
  out.reserve(coords_.size());
  for (const auto& c : coords_) out.push_back(to_double(c));
  return out;
}

std::vector<Rational> operator-(const Point& lhs, const Point& rhs) {
  if (lhs.dim() != rhs.dim()) throw InvalidArgument("dimension mismatch between points");
  std::vector<Rational> out(lhs.dim());
  for (std::size_t i = 0; i < lhs.dim(); ++i) out[i] = lhs[i] - rhs[i];
  return out;
}

Segment::Segment(Point a, Point b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.dim() != b_.dim()) throw InvalidArgument("segment endpoints differ in dimension");
  if (a_ == b_) throw InvalidArgument("degenerate segment");
}

Point Segment::at(const Rational& t) const {
  std::vector<Rational> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = a_[i] + t * (b_[i] - a_[i]);
  return Point(std::move(out));
}

Point Segment::midpoint() const { return at(Rational(1, 2)); }

std::vector<double> Segment::tangent() const {
  std::vector<double> t(dim());
  double norm = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    t[i] = to_double(b_[i] - a_[i]);
    norm += t[i] * t[i];
  }
  norm = std::sqrt(norm);
  for (double& x : t) x /= norm;
  return t;
}

Rational squared_length(const Segment& s) {
  Rational total = 0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const Rational d = s.b()[i] - s.a()[i];
    total += d * d;
  }
  return total;
}

double length(const Segment& s) { return std::sqrt(to_double(squared_length(s))); }

double distance(const Point& p, const Point& q) {
  if (p == q) return 0.0;
  return length(Segment(p, q));
}

Polyline::Polyline(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw InvalidArgument("polyline needs at least two vertices");
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    if (vertices_[i] == vertices_[i + 1]) throw InvalidArgument("polyline has repeated consecutive vertex");
    if (vertices_[i].dim() != vertices_.front().dim()) throw InvalidArgument("polyline mixes dimensions");
  }
  if (vertices_.back().dim() != vertices_.front().dim()) throw InvalidArgument("polyline mixes dimensions");
}

std::vector<Segment> Polyline::segments() const {
  std::vector<Segment> out;
  out.reserve(segment_count());
  for (std::size_t i = 0; i < segment_count(); ++i) out.push_back(segment(i));
  return out;
}

Polyline Polyline::reversed() const {
  std::vector<Point> v(vertices_.rbegin(), vertices_.rend());
  return Polyline(std::move(v));
}

double Polyline::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < segment_count(); ++i) total += oritrans::length(segment(i));
  return total;
}

SegmentIntersection intersect(const Segment& s, const Segment& t) {
  using Kind = SegmentIntersection::Kind;
  const Vec3 u = diff(s.b(), s.a());
  const Vec3 v = diff(t.b(), t.a());
  const Vec3 w = diff(t.a(), s.a());
  const Vec3 n = cross(u, v);
  SegmentIntersection out;
  if (is_zero(n)) {
    if (!is_zero(cross(u, w))) return out;
    const Rational uu = dot(u, u);
    const Rational tc = dot(w, u) / uu;
    const Rational td = dot(diff(t.b(), s.a()), u) / uu;
    const Rational lo = std::max(Rational(0), std::min(tc, td));
    const Rational hi = std::min(Rational(1), std::max(tc, td));
    if (lo > hi) return out;
    out.kind = lo == hi ? Kind::kPoint : Kind::kOverlap;
    out.lo = lo;
    out.hi = hi;
    return out;
  }
  if (dot(w, n) != 0) return out;
  const Rational nn = dot(n, n);
  const Rational sp = dot(cross(w, v), n) / nn;
  const Rational tp = dot(cross(w, u), n) / nn;
  if (sp < 0 || sp > 1 || tp < 0 || tp > 1) return out;
  out.kind = Kind::kPoint;
  out.lo = sp;
  out.hi = sp;
  return out;
}

std::optional<Rational> parameter_on(const Segment& s, const Point& p) {
  const Vec3 u = diff(s.b(), s.a());
  const Vec3 w = diff(p, s.a());
  if (!is_zero(cross(u, w))) return std::nullopt;
  const Rational t = dot(w, u) / dot(u, u);
  if (t < 0 || t > 1) return std::nullopt;
  return t;
}

bool is_simple(const Polyline& p) {
  using Kind = SegmentIntersection::Kind;
  const auto segs = p.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const auto hit = intersect(segs[i], segs[j]);
      if (j == i + 1) {
        if (hit.kind != Kind::kPoint || hit.lo != 1) return false;
      } else if (hit.kind != Kind::kNone) {
        return false;
      }
    }
  }
  return true;
}

namespace {

// Canonical description of the line through a segment: the direction scaled
// so that its first nonzero coordinate is 1, and the point of the line whose
// coordinate on that axis is 0. The parameter of a point is then its
// coordinate on that axis.
struct LineKey {
  std::size_t axis = 0;
  std::vector<Rational> direction;
  std::vector<Rational> base;

  friend bool operator<(const LineKey& l, const LineKey& r) {
    return std::tie(l.axis, l.direction, l.base) < std::tie(r.axis, r.direction, r.base);
  }
};

LineKey line_key(const Segment& s) {
  const auto d = s.b() - s.a();
  LineKey key;
  while (d[key.axis] == 0) ++key.axis;
  const Rational lead = d[key.axis];
  key.direction.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) key.direction[i] = d[i] / lead;
  const Rational shift = s.a()[key.axis];
  key.base.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) key.base[i] = s.a()[i] - shift * key.direction[i];
  return key;
}

Point point_on(const LineKey& key, const Rational& t) {
  std::vector<Rational> c(key.base.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = key.base[i] + t * key.direction[i];
  return Point(std::move(c));
}

struct Span {
  std::size_t input;
  Rational lo;
  Rational hi;
  int sign;
};

}  // namespace

OverlayDecomposition overlay(std::span<const Segment> inputs) {
  std::map<LineKey, std::vector<Span>> groups;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const LineKey key = line_key(inputs[i]);
    const Rational ta = inputs[i].a()[key.axis];
    const Rational tb = inputs[i].b()[key.axis];
    Span span{i, std::min(ta, tb), std::max(ta, tb), ta < tb ? 1 : -1};
    groups[key].push_back(std::move(span));
  }

  OverlayDecomposition out;
  for (const auto& [key, spans] : groups) {
    std::vector<Rational> cuts;
    cuts.reserve(2 * spans.size());
    for (const auto& s : spans) {
      cuts.push_back(s.lo);
      cuts.push_back(s.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      std::vector<Coverage> coverage;
      for (const auto& s : spans) {
        if (s.lo <= cuts[c] && s.hi >= cuts[c + 1]) coverage.push_back({s.input, s.sign});
      }
      if (coverage.empty()) continue;
      std::sort(coverage.begin(), coverage.end(),
                [](const Coverage& l, const Coverage& r) { return l.input < r.input; });
      out.atoms.push_back({Segment(point_on(key, cuts[c]), point_on(key, cuts[c + 1])), std::move(coverage)});
    }
  }
  return out;
}

}  // namespace oritrans
