#include "oritrans/io.hpp"

#include "oritrans/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace oritrans {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("missing field '") + key + "'");
  return j.at(key);
}

const Json& require_array(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_array()) throw InvalidArgument(std::string("field '") + key + "' must be an array");
  return v;
}

std::size_t index_from_json(const Json& j) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw InvalidArgument("expected a nonnegative index");
  return j.get<std::size_t>();
}

Coef coef_from_json(const Json& j, std::size_t m) {
  if (!j.is_array() || j.size() != m) throw InvalidArgument("coefficient must have " + std::to_string(m) + " entries");
  Coef c;
  for (const auto& x : j) c.push_back(rational_from_json(x));
  return c;
}

Json coef_to_json(const Coef& c) {
  Json out = Json::array();
  for (const auto& x : c) out.push_back(rational_to_json(x));
  return out;
}

Ring ring_from_json(const Json& j) {
  const std::string r = j.get<std::string>();
  if (r == "int") return Ring::kInteger;
  if (r == "real") return Ring::kReal;
  throw InvalidArgument("ring must be \"int\" or \"real\"");
}

std::vector<Point> points_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("points must be an array");
  std::vector<Point> out;
  for (const auto& p : j) out.push_back(point_from_json(p));
  return out;
}

Json points_to_json(const std::vector<Point>& pts) {
  Json out = Json::array();
  for (const auto& p : pts) out.push_back(point_to_json(p));
  return out;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_unsigned()) return Rational(j.get<unsigned long long>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw InvalidArgument("non-finite number");
    return rational_from_double(x);
  }
  throw InvalidArgument("expected a rational number");
}

Json rational_to_json(const Rational& q) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  const auto num = numerator(q);
  if (denominator(q) == 1 && num <= std::numeric_limits<long long>::max() &&
      num >= std::numeric_limits<long long>::min()) {
    return num.convert_to<long long>();
  }
  return to_string(q);
}

Point point_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("a point must be an array of coordinates");
  std::vector<Rational> c;
  for (const auto& x : j) c.push_back(rational_from_json(x));
  return Point(std::move(c));
}

Json point_to_json(const Point& p) {
  Json out = Json::array();
  for (std::size_t k = 0; k < p.dim(); ++k) out.push_back(rational_to_json(p[k]));
  return out;
}

PhiNorm phi_from_json(const Json& j) {
  const std::string s = j.get<std::string>();
  if (s == "l1") return PhiNorm::l1();
  if (s == "linf") return PhiNorm::linf();
  if (s.size() > 1 && s[0] == 'l') {
    std::size_t used = 0;
    double r = 0.0;
    try {
      r = std::stod(s.substr(1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == s.size() - 1) return PhiNorm::lr(r);
  }
  throw InvalidArgument("phi must be \"l1\", \"linf\" or \"l<r>\", got '" + s + "'");
}

Alpha alpha_from_json(const Json& j) { return Alpha(rational_from_json(j)); }

NormSpec norm_from_json(const Json& j) {
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "linf") return NormSpec::linf();
  if (kind == "l1") return NormSpec::l1();
  if (kind == "phi_alpha") return NormSpec::phi_alpha(phi_from_json(require(j, "phi")), alpha_from_json(require(j, "alpha")));
  throw InvalidArgument("unknown norm kind '" + kind + "'");
}

Json norm_to_json(const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Kind::kLinf:
      return {{"kind", "linf"}};
    case NormSpec::Kind::kL1:
      return {{"kind", "l1"}};
    case NormSpec::Kind::kPhiAlpha:
      return {{"kind", "phi_alpha"}, {"phi", spec.phi.name()}, {"alpha", rational_to_json(rational_from_double(spec.alpha.value()))}};
  }
  return {};
}

InstanceFile instance_from_json(const Json& j) {
  InstanceFile out;
  out.kind = require(j, "kind").get<std::string>();
  const auto points = points_from_json(require(j, "points"));
  if (out.kind == "mailing") {
    std::vector<std::vector<long long>> demand;
    for (const auto& row : require_array(j, "demand")) {
      if (!row.is_array()) throw InvalidArgument("demand must be a matrix");
      std::vector<long long> r;
      for (const auto& x : row) {
        if (!x.is_number_integer()) throw InvalidArgument("demand entries must be integers");
        r.push_back(x.get<long long>());
      }
      demand.push_back(std::move(r));
    }
    out.mailing.emplace(points, demand);
    out.norm = j.contains("norm") ? norm_from_json(j.at("norm")) : NormSpec::phi_alpha(PhiNorm::l1(), Alpha(1.0));
    if (out.norm.kind != NormSpec::Kind::kPhiAlpha) throw InvalidArgument("a mailing instance needs a phi_alpha norm");
    if (j.contains("ordering")) {
      std::vector<std::pair<std::size_t, std::size_t>> order;
      for (const auto& p : j.at("ordering")) {
        if (!p.is_array() || p.size() != 2) throw InvalidArgument("ordering entries must be pairs");
        order.emplace_back(index_from_json(p[0]), index_from_json(p[1]));
      }
      out.ordering.emplace(*out.mailing, order);
    } else {
      out.ordering.emplace(*out.mailing);
    }
  } else if (out.kind == "steiner") {
    std::vector<std::vector<std::size_t>> groups;
    for (const auto& g : require_array(j, "partition")) {
      if (!g.is_array()) throw InvalidArgument("partition must be a list of groups");
      std::vector<std::size_t> members;
      for (const auto& x : g) members.push_back(index_from_json(x));
      groups.push_back(std::move(members));
    }
    out.steiner.emplace(points, groups);
    out.norm = j.contains("norm") ? norm_from_json(j.at("norm")) : NormSpec::linf();
  } else {
    throw InvalidArgument("instance kind must be \"mailing\" or \"steiner\"");
  }
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    if (s.contains("method")) out.solver.method = s.at("method").get<std::string>();
    if (s.contains("max_steiner")) out.solver.max_steiner = index_from_json(s.at("max_steiner"));
    if (s.contains("grid")) {
      const Json& g = s.at("grid");
      LatticeGrid grid;
      const Point origin = point_from_json(require(g, "origin"));
      if (origin.dim() != 2) throw InvalidArgument("grid origin must be planar");
      grid.x0 = origin[0];
      grid.y0 = origin[1];
      grid.step = rational_from_json(require(g, "step"));
      const Json& size = require_array(g, "size");
      if (size.size() != 2) throw InvalidArgument("grid size must be [nx, ny]");
      grid.nx = index_from_json(size[0]);
      grid.ny = index_from_json(size[1]);
      out.solver.grid = grid;
    }
  }
  static const std::vector<std::string> methods{"auto", "topology", "lattice_family", "lattice_current"};
  if (std::find(methods.begin(), methods.end(), out.solver.method) == methods.end()) {
    throw InvalidArgument("unknown solver method '" + out.solver.method + "'");
  }
  return out;
}

Json instance_to_json(const InstanceFile& inst) {
  Json out{{"kind", inst.kind}, {"norm", norm_to_json(inst.norm)}};
  if (inst.mailing) {
    out["points"] = points_to_json(inst.mailing->points());
    out["demand"] = inst.mailing->demand();
    if (inst.ordering) {
      Json order = Json::array();
      for (const auto& b : inst.ordering->blocks()) order.push_back({b.i, b.j});
      out["ordering"] = order;
    }
  } else if (inst.steiner) {
    out["points"] = points_to_json(inst.steiner->points());
    out["partition"] = inst.steiner->groups();
  }
  Json solver{{"method", inst.solver.method}, {"max_steiner", inst.solver.max_steiner}};
  if (inst.solver.grid) {
    const auto& g = *inst.solver.grid;
    solver["grid"] = {{"origin", {rational_to_json(g.x0), rational_to_json(g.y0)}},
                      {"step", rational_to_json(g.step)},
                      {"size", {g.nx, g.ny}}};
  }
  out["solver"] = solver;
  return out;
}

PolyCurrent1 current_from_json(const Json& j) {
  const std::size_t m = index_from_json(require(j, "m"));
  const Ring ring = j.contains("ring") ? ring_from_json(j.at("ring")) : Ring::kInteger;
  std::vector<PolyCurrent1::Atom> raw;
  for (const auto& a : require_array(j, "atoms")) {
    raw.push_back({Segment(point_from_json(require(a, "a")), point_from_json(require(a, "b"))),
                   coef_from_json(require(a, "coef"), m)});
  }
  return PolyCurrent1(m, ring, std::move(raw));
}

Json current_to_json(const PolyCurrent1& t) {
  Json atoms = Json::array();
  for (const auto& a : t.atoms()) {
    atoms.push_back({{"a", point_to_json(a.segment.a())}, {"b", point_to_json(a.segment.b())}, {"coef", coef_to_json(a.coef)}});
  }
  return {{"m", t.m()}, {"ring", t.ring() == Ring::kInteger ? "int" : "real"}, {"atoms", atoms}};
}

AtomicMeasure0 measure_from_json(const Json& j) {
  const std::size_t m = index_from_json(require(j, "m"));
  std::vector<AtomicMeasure0::Atom> raw;
  for (const auto& a : require_array(j, "atoms")) {
    raw.push_back({point_from_json(require(a, "point")), coef_from_json(require(a, "coef"), m)});
  }
  return AtomicMeasure0(m, std::move(raw));
}

Json measure_to_json(const AtomicMeasure0& b) {
  Json atoms = Json::array();
  for (const auto& a : b.atoms()) atoms.push_back({{"point", point_to_json(a.point)}, {"coef", coef_to_json(a.coef)}});
  return {{"m", b.m()}, {"atoms", atoms}};
}

PathFamily family_from_json(const Json& j, const MailingInstance& inst) {
  std::vector<LabeledPath> paths;
  for (const auto& p : require_array(j, "paths")) {
    const Json& c = require_array(p, "commodity");
    if (c.size() != 2) throw InvalidArgument("commodity must be a pair [i, j]");
    paths.push_back({index_from_json(c[0]), index_from_json(c[1]), Polyline(points_from_json(require(p, "vertices")))});
  }
  return PathFamily(inst, std::move(paths));
}

Json family_to_json(const PathFamily& f) {
  Json paths = Json::array();
  for (const auto& p : f.paths()) {
    paths.push_back({{"commodity", {p.i, p.j}}, {"vertices", points_to_json(p.path.vertices())}});
  }
  return {{"paths", paths}};
}

Forest forest_from_json(const Json& j) {
  Forest f;
  f.vertices = points_from_json(require(j, "vertices"));
  for (const auto& e : require_array(j, "edges")) {
    if (!e.is_array() || e.size() != 2) throw InvalidArgument("forest edges must be pairs");
    f.edges.emplace_back(index_from_json(e[0]), index_from_json(e[1]));
  }
  return f;
}

Json forest_to_json(const Forest& f) {
  Json edges = Json::array();
  for (const auto& [a, b] : f.edges) edges.push_back({a, b});
  return {{"vertices", points_to_json(f.vertices)}, {"edges", edges}};
}

CalibrationCertificate certificate_from_json(const Json& j) {
  const NormSpec norm = norm_from_json(require(j, "norm"));
  const Json& cells_json = require_array(j, "cells");
  if (cells_json.empty()) throw InvalidArgument("certificate has no cells");
  std::size_t d = 0;
  std::size_t m = 0;
  std::vector<CalibrationCell> cells;
  for (const auto& c : cells_json) {
    const Json& w = require_array(c, "W");
    if (w.empty() || !w[0].is_array() || w[0].empty()) throw InvalidArgument("W must be a nonempty d x m matrix");
    if (d == 0) {
      d = w.size();
      m = w[0].size();
    }
    if (w.size() != d) throw InvalidArgument("every W must have the same number of rows");
    std::vector<double> entries;
    for (const auto& row : w) {
      if (!row.is_array() || row.size() != m) throw InvalidArgument("W rows must all have the same length");
      for (const auto& x : row) entries.push_back(to_double(rational_from_json(x)));
    }
    std::vector<Point> polygon = c.contains("polygon") ? points_from_json(c.at("polygon")) : std::vector<Point>{};
    cells.push_back({std::move(polygon), CovectorMatrix(d, m, std::move(entries))});
  }
  if (j.contains("d") && index_from_json(j.at("d")) != d) throw InvalidArgument("declared d differs from W");
  if (j.contains("m") && index_from_json(j.at("m")) != m) throw InvalidArgument("declared m differs from W");
  return CalibrationCertificate(d, m, norm, std::move(cells));
}

Json certificate_to_json(const CalibrationCertificate& c) {
  Json cells = Json::array();
  for (const auto& cell : c.cells()) {
    Json w = Json::array();
    for (std::size_t r = 0; r < c.d(); ++r) {
      Json row = Json::array();
      for (std::size_t k = 0; k < c.m(); ++k) row.push_back(cell.w(r, k));
      w.push_back(row);
    }
    cells.push_back({{"polygon", points_to_json(cell.polygon)}, {"W", w}});
  }
  return {{"d", c.d()}, {"m", c.m()}, {"norm", norm_to_json(c.norm())}, {"cells", cells}};
}

std::vector<Segment> support_from_json(const Json& j) {
  std::vector<Segment> out;
  for (const auto& s : require_array(j, "segments")) {
    if (s.is_array() && s.size() == 2) {
      out.emplace_back(point_from_json(s[0]), point_from_json(s[1]));
    } else {
      out.emplace_back(point_from_json(require(s, "a")), point_from_json(require(s, "b")));
    }
  }
  return out;
}

Json support_to_json(const std::vector<Segment>& s) {
  Json segs = Json::array();
  for (const auto& x : s) segs.push_back({point_to_json(x.a()), point_to_json(x.b())});
  return {{"segments", segs}};
}

Json calibration_report_to_json(const CalibrationReport& r, const NormSpec& spec) {
  Json closed{{"closed", r.closed.closed}};
  if (r.closed.witness) {
    const auto& w = *r.closed.witness;
    closed["witness"] = {{"cells", {w.cell_a, w.cell_b}},
                         {"channel", w.channel},
                         {"interface", {point_to_json(w.interface.a()), point_to_json(w.interface.b())}},
                         {"jump", w.jump}};
  }
  Json comass{{"bound", r.comass.bound}, {"exact", r.comass.exact}, {"ok", r.comass.ok}};
  if (!r.comass.exact || spec.kind == NormSpec::Kind::kPhiAlpha) {
    comass["tolerance"] = r.comass.tolerance;
    comass["statement"] = "comass <= " + fmt(r.comass.bound + r.comass.tolerance);
  }
  Json equality{{"max_violation", r.equality.max_violation}, {"ok", r.equality.ok}};
  if (r.equality.worst) {
    equality["worst"] = {point_to_json(r.equality.worst->a()), point_to_json(r.equality.worst->b())};
  }
  return {{"verdict", to_string(r.verdict)}, {"reason", r.reason}, {"closed", closed}, {"comass", comass}, {"equality", equality}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

std::string render_svg(const std::vector<Point>& points, const PolyCurrent1& t, const std::string& title) {
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  auto grow = [&](const Point& p) {
    const double x = to_double(p[0]);
    const double y = p.dim() > 1 ? to_double(p[1]) : 0.0;
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const auto& p : points) grow(p);
  for (const auto& a : t.atoms()) {
    grow(a.segment.a());
    grow(a.segment.b());
  }
  if (!std::isfinite(xmin)) xmin = ymin = 0.0, xmax = ymax = 1.0;
  const double size = 560.0;
  const double margin = 40.0;
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double scale = size / span;
  auto sx = [&](const Point& p) { return margin + (to_double(p[0]) - xmin) * scale; };
  auto sy = [&](const Point& p) { return margin + (ymax - (p.dim() > 1 ? to_double(p[1]) : 0.0)) * scale; };

  std::ostringstream s;
  s.precision(6);
  s << std::fixed;
  const double w = 2 * margin + (xmax - xmin) * scale;
  const double h = 2 * margin + (ymax - ymin) * scale + 20;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
    << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"5\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" "
       "orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#1f4e9c\"/></marker></defs>\n"
    << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (const auto& a : t.atoms()) {
    const Point& p = a.segment.a();
    const Point& q = a.segment.b();
    const Point mid = a.segment.midpoint();
    s << "<line x1=\"" << sx(p) << "\" y1=\"" << sy(p) << "\" x2=\"" << sx(q) << "\" y2=\"" << sy(q)
      << "\" stroke=\"#1f4e9c\" stroke-width=\"2\"/>\n";
    // The arrowhead sits on a short stub ending at the midpoint.
    const Point before = Segment(p, mid).midpoint();
    s << "<line x1=\"" << sx(before) << "\" y1=\"" << sy(before) << "\" x2=\"" << sx(mid) << "\" y2=\"" << sy(mid)
      << "\" stroke=\"#1f4e9c\" stroke-width=\"2\" marker-end=\"url(#arrow)\"/>\n";
    std::string label;
    for (std::size_t k = 0; k < a.coef.size(); ++k) {
      if (a.coef[k] == 0) continue;
      if (!label.empty()) label += ' ';
      label += "e" + std::to_string(k + 1) + ":" +
               (t.ring() == Ring::kInteger ? to_string(a.coef[k]) : fmt(to_double(a.coef[k])).substr(0, 8));
    }
    s << "<text x=\"" << sx(mid) + 4 << "\" y=\"" << sy(mid) - 4
      << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#555\">" << label << "</text>\n";
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    s << "<circle cx=\"" << sx(points[i]) << "\" cy=\"" << sy(points[i]) << "\" r=\"5\" fill=\"#c0392b\"/>\n"
      << "<text x=\"" << sx(points[i]) + 7 << "\" y=\"" << sy(points[i]) + 14
      << "\" font-family=\"sans-serif\" font-size=\"12\">p" << i + 1 << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string atoms_csv(const PolyCurrent1& t, const std::function<double(const Coef&)>& density) {
  std::ostringstream s;
  s << "atom,ax,ay,bx,by,length,theta_minus,theta_plus,cost\n";
  std::size_t k = 0;
  for (const auto& a : t.atoms()) {
    Rational plus = 0;
    Rational minus = 0;
    for (const auto& x : a.coef) (x > 0 ? plus : minus) += abs(x);
    const Point& p = a.segment.a();
    const Point& q = a.segment.b();
    auto coord = [](const Point& pt, std::size_t i) { return i < pt.dim() ? fmt(to_double(pt[i])) : std::string("0"); };
    const double len = length(a.segment);
    s << k++ << ',' << coord(p, 0) << ',' << coord(p, 1) << ',' << coord(q, 0) << ',' << coord(q, 1) << ',' << fmt(len)
      << ',' << fmt(to_double(minus)) << ',' << fmt(to_double(plus)) << ',' << fmt(density(a.coef) * len) << '\n';
  }
  return s.str();
}

}  // namespace oritrans
