#include "oritrans/currents.hpp"

#include "oritrans/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace oritrans {

Coef unit_coef(std::size_t m, std::size_t index) {
  Coef c(m, Rational(0));
  c.at(index) = 1;
  return c;
}

bool is_zero(const Coef& c) {
  return std::all_of(c.begin(), c.end(), [](const Rational& x) { return x == 0; });
}

namespace {

bool is_integer(const Rational& x) { return boost::multiprecision::denominator(x) == 1; }

long long to_integer(const Rational& x) {
  if (!is_integer(x)) throw InvalidArgument("integer current has a non-integer coefficient");
  return boost::multiprecision::numerator(x).convert_to<long long>();
}

void add_scaled(Coef& acc, const Coef& c, int sign) {
  for (std::size_t k = 0; k < acc.size(); ++k) {
    if (sign > 0) {
      acc[k] += c[k];
    } else {
      acc[k] -= c[k];
    }
  }
}

std::vector<PolyCurrent1::Atom> normalize(std::size_t m, Ring ring, const std::vector<PolyCurrent1::Atom>& raw) {
  std::vector<Segment> segments;
  segments.reserve(raw.size());
  std::size_t dim = 0;
  for (const auto& atom : raw) {
    if (atom.coef.size() != m) throw InvalidArgument("atom coefficient has wrong dimension");
    if (dim == 0) dim = atom.segment.dim();
    if (atom.segment.dim() != dim) throw InvalidArgument("current mixes ambient dimensions");
    if (ring == Ring::kInteger) {
      for (const auto& x : atom.coef) {
        if (!is_integer(x)) throw InvalidArgument("integer current has a non-integer coefficient");
      }
    }
    segments.push_back(atom.segment);
  }
  std::vector<PolyCurrent1::Atom> out;
  for (const auto& piece : overlay(segments).atoms) {
    Coef sum(m, Rational(0));
    for (const auto& cov : piece.coverage) add_scaled(sum, raw[cov.input].coef, cov.sign);
    if (!is_zero(sum)) out.push_back({piece.segment, std::move(sum)});
  }
  return out;
}

}  // namespace

PolyCurrent1::PolyCurrent1(std::size_t m, Ring ring) : m_(m), ring_(ring) {}

PolyCurrent1::PolyCurrent1(std::size_t m, Ring ring, std::vector<Atom> raw)
    : m_(m), ring_(ring), atoms_(normalize(m, ring, raw)) {}

PolyCurrent1 PolyCurrent1::operator+(const PolyCurrent1& other) const {
  if (other.m_ != m_) throw InvalidArgument("adding currents with different coefficient dimensions");
  std::vector<Atom> raw = atoms_;
  raw.insert(raw.end(), other.atoms_.begin(), other.atoms_.end());
  const Ring ring = (ring_ == Ring::kReal || other.ring_ == Ring::kReal) ? Ring::kReal : Ring::kInteger;
  return PolyCurrent1(m_, ring, std::move(raw));
}

PolyCurrent1 PolyCurrent1::operator-() const {
  PolyCurrent1 out(m_, ring_);
  out.atoms_ = atoms_;
  for (auto& atom : out.atoms_) {
    for (auto& x : atom.coef) x = -x;
  }
  return out;
}

PolyCurrent1 PolyCurrent1::channel(std::size_t index) const {
  if (index >= m_) throw InvalidArgument("channel index out of range");
  PolyCurrent1 out(1, ring_);
  for (const auto& atom : atoms_) {
    if (atom.coef[index] != 0) out.atoms_.push_back({atom.segment, Coef{atom.coef[index]}});
  }
  return out;
}

bool equivalent(const PolyCurrent1& lhs, const PolyCurrent1& rhs) {
  if (lhs.m() != rhs.m()) return false;
  return (lhs - rhs).empty();
}

PolyCurrent1 polyline_current(const Polyline& path, const Coef& coef, Ring ring) {
  std::vector<PolyCurrent1::Atom> raw;
  for (const auto& s : path.segments()) raw.push_back({s, coef});
  return PolyCurrent1(coef.size(), ring, std::move(raw));
}

AtomicMeasure0::AtomicMeasure0(std::size_t m) : m_(m) {}

AtomicMeasure0::AtomicMeasure0(std::size_t m, std::vector<Atom> raw) : m_(m) {
  std::map<Point, Coef> merged;
  for (auto& atom : raw) {
    if (atom.coef.size() != m) throw InvalidArgument("measure coefficient has wrong dimension");
    auto [it, inserted] = merged.try_emplace(atom.point, m, Rational(0));
    add_scaled(it->second, atom.coef, 1);
  }
  for (auto& [p, c] : merged) {
    if (!is_zero(c)) atoms_.push_back({p, std::move(c)});
  }
}

Coef AtomicMeasure0::at(const Point& p) const {
  for (const auto& atom : atoms_) {
    if (atom.point == p) return atom.coef;
  }
  return Coef(m_, Rational(0));
}

AtomicMeasure0 AtomicMeasure0::operator+(const AtomicMeasure0& other) const {
  if (other.m_ != m_) throw InvalidArgument("adding measures with different coefficient dimensions");
  std::vector<Atom> raw = atoms_;
  raw.insert(raw.end(), other.atoms_.begin(), other.atoms_.end());
  return AtomicMeasure0(m_, std::move(raw));
}

AtomicMeasure0 AtomicMeasure0::operator-() const {
  AtomicMeasure0 out(m_);
  out.atoms_ = atoms_;
  for (auto& atom : out.atoms_) {
    for (auto& x : atom.coef) x = -x;
  }
  return out;
}

bool operator==(const AtomicMeasure0& lhs, const AtomicMeasure0& rhs) {
  if (lhs.m_ != rhs.m_ || lhs.atoms_.size() != rhs.atoms_.size()) return false;
  for (std::size_t k = 0; k < lhs.atoms_.size(); ++k) {
    if (!(lhs.atoms_[k].point == rhs.atoms_[k].point) || lhs.atoms_[k].coef != rhs.atoms_[k].coef) return false;
  }
  return true;
}

MailingInstance::MailingInstance(std::vector<Point> points, std::vector<std::vector<long long>> demand)
    : points_(std::move(points)), demand_(std::move(demand)) {
  const std::size_t n = points_.size();
  if (demand_.size() != n) throw InvalidArgument("demand matrix must be n x n");
  for (std::size_t i = 0; i < n; ++i) {
    if (demand_[i].size() != n) throw InvalidArgument("demand matrix must be n x n");
    if (demand_[i][i] != 0) throw InvalidArgument("demand matrix must have a zero diagonal");
    for (long long g : demand_[i]) {
      if (g < 0) throw InvalidArgument("demand entries must be nonnegative");
    }
    if (points_[i].dim() != points_.front().dim()) throw InvalidArgument("points mix dimensions");
    for (std::size_t j = 0; j < i; ++j) {
      if (points_[i] == points_[j]) throw InvalidArgument("instance points must be distinct");
    }
  }
}

long long MailingInstance::total() const {
  long long s = 0;
  for (const auto& row : demand_) {
    for (long long g : row) s += g;
  }
  return s;
}

PairOrdering::PairOrdering(const MailingInstance& inst) {
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    for (std::size_t j = 0; j < inst.n(); ++j) order.emplace_back(i, j);
  }
  *this = PairOrdering(inst, order);
}

PairOrdering::PairOrdering(const MailingInstance& inst, const std::vector<std::pair<std::size_t, std::size_t>>& order)
    : n_(inst.n()), index_(inst.n() * inst.n(), std::numeric_limits<std::size_t>::max()) {
  if (order.size() != n_ * n_) throw InvalidArgument("pair ordering must list all n^2 pairs");
  for (const auto& [i, j] : order) {
    if (i >= n_ || j >= n_) throw InvalidArgument("pair ordering refers to a point out of range");
    const std::size_t ch = i * n_ + j;
    if (index_[ch] != std::numeric_limits<std::size_t>::max()) throw InvalidArgument("pair listed twice in ordering");
    index_[ch] = blocks_.size();
    const auto g = static_cast<std::size_t>(inst.g(i, j));
    blocks_.push_back({i, j, total_, g});
    total_ += g;
  }
}

const PairOrdering::Block& PairOrdering::block_of(std::size_t i, std::size_t j) const {
  return blocks_.at(index_.at(i * n_ + j));
}

Coef PairOrdering::theta(std::size_t i, std::size_t j) const {
  const auto& b = block_of(i, j);
  Coef c(total_, Rational(0));
  for (std::size_t k = 0; k < b.size; ++k) c[b.start + k] = 1;
  return c;
}

AtomicMeasure0 boundary(const PolyCurrent1& t) {
  std::vector<AtomicMeasure0::Atom> raw;
  raw.reserve(2 * t.atoms().size());
  for (const auto& atom : t.atoms()) {
    raw.push_back({atom.segment.b(), atom.coef});
    Coef neg = atom.coef;
    for (auto& x : neg) x = -x;
    raw.push_back({atom.segment.a(), std::move(neg)});
  }
  return AtomicMeasure0(t.m(), std::move(raw));
}

double mass(const PolyCurrent1& t, const NormSpec& spec) {
  double total = 0.0;
  for (const auto& atom : t.atoms()) total += coeff_norm(atom.coef, spec) * length(atom.segment);
  return total;
}

double energy(const PolyCurrent1& t, const PhiNorm& phi, const Alpha& alpha) {
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(t.m()))));
  if (n * n != t.m()) throw InvalidArgument("energy expects coefficients in Z^{n x n}");
  double total = 0.0;
  for (const auto& atom : t.atoms()) total += mailing_cost(atom.coef, phi, alpha) * length(atom.segment);
  return total;
}

AtomicMeasure0 build_boundary_mailing(const MailingInstance& inst) {
  const std::size_t n = inst.n();
  std::vector<AtomicMeasure0::Atom> raw;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const long long g = inst.g(i, j);
      if (g == 0) continue;
      Coef c(n * n, Rational(0));
      c[inst.channel(i, j)] = g;
      raw.push_back({inst.points()[j], c});
      c[inst.channel(i, j)] = -g;
      raw.push_back({inst.points()[i], std::move(c)});
    }
  }
  return AtomicMeasure0(n * n, std::move(raw));
}

AtomicMeasure0 build_boundary_relaxed(const MailingInstance& inst, const PairOrdering& ord) {
  if (ord.n() != inst.n() || static_cast<long long>(ord.total()) != inst.total()) {
    throw InvalidArgument("pair ordering does not match the instance");
  }
  std::vector<AtomicMeasure0::Atom> raw;
  for (const auto& b : ord.blocks()) {
    if (static_cast<long long>(b.size) != inst.g(b.i, b.j)) throw InvalidArgument("pair ordering does not match the instance");
    if (b.size == 0) continue;
    Coef theta = ord.theta(b.i, b.j);
    raw.push_back({inst.points()[b.j], theta});
    for (auto& x : theta) x = -x;
    raw.push_back({inst.points()[b.i], std::move(theta)});
  }
  return AtomicMeasure0(ord.total(), std::move(raw));
}

namespace {

struct FlowEdge {
  std::size_t from;
  std::size_t to;
  long long flow;
};

struct FlowGraph {
  std::vector<Point> vertices;
  std::vector<FlowEdge> edges;
  std::vector<std::vector<std::size_t>> out;  // ascending edge ids
};

// Directed graph of the channel's flow. Atoms are split wherever another
// atom touches or crosses them, so that graph-simple walks are simple curves.
FlowGraph build_flow_graph(const PolyCurrent1& t) {
  std::vector<std::pair<Segment, long long>> pieces;
  for (const auto& atom : t.atoms()) pieces.emplace_back(atom.segment, to_integer(atom.coef[0]));

  FlowGraph g;
  std::map<Point, std::size_t> ids;
  auto vertex = [&](const Point& p) {
    auto [it, inserted] = ids.try_emplace(p, g.vertices.size());
    if (inserted) g.vertices.push_back(p);
    return it->second;
  };

  for (std::size_t e = 0; e < pieces.size(); ++e) {
    const Segment& seg = pieces[e].first;
    std::vector<Rational> cuts{Rational(0), Rational(1)};
    for (std::size_t f = 0; f < pieces.size(); ++f) {
      if (f == e) continue;
      const auto hit = intersect(seg, pieces[f].first);
      if (hit.kind == SegmentIntersection::Kind::kNone) continue;
      cuts.push_back(hit.lo);
      cuts.push_back(hit.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const long long c = pieces[e].second;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const std::size_t u = vertex(seg.at(cuts[k]));
      const std::size_t v = vertex(seg.at(cuts[k + 1]));
      if (c > 0) {
        g.edges.push_back({u, v, c});
      } else {
        g.edges.push_back({v, u, -c});
      }
    }
  }
  g.out.resize(g.vertices.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) g.out[g.edges[e].from].push_back(e);
  return g;
}

std::size_t next_edge(const FlowGraph& g, std::size_t v) {
  for (std::size_t e : g.out[v]) {
    if (g.edges[e].flow > 0) return e;
  }
  throw std::logic_error("flow decomposition reached a vertex with no outgoing flow");
}

std::vector<Point> loop_points(const FlowGraph& g, const std::vector<std::size_t>& loop) {
  std::vector<Point> pts;
  pts.push_back(g.vertices[g.edges[loop.front()].from]);
  for (std::size_t e : loop) pts.push_back(g.vertices[g.edges[e].to]);
  return pts;
}

double loop_length(const FlowGraph& g, const std::vector<std::size_t>& loop) {
  double total = 0.0;
  for (std::size_t e : loop) total += distance(g.vertices[g.edges[e].from], g.vertices[g.edges[e].to]);
  return total;
}

void peel(FlowGraph& g, const std::vector<std::size_t>& loop, FlowDecomposition& out) {
  long long mult = std::numeric_limits<long long>::max();
  for (std::size_t e : loop) mult = std::min(mult, g.edges[e].flow);
  for (std::size_t e : loop) g.edges[e].flow -= mult;
  out.cycle_length += static_cast<double>(mult) * loop_length(g, loop);
  out.cycles.emplace_back(loop_points(g, loop), mult);
}

}  // namespace

FlowDecomposition decompose_component(const PolyCurrent1& t) {
  if (t.m() != 1) throw InvalidArgument("decompose_component expects a single-channel current");
  if (t.ring() != Ring::kInteger) throw InvalidArgument("decompose_component expects integer coefficients");

  FlowGraph g = build_flow_graph(t);
  const std::size_t nv = g.vertices.size();
  std::vector<long long> excess(nv, 0);  // inflow - outflow
  for (const auto& e : g.edges) {
    excess[e.to] += e.flow;
    excess[e.from] -= e.flow;
  }
  long long balance = 0;
  for (long long x : excess) balance += x;
  if (balance != 0) throw InvalidArgument("channel boundary is not balanced");

  FlowDecomposition out;
  std::vector<long long> demand(nv, 0);
  for (std::size_t v = 0; v < nv; ++v) demand[v] = std::max<long long>(excess[v], 0);

  std::vector<long long> on_stack(nv, -1);
  for (std::size_t s = 0; s < nv; ++s) {
    while (excess[s] < 0) {
      std::vector<std::size_t> verts{s};
      std::vector<std::size_t> path_edges;
      on_stack[s] = 0;
      std::size_t v = s;
      while (!(v != s && demand[v] > 0)) {
        const std::size_t e = next_edge(g, v);
        const std::size_t w = g.edges[e].to;
        if (on_stack[w] >= 0) {
          const auto k = static_cast<std::size_t>(on_stack[w]);
          std::vector<std::size_t> loop(path_edges.begin() + static_cast<std::ptrdiff_t>(k), path_edges.end());
          loop.push_back(e);
          peel(g, loop, out);
          for (std::size_t q = k + 1; q < verts.size(); ++q) on_stack[verts[q]] = -1;
          verts.resize(k + 1);
          path_edges.resize(k);
          v = w;
          continue;
        }
        on_stack[w] = static_cast<long long>(verts.size());
        verts.push_back(w);
        path_edges.push_back(e);
        v = w;
      }
      for (std::size_t e : path_edges) g.edges[e].flow -= 1;
      ++excess[s];
      --demand[v];
      std::vector<Point> pts;
      pts.reserve(verts.size());
      for (std::size_t q : verts) {
        pts.push_back(g.vertices[q]);
        on_stack[q] = -1;
      }
      out.paths.emplace_back(std::move(pts));
    }
  }

  // What is left is a circulation.
  for (std::size_t start = 0; start < g.edges.size(); ++start) {
    while (g.edges[start].flow > 0) {
      std::vector<std::size_t> verts{g.edges[start].from};
      std::vector<std::size_t> walk;
      on_stack[verts.front()] = 0;
      std::size_t e = start;
      while (true) {
        const std::size_t w = g.edges[e].to;
        if (on_stack[w] >= 0) {
          const auto k = static_cast<std::size_t>(on_stack[w]);
          std::vector<std::size_t> loop(walk.begin() + static_cast<std::ptrdiff_t>(k), walk.end());
          loop.push_back(e);
          peel(g, loop, out);
          break;
        }
        on_stack[w] = static_cast<long long>(verts.size());
        verts.push_back(w);
        walk.push_back(e);
        e = next_edge(g, w);
      }
      for (std::size_t q : verts) on_stack[q] = -1;
    }
  }
  return out;
}

CycleRemoval remove_cycles_with_report(const PolyCurrent1& t) {
  if (t.ring() != Ring::kInteger) throw InvalidArgument("cycle removal expects an integer current");
  std::vector<PolyCurrent1::Atom> raw;
  double dropped = 0.0;
  for (std::size_t ch = 0; ch < t.m(); ++ch) {
    const PolyCurrent1 part = t.channel(ch);
    if (part.empty()) continue;
    const FlowDecomposition dec = decompose_component(part);
    if (dec.cycles.empty()) {
      for (const auto& atom : part.atoms()) {
        Coef c(t.m(), Rational(0));
        c[ch] = atom.coef[0];
        raw.push_back({atom.segment, std::move(c)});
      }
      continue;
    }
    dropped += dec.cycle_length;
    for (const auto& path : dec.paths) {
      for (const auto& s : path.segments()) raw.push_back({s, unit_coef(t.m(), ch)});
    }
  }
  return {PolyCurrent1(t.m(), Ring::kInteger, std::move(raw)), dropped};
}

PolyCurrent1 remove_cycles(const PolyCurrent1& t) { return remove_cycles_with_report(t).current; }

PolyCurrent1 lift_to_relaxed(const PolyCurrent1& t, const MailingInstance& inst, const PairOrdering& ord) {
  const std::size_t n = inst.n();
  if (t.m() != n * n) throw InvalidArgument("lift expects coefficients in Z^{n x n}");
  if (t.ring() != Ring::kInteger) throw InvalidArgument("lift expects an integer current");
  if (!(boundary(t) == build_boundary_mailing(inst))) throw BoundaryMismatch("current boundary differs from B");
  const std::size_t big_n = ord.total();
  std::vector<PolyCurrent1::Atom> raw;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const PolyCurrent1 part = t.channel(inst.channel(i, j));
      if (part.empty()) continue;
      const FlowDecomposition dec = decompose_component(part);
      if (!dec.cycles.empty()) {
        throw InvalidArgument("channel (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                              ") has residual cycles; remove cycles before lifting");
      }
      const auto& block = ord.block_of(i, j);
      if (dec.paths.size() != block.size) throw BoundaryMismatch("path count differs from g_ij");
      for (std::size_t l = 0; l < dec.paths.size(); ++l) {
        for (const auto& s : dec.paths[l].segments()) raw.push_back({s, unit_coef(big_n, block.start + l)});
      }
    }
  }
  return PolyCurrent1(big_n, Ring::kInteger, std::move(raw));
}

PolyCurrent1 project_relaxed(const PolyCurrent1& r, const PairOrdering& ord) {
  if (r.m() != ord.total()) throw InvalidArgument("relaxed current dimension differs from N");
  const std::size_t n = ord.n();
  std::vector<PolyCurrent1::Atom> raw;
  for (const auto& atom : r.atoms()) {
    Coef c(n * n, Rational(0));
    for (const auto& b : ord.blocks()) {
      for (std::size_t k = 0; k < b.size; ++k) c[b.i * n + b.j] += atom.coef[b.start + k];
    }
    raw.push_back({atom.segment, std::move(c)});
  }
  return PolyCurrent1(n * n, r.ring(), std::move(raw));
}

}  // namespace oritrans
