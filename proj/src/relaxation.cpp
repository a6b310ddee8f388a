#include "oritrans/error.hpp"
#include "oritrans/solvers.hpp"

#include "format.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace oritrans {

namespace {

using Matrix = Eigen::MatrixXd;

struct SupportGraph {
  std::vector<Point> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // tail, head
  std::vector<double> lengths;
};

// Support pieces are merged where collinear and split at every mutual
// intersection and at boundary points, so flow can turn at any of them.
SupportGraph build_support(const std::vector<Segment>& support, const AtomicMeasure0& b) {
  std::vector<Segment> pieces;
  for (const auto& atom : overlay(support).atoms) pieces.push_back(atom.segment);
  SupportGraph g;
  std::map<Point, std::size_t> ids;
  auto vertex = [&](const Point& p) {
    auto [it, inserted] = ids.try_emplace(p, g.vertices.size());
    if (inserted) g.vertices.push_back(p);
    return it->second;
  };
  for (std::size_t e = 0; e < pieces.size(); ++e) {
    std::vector<Rational> cuts{Rational(0), Rational(1)};
    for (std::size_t f = 0; f < pieces.size(); ++f) {
      if (f == e) continue;
      const auto hit = intersect(pieces[e], pieces[f]);
      if (hit.kind == SegmentIntersection::Kind::kNone) continue;
      cuts.push_back(hit.lo);
      cuts.push_back(hit.hi);
    }
    for (const auto& atom : b.atoms()) {
      if (atom.point.dim() != pieces[e].dim()) throw InvalidArgument("boundary and support differ in dimension");
      if (auto t = parameter_on(pieces[e], atom.point)) cuts.push_back(*t);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const Segment piece(pieces[e].at(cuts[k]), pieces[e].at(cuts[k + 1]));
      g.edges.emplace_back(vertex(piece.a()), vertex(piece.b()));
      g.lengths.push_back(length(piece));
    }
  }
  return g;
}

// Euclidean projection onto the unit l^1 ball.
void project_l1_ball(Eigen::Ref<Eigen::RowVectorXd> v) {
  if (v.cwiseAbs().sum() <= 1.0) return;
  std::vector<double> u(v.size());
  for (long k = 0; k < v.size(); ++k) u[k] = std::abs(v(k));
  std::sort(u.rbegin(), u.rend());
  double cumulative = 0.0;
  double shift = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] > candidate) shift = candidate;
  }
  for (long k = 0; k < v.size(); ++k) {
    const double mag = std::max(std::abs(v(k)) - shift, 0.0);
    v(k) = v(k) < 0 ? -mag : mag;
  }
}

// prox of t ||.|| through the Moreau identity: v - t * P_{dual ball}(v / t).
void prox_norm(Eigen::Ref<Eigen::RowVectorXd> v, double t, NormSpec::Kind kind) {
  Eigen::RowVectorXd w = v / t;
  if (kind == NormSpec::Kind::kLinf) {
    project_l1_ball(w);
  } else {
    w = w.cwiseMax(-1.0).cwiseMin(1.0);
  }
  v -= t * w;
}

// A subgradient of ||.||_{phi,alpha} at t.
std::vector<double> phi_alpha_subgradient(const std::vector<double>& t, const PhiNorm& phi, const Alpha& alpha) {
  const double a_exp = alpha.value();
  std::vector<double> pos;
  std::vector<double> neg;
  for (double x : t) {
    pos.push_back(std::max(x, 0.0));
    neg.push_back(std::max(-x, 0.0));
  }
  auto lp = [&](const std::vector<double>& x) {
    std::vector<double> nz;
    for (double v : x) {
      if (v > 0.0) nz.push_back(v);
    }
    return norm_phi_alpha(nz, PhiNorm::l1(), alpha);
  };
  const double a = lp(pos);
  const double b = lp(neg);
  double da = 0.0;
  double db = 0.0;
  switch (phi.kind) {
    case PhiNorm::Kind::kL1:
      da = a > 0.0 ? 1.0 : 0.0;
      db = b > 0.0 ? 1.0 : 0.0;
      break;
    case PhiNorm::Kind::kLinf:
      da = a > b ? 1.0 : (a == b ? 0.5 : 0.0);
      db = b > a ? 1.0 : (a == b ? 0.5 : 0.0);
      break;
    case PhiNorm::Kind::kLr: {
      const double f = phi_eval(phi, a, b);
      if (f > 0.0) {
        da = std::pow(a / f, phi.r - 1.0);
        db = std::pow(b / f, phi.r - 1.0);
      }
      break;
    }
  }
  // d ||x||_p / d x_k = (x_k / ||x||_p)^(p - 1), p = 1 / alpha; p = inf picks
  // one largest entry.
  auto grad = [&](const std::vector<double>& x, double norm, double scale, double sign, std::vector<double>& out) {
    if (norm <= 0.0 || scale == 0.0) return;
    if (a_exp == 0.0) {
      const auto k = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
      out[k] += sign * scale;
      return;
    }
    const double p = 1.0 / a_exp;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] > 0.0) out[k] += sign * scale * std::pow(x[k] / norm, p - 1.0);
    }
  };
  std::vector<double> g(t.size(), 0.0);
  grad(pos, a, da, 1.0, g);
  grad(neg, b, db, -1.0, g);
  return g;
}

}  // namespace

SolveReport solve_real_relaxation(const std::vector<Segment>& support, const AtomicMeasure0& b, const NormSpec& spec,
                                  double tol, const Budget& budget) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  const std::size_t m = b.m();
  if (spec.dim != 0 && spec.dim != m) throw InvalidArgument("norm dimension differs from the boundary dimension");
  const SupportGraph g = build_support(support, b);
  const std::size_t nv = g.vertices.size();
  const std::size_t ne = g.edges.size();

  SolveReport report;
  report.method = spec.kind == NormSpec::Kind::kPhiAlpha ? "relaxation-subgradient" : "relaxation-douglas-rachford";
  report.config = {{"tol", format_number(tol)}, {"max_iterations", std::to_string(budget.max_iterations)}};

  // Exact feasibility: the boundary sits on vertices and every channel
  // balances on every connected component.
  std::map<Point, std::size_t> ids;
  for (std::size_t v = 0; v < nv; ++v) ids.emplace(g.vertices[v], v);
  std::vector<std::size_t> comp(nv);
  std::iota(comp.begin(), comp.end(), 0);
  auto find = [&](std::size_t x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };
  for (const auto& [u, v] : g.edges) comp[find(u)] = find(v);
  std::map<std::size_t, Coef> balance;
  Matrix rhs = Matrix::Zero(static_cast<long>(nv), static_cast<long>(m));
  for (const auto& atom : b.atoms()) {
    auto it = ids.find(atom.point);
    if (it == ids.end()) throw Infeasible("boundary point is not on the support");
    auto& bal = balance.try_emplace(find(it->second), m, Rational(0)).first->second;
    for (std::size_t c = 0; c < m; ++c) {
      bal[c] += atom.coef[c];
      rhs(static_cast<long>(it->second), static_cast<long>(c)) = to_double(atom.coef[c]);
    }
  }
  for (const auto& [root, bal] : balance) {
    if (!is_zero(bal)) throw Infeasible("boundary does not balance on a connected component of the support");
  }
  if (ne == 0) {
    report.value = 0.0;
    report.current = PolyCurrent1(m, Ring::kReal);
    return report;
  }

  // Incidence: the flow on edge e enters its head and leaves its tail.
  Matrix inc = Matrix::Zero(static_cast<long>(nv), static_cast<long>(ne));
  for (std::size_t e = 0; e < ne; ++e) {
    inc(static_cast<long>(g.edges[e].second), static_cast<long>(e)) += 1.0;
    inc(static_cast<long>(g.edges[e].first), static_cast<long>(e)) -= 1.0;
  }
  const Matrix lap_pinv = Eigen::CompleteOrthogonalDecomposition<Matrix>(inc * inc.transpose()).pseudoInverse();
  auto project = [&](const Matrix& x) -> Matrix { return x - inc.transpose() * (lap_pinv * (inc * x - rhs)); };
  auto objective = [&](const Matrix& x) {
    double total = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
      const Eigen::RowVectorXd row = x.row(static_cast<long>(e));
      total += g.lengths[e] * coeff_norm(std::span<const double>(row.data(), m), spec);
    }
    return total;
  };

  Matrix x = project(Matrix::Zero(static_cast<long>(ne), static_cast<long>(m)));
  double value = objective(x);
  std::size_t it = 0;
  if (spec.kind != NormSpec::Kind::kPhiAlpha) {
    const double mean_length = std::accumulate(g.lengths.begin(), g.lengths.end(), 0.0) / static_cast<double>(ne);
    const double gamma = 1.0 / mean_length;
    Matrix z = x;
    double residual = 0.0;
    report.converged = false;
    for (it = 1; it <= budget.max_iterations; ++it) {
      x = project(z);
      Matrix y = 2.0 * x - z;
      for (std::size_t e = 0; e < ne; ++e) {
        Eigen::RowVectorXd row = y.row(static_cast<long>(e));
        prox_norm(row, gamma * g.lengths[e], spec.kind);
        y.row(static_cast<long>(e)) = row;
      }
      z += y - x;
      if (it % 20 == 0) {
        residual = (y - x).cwiseAbs().maxCoeff();
        const double next = objective(x);
        const bool steady = std::abs(next - value) <= 0.01 * tol * std::max(1.0, next);
        value = next;
        if (residual <= 0.01 * tol && steady) {
          report.converged = true;
          break;
        }
      }
    }
    x = project(z);
    value = objective(x);
    report.residual = residual;
  } else {
    // Averaged projected subgradient with step c / sqrt(t).
    const double c = std::max(rhs.cwiseAbs().maxCoeff(), 1e-12);
    Matrix avg = x;
    Matrix best = x;
    double best_value = value;
    double checkpoint = value;
    report.converged = false;
    for (it = 1; it <= budget.max_iterations; ++it) {
      Matrix grad(static_cast<long>(ne), static_cast<long>(m));
      for (std::size_t e = 0; e < ne; ++e) {
        std::vector<double> row(m);
        for (std::size_t k = 0; k < m; ++k) row[k] = x(static_cast<long>(e), static_cast<long>(k));
        const auto sg = phi_alpha_subgradient(row, spec.phi, spec.alpha);
        for (std::size_t k = 0; k < m; ++k) grad(static_cast<long>(e), static_cast<long>(k)) = g.lengths[e] * sg[k];
      }
      x = project(x - (c / std::sqrt(static_cast<double>(it))) * grad);
      avg += (x - avg) / static_cast<double>(it + 1);
      for (const Matrix* cand : {&x, &avg}) {
        const double v = objective(*cand);
        if (v < best_value) {
          best_value = v;
          best = *cand;
        }
      }
      if (it % 5000 == 0) {
        if (checkpoint - best_value <= tol * std::max(1.0, best_value)) {
          report.converged = true;
          break;
        }
        checkpoint = best_value;
      }
    }
    x = best;
    value = best_value;
  }

  std::vector<PolyCurrent1::Atom> raw;
  for (std::size_t e = 0; e < ne; ++e) {
    Coef coef(m);
    for (std::size_t k = 0; k < m; ++k) coef[k] = rational_from_double(x(static_cast<long>(e), static_cast<long>(k)));
    if (is_zero(coef)) continue;
    raw.push_back({Segment(g.vertices[g.edges[e].first], g.vertices[g.edges[e].second]), std::move(coef)});
  }
  report.current = PolyCurrent1(m, Ring::kReal, std::move(raw));
  report.value = value;
  report.enumerated = it;
  report.evaluated = ne;
  report.winner = "edges " + std::to_string(ne);
  if (spec.kind == NormSpec::Kind::kPhiAlpha) report.residual = (inc * x - rhs).cwiseAbs().maxCoeff();
  return report;
}

}  // namespace oritrans
