#include "oritrans/mailing.hpp"

#include "oritrans/error.hpp"

#include <algorithm>
#include <utility>

namespace oritrans {

PathFamily::PathFamily(MailingInstance instance, std::vector<LabeledPath> paths)
    : instance_(std::move(instance)), paths_(std::move(paths)) {
  const std::size_t n = instance_.n();
  for (const auto& p : paths_) {
    if (p.i >= n || p.j >= n) throw InvalidArgument("path commodity refers to a point out of range");
    if (p.i == p.j) throw InvalidArgument("path commodity must join two different points");
    if (p.path.front().dim() != instance_.points().front().dim()) {
      throw InvalidArgument("path dimension differs from the instance");
    }
  }
}

std::optional<std::string> compatibility_problem(const PathFamily& f) {
  const auto& inst = f.instance();
  const std::size_t n = inst.n();
  std::vector<long long> count(n * n, 0);
  for (std::size_t k = 0; k < f.paths().size(); ++k) {
    const auto& p = f.paths()[k];
    const std::string label = "path " + std::to_string(k) + " (" + std::to_string(p.i + 1) + "," +
                              std::to_string(p.j + 1) + ")";
    if (!(p.path.front() == inst.points()[p.i])) return label + " does not start at p_i";
    if (!(p.path.back() == inst.points()[p.j])) return label + " does not end at p_j";
    if (!is_simple(p.path)) return label + " is not simple";
    ++count[inst.channel(p.i, p.j)];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (count[inst.channel(i, j)] != inst.g(i, j)) {
        return "commodity (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") has " +
               std::to_string(count[inst.channel(i, j)]) + " paths, expected " + std::to_string(inst.g(i, j));
      }
    }
  }
  return std::nullopt;
}

bool check_compatible(const PathFamily& f) { return !compatibility_problem(f).has_value(); }

void ThetaField::flip(std::size_t k) {
  auto& atom = atoms.at(k);
  atom.segment = atom.segment.reversed();
  std::swap(atom.plus, atom.minus);
  std::swap(atom.with, atom.against);
}

ThetaField theta_pm(const PathFamily& f) {
  std::vector<Segment> segments;
  std::vector<std::size_t> owner;
  for (std::size_t k = 0; k < f.paths().size(); ++k) {
    for (const auto& s : f.paths()[k].path.segments()) {
      segments.push_back(s);
      owner.push_back(k);
    }
  }
  ThetaField out;
  for (auto& atom : overlay(segments).atoms) {
    ThetaAtom t{atom.segment, 0, 0, {}, {}};
    for (const auto& cov : atom.coverage) {
      if (cov.sign > 0) {
        ++t.plus;
        t.with.push_back(owner[cov.input]);
      } else {
        ++t.minus;
        t.against.push_back(owner[cov.input]);
      }
    }
    out.atoms.push_back(std::move(t));
  }
  return out;
}

double energy_theta(const ThetaField& theta, const PhiNorm& phi, const Alpha& alpha) {
  double total = 0.0;
  for (const auto& atom : theta.atoms) {
    total += oriented_cost(phi, alpha, static_cast<double>(atom.minus), static_cast<double>(atom.plus)) *
             length(atom.segment);
  }
  return total;
}

double energy_family(const PathFamily& f, const PhiNorm& phi, const Alpha& alpha) {
  return energy_theta(theta_pm(f), phi, alpha);
}

PolyCurrent1 family_to_current(const PathFamily& f) {
  const auto& inst = f.instance();
  const std::size_t m = inst.n() * inst.n();
  std::vector<PolyCurrent1::Atom> raw;
  for (const auto& p : f.paths()) {
    for (const auto& s : p.path.segments()) raw.push_back({s, unit_coef(m, inst.channel(p.i, p.j))});
  }
  return PolyCurrent1(m, Ring::kInteger, std::move(raw));
}

FamilyFromCurrent current_to_family(const PolyCurrent1& t, const MailingInstance& inst) {
  const std::size_t n = inst.n();
  if (t.m() != n * n) throw InvalidArgument("current coefficients must live in Z^{n x n}");
  if (t.ring() != Ring::kInteger) throw InvalidArgument("current must have integer coefficients");
  if (!(boundary(t) == build_boundary_mailing(inst))) throw BoundaryMismatch("current boundary differs from B");
  std::vector<LabeledPath> paths;
  double dropped = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const PolyCurrent1 part = t.channel(inst.channel(i, j));
      if (part.empty()) continue;
      FlowDecomposition dec = decompose_component(part);
      dropped += dec.cycle_length;
      for (auto& path : dec.paths) paths.push_back({i, j, std::move(path)});
    }
  }
  return {PathFamily(inst, std::move(paths)), dropped};
}

}  // namespace oritrans
