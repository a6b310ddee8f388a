#pragma once

#include "oritrans/currents.hpp"
#include "oritrans/mailing.hpp"
#include "oritrans/solvers.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace testing_support {

using namespace oritrans;

inline Point P(long long x, long long y) { return Point{Rational(x), Rational(y)}; }

inline Coef E(std::size_t n, std::size_t i, std::size_t j, long long v = 1) {
  Coef c(n * n);
  c[i * n + j] = v;
  return c;
}

inline PolyCurrent1 segment_current(const Point& a, const Point& b, Coef coef, Ring ring = Ring::kInteger) {
  const std::size_t m = coef.size();
  return PolyCurrent1(m, ring, {{Segment(a, b), std::move(coef)}});
}

// Random instance with n points on an nx x ny unit lattice and total demand in
// [1, max_units].
inline MailingInstance random_lattice_instance(std::mt19937& rng, std::size_t max_n, long long max_units,
                                               int nx, int ny) {
  std::uniform_int_distribution<std::size_t> count(2, max_n);
  const std::size_t n = count(rng);
  std::set<std::pair<int, int>> used;
  std::vector<Point> pts;
  while (pts.size() < n) {
    const int x = std::uniform_int_distribution<int>(0, nx - 1)(rng);
    const int y = std::uniform_int_distribution<int>(0, ny - 1)(rng);
    if (used.insert({x, y}).second) pts.push_back(P(x, y));
  }
  std::vector<std::vector<long long>> g(n, std::vector<long long>(n, 0));
  const long long units = std::uniform_int_distribution<long long>(1, max_units)(rng);
  for (long long u = 0; u < units; ++u) {
    std::size_t i = 0;
    std::size_t j = 0;
    while (i == j) {
      i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      j = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    ++g[i][j];
  }
  return MailingInstance(pts, g);
}

// Simple lattice path from a to b found by a randomized depth-first search.
inline std::vector<Point> random_simple_path(std::mt19937& rng, int nx, int ny, std::pair<int, int> a,
                                             std::pair<int, int> b) {
  std::vector<std::pair<int, int>> stack{a};
  std::set<std::pair<int, int>> seen{a};
  std::vector<std::vector<std::pair<int, int>>> options;
  auto neighbours = [&](std::pair<int, int> p) {
    std::vector<std::pair<int, int>> out;
    const int dx[] = {1, -1, 0, 0};
    const int dy[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const std::pair<int, int> q{p.first + dx[k], p.second + dy[k]};
      if (q.first >= 0 && q.first < nx && q.second >= 0 && q.second < ny) out.push_back(q);
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
  };
  options.push_back(neighbours(a));
  while (stack.back() != b) {
    if (options.back().empty()) {
      stack.pop_back();
      options.pop_back();
      continue;
    }
    const auto q = options.back().back();
    options.back().pop_back();
    if (!seen.insert(q).second) continue;
    stack.push_back(q);
    options.push_back(neighbours(q));
  }
  std::vector<Point> out;
  for (const auto& [x, y] : stack) out.push_back(P(x, y));
  return out;
}

inline std::pair<int, int> coords(const Point& p) {
  return {p[0].convert_to<int>(), p[1].convert_to<int>()};
}

inline PathFamily random_family(std::mt19937& rng, const MailingInstance& inst, int nx, int ny) {
  std::vector<LabeledPath> paths;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    for (std::size_t j = 0; j < inst.n(); ++j) {
      for (long long k = 0; k < inst.g(i, j); ++k) {
        const auto verts = random_simple_path(rng, nx, ny, coords(inst.points()[i]), coords(inst.points()[j]));
        paths.push_back({i, j, Polyline(verts)});
      }
    }
  }
  return PathFamily(inst, std::move(paths));
}

// A unit square loop with lower-left corner (x, y) carried by coefficient c.
inline PolyCurrent1 square_loop(long long x, long long y, const Coef& c) {
  const std::vector<Point> v{P(x, y), P(x + 1, y), P(x + 1, y + 1), P(x, y + 1)};
  std::vector<PolyCurrent1::Atom> atoms;
  for (std::size_t k = 0; k < 4; ++k) atoms.push_back({Segment(v[k], v[(k + 1) % 4]), c});
  return PolyCurrent1(c.size(), Ring::kInteger, std::move(atoms));
}

}  // namespace testing_support
