#include "oritrans/steiner.hpp"

#include "oritrans/error.hpp"

#include <limits>
#include <numeric>
#include <queue>

namespace oritrans {

PartitionedInstance::PartitionedInstance(std::vector<Point> points, std::vector<std::vector<std::size_t>> groups)
    : points_(std::move(points)), groups_(std::move(groups)) {
  const std::size_t n = points_.size();
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  group_of_.assign(n, kUnset);
  for (std::size_t i = 0; i < n; ++i) {
    if (points_[i].dim() != points_.front().dim()) throw InvalidArgument("points mix dimensions");
    for (std::size_t j = 0; j < i; ++j) {
      if (points_[i] == points_[j]) throw InvalidArgument("instance points must be distinct");
    }
  }
  std::size_t start = 0;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].size() < 2) throw InvalidArgument("every group needs at least two points");
    for (std::size_t p : groups_[g]) {
      if (p >= n) throw InvalidArgument("group refers to a point out of range");
      if (group_of_[p] != kUnset) throw InvalidArgument("point listed in two groups");
      group_of_[p] = g;
    }
    block_start_.push_back(start);
    start += groups_[g].size() - 1;
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (group_of_[p] == kUnset) throw InvalidArgument("point " + std::to_string(p + 1) + " is in no group");
  }
}

std::vector<Coef> build_g_vectors(const PartitionedInstance& inst) {
  const std::size_t m = inst.m();
  std::vector<Coef> g(inst.n(), Coef(m, Rational(0)));
  for (std::size_t grp = 0; grp < inst.k(); ++grp) {
    const auto& members = inst.groups()[grp];
    const std::size_t start = inst.block_start(grp);
    Coef& hub = g[members.back()];
    for (std::size_t r = 0; r + 1 < members.size(); ++r) {
      g[members[r]][start + r] = 1;
      hub[start + r] = -1;
    }
  }
  return g;
}

AtomicMeasure0 build_boundary_steiner(const PartitionedInstance& inst) {
  const auto g = build_g_vectors(inst);
  std::vector<AtomicMeasure0::Atom> raw;
  for (std::size_t l = 0; l < inst.n(); ++l) raw.push_back({inst.points()[l], g[l]});
  return AtomicMeasure0(inst.m(), std::move(raw));
}

double Forest::length() const {
  double total = 0.0;
  for (const auto& [u, v] : edges) total += distance(vertices[u], vertices[v]);
  return total;
}

namespace {

struct Components {
  std::vector<std::size_t> parent;
  explicit Components(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

void validate_forest(const Forest& forest, const PartitionedInstance& inst) {
  const std::size_t nv = forest.vertices.size();
  if (nv < inst.n()) throw InvalidArgument("forest is missing terminal vertices");
  for (std::size_t l = 0; l < inst.n(); ++l) {
    if (!(forest.vertices[l] == inst.points()[l])) {
      throw InvalidArgument("forest vertex " + std::to_string(l) + " is not terminal " + std::to_string(l + 1));
    }
  }
  Components comp(nv);
  for (const auto& [u, v] : forest.edges) {
    if (u >= nv || v >= nv) throw InvalidArgument("forest edge refers to a missing vertex");
    if (forest.vertices[u] == forest.vertices[v]) throw InvalidArgument("forest has a zero-length edge");
    if (!comp.unite(u, v)) throw InvalidArgument("forest contains a cycle");
  }
  for (std::size_t grp = 0; grp < inst.k(); ++grp) {
    const auto& members = inst.groups()[grp];
    for (std::size_t p : members) {
      if (comp.find(p) != comp.find(members.front())) {
        throw InvalidArgument("group " + std::to_string(grp + 1) + " is not connected by the forest");
      }
    }
  }
}

PolyCurrent1 tree_to_current(const Forest& forest, const PartitionedInstance& inst) {
  validate_forest(forest, inst);
  const std::size_t nv = forest.vertices.size();
  std::vector<std::vector<std::size_t>> adj(nv);
  for (const auto& [u, v] : forest.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  const std::size_t m = inst.m();
  std::vector<PolyCurrent1::Atom> raw;
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  for (std::size_t grp = 0; grp < inst.k(); ++grp) {
    const auto& members = inst.groups()[grp];
    const std::size_t hub = members.back();
    std::vector<std::size_t> prev(nv, kNone);
    std::queue<std::size_t> queue;
    prev[hub] = hub;
    queue.push(hub);
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop();
      for (std::size_t v : adj[u]) {
        if (prev[v] != kNone) continue;
        prev[v] = u;
        queue.push(v);
      }
    }
    for (std::size_t r = 0; r + 1 < members.size(); ++r) {
      const Coef coef = unit_coef(m, inst.block_start(grp) + r);
      for (std::size_t v = members[r]; v != hub; v = prev[v]) {
        raw.push_back({Segment(forest.vertices[prev[v]], forest.vertices[v]), coef});
      }
    }
  }
  return PolyCurrent1(m, Ring::kInteger, std::move(raw));
}

}  // namespace oritrans
