#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "gazeaug/facemesh.hpp"

namespace gazeaug {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Positive when d lies inside the circumcircle of counter-clockwise (a, b, c).
// `bound` receives a magnitude estimate of the terms for a relative test.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double& bound) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double bc = bdx * cdy - bdy * cdx;
  const double ca = cdx * ady - cdy * adx;
  const double ab = adx * bdy - ady * bdx;
  bound = alift * (std::abs(bdx * cdy) + std::abs(bdy * cdx)) + blift * (std::abs(cdx * ady) + std::abs(cdy * adx)) +
          clift * (std::abs(adx * bdy) + std::abs(ady * bdx));
  return alift * bc + blift * ca + clift * ab;
}

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

class Triangulation {
 public:
  explicit Triangulation(std::span<const PixelPoint> pts) : pts_(pts) {}

  void add(int a, int b, int c) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({a, b, c});
    link(id);
  }

  // Lawson flips until every interior edge is locally Delaunay.
  void make_delaunay() {
    std::deque<std::pair<int, int>> queue;
    for (const auto& t : tris_)
      for (int k = 0; k < 3; ++k) queue.emplace_back(t[k], t[(k + 1) % 3]);
    while (!queue.empty()) {
      const auto [a, b] = queue.front();
      queue.pop_front();
      const auto it1 = edges_.find(edge_key(a, b));
      const auto it2 = edges_.find(edge_key(b, a));
      if (it1 == edges_.end() || it2 == edges_.end()) continue;
      const int t1 = it1->second;
      const int t2 = it2->second;
      const int c = opposite(t1, a, b);
      const int d = opposite(t2, b, a);
      double bound = 0.0;
      const double det = incircle(pts_[a], pts_[b], pts_[c], pts_[d], bound);
      if (det <= 1e-12 * bound) continue;
      unlink(t1);
      unlink(t2);
      tris_[t1] = {a, d, c};
      tris_[t2] = {d, b, c};
      link(t1);
      link(t2);
      queue.emplace_back(a, d);
      queue.emplace_back(d, b);
      queue.emplace_back(b, c);
      queue.emplace_back(c, a);
    }
  }

  std::vector<Triangle> release() { return std::move(tris_); }

 private:
  int opposite(int t, int a, int b) const {
    for (int v : tris_[t])
      if (v != a && v != b) return v;
    return -1;
  }
  void link(int id) {
    const auto& t = tris_[id];
    for (int k = 0; k < 3; ++k) edges_[edge_key(t[k], t[(k + 1) % 3])] = id;
  }
  void unlink(int id) {
    const auto& t = tris_[id];
    for (int k = 0; k < 3; ++k) edges_.erase(edge_key(t[k], t[(k + 1) % 3]));
  }

  std::span<const PixelPoint> pts_;
  std::vector<Triangle> tris_;
  std::unordered_map<std::uint64_t, int> edges_;
};

}  // namespace

std::vector<Triangle> triangulate_fallback(std::span<const PixelPoint> points) {
  if (points.size() < 3) throw std::invalid_argument("triangulation needs at least 3 points");
  for (const auto& p : points)
    if (!p.allFinite()) throw std::invalid_argument("triangulation input must be finite");

  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return points[a].x() < points[b].x() || (points[a].x() == points[b].x() && points[a].y() < points[b].y());
  });
  order.erase(std::unique(order.begin(), order.end(), [&](int a, int b) { return points[a] == points[b]; }),
              order.end());
  if (order.size() < 3) throw std::invalid_argument("triangulation needs at least 3 distinct points");

  // seed: the leading collinear run plus the first point off its line
  std::size_t apex = 2;
  while (apex < order.size() && orient(points[order[0]], points[order[1]], points[order[apex]]) == 0.0) ++apex;
  if (apex == order.size()) throw std::invalid_argument("triangulation input is collinear");

  Triangulation tri(points);
  std::vector<int> hull;  // counter-clockwise
  const int q = order[apex];
  const bool ccw = orient(points[order[0]], points[order[1]], points[q]) > 0.0;
  for (std::size_t i = 0; i + 1 < apex; ++i) {
    if (ccw) tri.add(order[i], order[i + 1], q);
    else tri.add(order[i + 1], order[i], q);
  }
  if (ccw) {
    hull.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(apex));
  } else {
    hull.assign(order.rbegin() + static_cast<std::ptrdiff_t>(order.size() - apex), order.rend());
  }
  hull.push_back(q);

  std::vector<char> visible;
  for (std::size_t k = apex + 1; k < order.size(); ++k) {
    const int p = order[k];
    const std::size_t m = hull.size();
    visible.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i)
      visible[i] = orient(points[hull[i]], points[hull[(i + 1) % m]], points[p]) < 0.0;
    std::size_t start = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (visible[i] && !visible[(i + m - 1) % m]) {
        start = i;
        break;
      }
    }
    if (start == m) continue;  // numerically inside; cannot happen for exact input
    std::size_t end = start;
    while (visible[(end + 1) % m] && (end + 1) % m != start) end = (end + 1) % m;
    for (std::size_t i = start;; i = (i + 1) % m) {
      tri.add(hull[(i + 1) % m], hull[i], p);
      if (i == end) break;
    }
    std::vector<int> next;
    next.reserve(m + 1);
    for (std::size_t i = (end + 1) % m;; i = (i + 1) % m) {
      next.push_back(hull[i]);
      if (i == start) break;
    }
    next.push_back(p);
    hull = std::move(next);
  }

  tri.make_delaunay();
  return tri.release();
}

}  // namespace gazeaug
