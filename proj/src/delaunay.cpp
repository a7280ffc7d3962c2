#include "clgm/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace clgm {
namespace {

using Real = long double;

struct P {
  Real x, y;
};

constexpr Real kDegenerate = 1e-12L;

Real orient(const P& a, const P& b, const P& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 when d lies strictly inside the circumcircle of counter-clockwise abc.
Real incircle(const P& a, const P& b, const P& c, const P& d) {
  const Real adx = a.x - d.x, ady = a.y - d.y;
  const Real bdx = b.x - d.x, bdy = b.y - d.y;
  const Real cdx = c.x - d.x, cdy = c.y - d.y;
  const Real ad = adx * adx + ady * ady;
  const Real bd = bdx * bdx + bdy * bdy;
  const Real cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

std::vector<Edge> path_in_coordinate_order(const Points2& points) {
  std::vector<Index> order(points.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (points(a, 0) != points(b, 0)) return points(a, 0) < points(b, 0);
    return points(a, 1) < points(b, 1);
  });
  std::vector<Edge> edges;
  for (std::size_t k = 1; k < order.size(); ++k)
    edges.emplace_back(std::min(order[k - 1], order[k]), std::max(order[k - 1], order[k]));
  std::sort(edges.begin(), edges.end());
  return edges;
}

// Points shifted and scaled into [-1, 1]^2.
std::vector<P> normalized(const Points2& points) {
  const Eigen::Vector2d lo = points.colwise().minCoeff();
  const Eigen::Vector2d hi = points.colwise().maxCoeff();
  const Eigen::Vector2d mid = (lo + hi) / 2;
  const double half = std::max((hi - lo).maxCoeff() / 2, 1e-300);
  std::vector<P> out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r)
    out[r] = {Real(points(r, 0) - mid(0)) / half, Real(points(r, 1) - mid(1)) / half};
  return out;
}

bool all_collinear(const std::vector<P>& pts) {
  for (std::size_t k = 2; k < pts.size(); ++k)
    if (std::fabs(orient(pts[0], pts[1], pts[k])) > kDegenerate) return false;
  return true;
}

}  // namespace

std::vector<std::array<Index, 3>> delaunay_triangles(const Points2& points) {
  const Index n = static_cast<Index>(points.rows());
  if (n < 3) return {};
  {
    std::set<std::pair<double, double>> seen;
    for (Index r = 0; r < n; ++r)
      if (!seen.insert({points(r, 0), points(r, 1)}).second)
        throw precondition_error("delaunay: duplicate points");
  }
  std::vector<P> pts = normalized(points);
  if (all_collinear(pts)) return {};

  // Super triangle far outside the normalized box; its vertices are n, n+1, n+2.
  constexpr Real big = 1e5L;
  pts.push_back({-big, -big});
  pts.push_back({big, -big});
  pts.push_back({0, big});

  std::vector<std::array<Index, 3>> tris{{n, n + 1, n + 2}};
  for (Index p = 0; p < n; ++p) {
    std::vector<std::array<Index, 3>> keep;
    std::map<Edge, int> boundary;  // directed edge of a bad triangle -> count
    std::vector<Edge> order;
    for (const auto& t : tris) {
      if (incircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[p]) > kDegenerate) {
        for (int e = 0; e < 3; ++e) {
          const Edge d{t[e], t[(e + 1) % 3]};
          const Edge key{std::min(d.first, d.second), std::max(d.first, d.second)};
          if (boundary[key]++ == 0) order.push_back(d);
        }
      } else {
        keep.push_back(t);
      }
    }
    for (const Edge& d : order)
      if (boundary[{std::min(d.first, d.second), std::max(d.first, d.second)}] == 1)
        keep.push_back({d.first, d.second, p});
    tris = std::move(keep);
  }

  std::vector<std::array<Index, 3>> out;
  for (auto t : tris) {
    if (t[0] >= n || t[1] >= n || t[2] >= n) continue;
    std::sort(t.begin(), t.end());
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> delaunay(const Points2& points) {
  if (points.rows() < 3) return path_in_coordinate_order(points);
  const auto tris = delaunay_triangles(points);
  if (tris.empty()) return path_in_coordinate_order(points);
  std::set<Edge> edges;
  for (const auto& t : tris) {
    edges.insert({t[0], t[1]});
    edges.insert({t[1], t[2]});
    edges.insert({t[0], t[2]});
  }
  return {edges.begin(), edges.end()};
}

}  // namespace clgm
