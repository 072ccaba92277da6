#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "graphtv/error.hpp"
#include "graphtv/graph.hpp"

namespace graphtv {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

using PointSet = std::vector<Point2>;

/// Counter-clockwise vertex triple.
using Triangle = std::array<VertexId, 3>;

namespace geom {

/// Twice the signed area of (a,b,c); positive when counter-clockwise.
inline long double orient(const Point2& a, const Point2& b, const Point2& c) {
  return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
         (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
}

/// Positive when d lies strictly inside the circumcircle of ccw (a,b,c).
inline long double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const long double adx = static_cast<long double>(a.x) - d.x, ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x, bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x, cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

/// Magnitude scale of the incircle determinant, for relative tie tests.
inline long double incircle_scale(const Point2& a, const Point2& b, const Point2& c,
                                  const Point2& d) {
  long double s = 0.0;
  for (const Point2* p : {&a, &b, &c}) {
    const long double dx = static_cast<long double>(p->x) - d.x;
    const long double dy = static_cast<long double>(p->y) - d.y;
    s = std::max(s, dx * dx + dy * dy);
  }
  return s * s;
}

}  // namespace geom

namespace detail {

inline std::pair<VertexId, VertexId> sorted_pair(VertexId a, VertexId b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

// Co-circular quadrilaterals admit either diagonal. Flip towards the
// lexicographically smaller diagonal until stable, so the result does not
// depend on insertion history.
inline void normalize_cocircular(const PointSet& pts, std::vector<Triangle>& tris) {
  constexpr long double kTie = 1e-12L;
  for (int pass = 0; pass < 64; ++pass) {
    std::map<std::pair<VertexId, VertexId>, std::vector<std::size_t>> owners;
    for (std::size_t t = 0; t < tris.size(); ++t)
      for (int i = 0; i < 3; ++i) owners[sorted_pair(tris[t][i], tris[t][(i + 1) % 3])].push_back(t);
    bool flipped = false;
    std::vector<char> touched(tris.size(), 0);
    for (const auto& [edge, ts] : owners) {
      if (ts.size() != 2 || touched[ts[0]] || touched[ts[1]]) continue;
      const Triangle& t0 = tris[ts[0]];
      const Triangle& t1 = tris[ts[1]];
      auto apex = [&](const Triangle& t) {
        for (VertexId v : t)
          if (v != edge.first && v != edge.second) return v;
        return t[0];
      };
      const VertexId c = apex(t0), d = apex(t1);
      if (detail::sorted_pair(c, d) >= edge) continue;
      // orient the shared edge (a,b) so that (a,b,c) is counter-clockwise
      VertexId a = edge.first, b = edge.second;
      if (geom::orient(pts[a], pts[b], pts[c]) < 0) std::swap(a, b);
      const long double in = geom::incircle(pts[a], pts[b], pts[c], pts[d]);
      if (std::abs(in) > kTie * geom::incircle_scale(pts[a], pts[b], pts[c], pts[d])) continue;
      // the new diagonal (c,d) needs a strictly convex quadrilateral
      if (geom::orient(pts[c], pts[d], pts[b]) <= 0 || geom::orient(pts[d], pts[c], pts[a]) <= 0)
        continue;
      tris[ts[0]] = {c, a, d};
      tris[ts[1]] = {d, b, c};
      touched[ts[0]] = touched[ts[1]] = 1;
      flipped = true;
    }
    if (!flipped) return;
  }
}

}  // namespace detail

// Incremental Bowyer-Watson inside a large super-triangle. Points are
// inserted in lexicographic (x, y) order; points within 1e-12 of an already
// inserted point are skipped and appear in no triangle.
inline std::vector<Triangle> delaunay_triangulate(const PointSet& pts) {
  const std::size_t n = pts.size();
  if (n < 3) throw Error(Errc::TooFewPoints, "need at least three points");
  for (const Point2& p : pts)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error(Errc::NonFiniteData, "point coordinates must be finite");

  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), VertexId{0});
  std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
    return pts[a].x != pts[b].x ? pts[a].x < pts[b].x : (pts[a].y != pts[b].y ? pts[a].y < pts[b].y : a < b);
  });

  {
    bool collinear = true;
    const Point2& p0 = pts[order.front()];
    const Point2& p1 = pts[order.back()];
    const long double dx = static_cast<long double>(p1.x) - p0.x;
    const long double dy = static_cast<long double>(p1.y) - p0.y;
    const long double area_tol = 1e-14L * (dx * dx + dy * dy);
    for (const Point2& q : pts)
      if (std::abs(geom::orient(p0, p1, q)) > area_tol) {
        collinear = false;
        break;
      }
    if (collinear) throw Error(Errc::AllCollinear, "points span no area");
  }

  double minx = pts[0].x, maxx = minx, miny = pts[0].y, maxy = miny;
  for (const Point2& p : pts) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const double span = std::max({maxx - minx, maxy - miny, 1e-300});
  const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
  const double big = 1e4 * span;

  PointSet work(pts);
  const auto s0 = static_cast<VertexId>(n);
  work.push_back({cx - 2 * big, cy - big});
  work.push_back({cx + 2 * big, cy - big});
  work.push_back({cx, cy + 2 * big});

  std::vector<Triangle> tris{{s0, s0 + 1, s0 + 2}};
  std::vector<std::pair<VertexId, VertexId>> boundary;
  std::vector<Triangle> kept;
  const Point2* last = nullptr;
  for (VertexId v : order) {
    const Point2& p = pts[v];
    if (last && std::abs(p.x - last->x) <= 1e-12 && std::abs(p.y - last->y) <= 1e-12) continue;
    last = &p;
    boundary.clear();
    kept.clear();
    std::map<std::pair<VertexId, VertexId>, int> edge_count;
    std::vector<Triangle> bad;
    for (const Triangle& t : tris) {
      if (geom::incircle(work[t[0]], work[t[1]], work[t[2]], p) > 0)
        bad.push_back(t);
      else
        kept.push_back(t);
    }
    for (const Triangle& t : bad)
      for (int i = 0; i < 3; ++i) ++edge_count[detail::sorted_pair(t[i], t[(i + 1) % 3])];
    for (const Triangle& t : bad)
      for (int i = 0; i < 3; ++i) {
        const VertexId a = t[i], b = t[(i + 1) % 3];
        if (edge_count[detail::sorted_pair(a, b)] == 1) kept.push_back({a, b, v});
      }
    tris.swap(kept);
  }

  std::vector<Triangle> out;
  out.reserve(tris.size());
  for (const Triangle& t : tris)
    if (t[0] < s0 && t[1] < s0 && t[2] < s0) out.push_back(t);
  detail::normalize_cocircular(pts, out);
  for (Triangle& t : out) {
    // canonical rotation: smallest id first, ccw orientation kept
    const auto it = std::min_element(t.begin(), t.end());
    std::rotate(t.begin(), it, t.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Unique undirected edges of a triangulation, as (min, max) pairs ascending.
inline std::vector<std::pair<VertexId, VertexId>> triangulation_edges(
    std::span<const Triangle> tris) {
  std::vector<std::pair<VertexId, VertexId>> edges;
  edges.reserve(3 * tris.size());
  for (const Triangle& t : tris)
    for (int i = 0; i < 3; ++i) edges.push_back(detail::sorted_pair(t[i], t[(i + 1) % 3]));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

struct DelaunayGraph {
  Graph graph;
  PointSet vertices;                // one per graph vertex, after merging duplicates
  std::vector<VertexId> vertex_of;  // input row -> graph vertex
  std::vector<Triangle> triangles;  // over graph vertices
};

// Graph over the Delaunay triangulation of the covariates. Points closer than
// 1e-12 in both coordinates are merged: data averaged, weights summed. The
// edge parameter comes from `lambda(a, b)`.
inline DelaunayGraph build_delaunay_graph(const PointSet& pts, std::span<const double> data,
                                          const EdgeLambdaRule& lambda,
                                          std::span<const double> weights = {}) {
  if (data.size() != pts.size() || (!weights.empty() && weights.size() != pts.size()))
    throw Error(Errc::LengthMismatch, "one datum (and weight) per point");
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts[a].x != pts[b].x ? pts[a].x < pts[b].x : (pts[a].y != pts[b].y ? pts[a].y < pts[b].y : a < b);
  });

  DelaunayGraph out;
  out.vertex_of.assign(pts.size(), 0);
  std::vector<double> wsum, wy;
  std::vector<std::size_t> group_of(pts.size());
  // duplicates sort adjacently only when x ties exactly; scan a window for near-ties
  std::vector<std::size_t> rep;  // representative input index per vertex
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    const std::size_t i = order[idx];
    std::size_t found = static_cast<std::size_t>(-1);
    for (std::size_t back = out.vertices.size(); back-- > 0;) {
      const Point2& q = out.vertices[back];
      if (pts[i].x - q.x > 1e-12) break;
      if (std::abs(pts[i].y - q.y) <= 1e-12) {
        found = back;
        break;
      }
    }
    const double w = weights.empty() ? 1.0 : weights[i];
    if (found == static_cast<std::size_t>(-1)) {
      found = out.vertices.size();
      out.vertices.push_back(pts[i]);
      wsum.push_back(0.0);
      wy.push_back(0.0);
      rep.push_back(0);
    }
    wsum[found] += w;
    wy[found] += w * data[i];
    rep[found] += 1;
    group_of[i] = found;
  }
  std::vector<double> y(out.vertices.size());
  for (std::size_t v = 0; v < y.size(); ++v) {
    // plain average when all merged weights are zero
    y[v] = wsum[v] > 0.0 ? wy[v] / wsum[v] : 0.0;
  }
  if (!weights.empty())
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (wsum[group_of[i]] <= 0.0) y[group_of[i]] += data[i] / static_cast<double>(rep[group_of[i]]);
  for (std::size_t i = 0; i < pts.size(); ++i) out.vertex_of[i] = static_cast<VertexId>(group_of[i]);

  out.triangles = delaunay_triangulate(out.vertices);
  std::vector<Edge> edges;
  for (const auto& [a, b] : triangulation_edges(out.triangles)) edges.push_back({a, b, lambda(a, b)});
  out.graph = make_graph(out.vertices.size(), std::move(edges), std::move(wsum), std::move(y));
  return out;
}

inline DelaunayGraph build_delaunay_graph(const PointSet& pts, std::span<const double> data,
                                          double lambda) {
  return build_delaunay_graph(pts, data, [lambda](VertexId, VertexId) { return lambda; });
}

}  // namespace graphtv
