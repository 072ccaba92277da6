#pragma once

// Random instance families shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "graphtv/graphtv.hpp"

namespace support {

using graphtv::Edge;
using graphtv::Graph;
using graphtv::Rng;
using graphtv::VertexId;

inline std::size_t below(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng.uniform() * n); }

struct Ranges {
  double w_lo = 0.5, w_hi = 2.0;
  double lambda_lo = 0.05, lambda_hi = 1.0;
  double y_sd = 1.0;
  double zero_weight_rate = 0.0;
};

inline std::vector<Edge> random_tree(Rng& rng, std::size_t n, const Ranges& r) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) {
    const double lam = r.lambda_lo + (r.lambda_hi - r.lambda_lo) * rng.uniform();
    edges.push_back({static_cast<VertexId>(below(rng, i)), static_cast<VertexId>(i), lam});
  }
  return edges;
}

// Adds up to `extra` chords between random distinct vertex pairs not yet joined.
inline void add_chords(Rng& rng, std::size_t n, std::size_t extra, const Ranges& r,
                       std::vector<Edge>& edges) {
  std::set<std::pair<VertexId, VertexId>> have;
  for (const Edge& e : edges) have.insert(std::minmax(e.tail, e.head));
  for (std::size_t k = 0; k < extra; ++k) {
    const auto a = static_cast<VertexId>(below(rng, n));
    const auto b = static_cast<VertexId>(below(rng, n));
    if (a == b || !have.insert(std::minmax(a, b)).second) continue;
    edges.push_back({a, b, r.lambda_lo + (r.lambda_hi - r.lambda_lo) * rng.uniform()});
  }
}

inline Graph finish(Rng& rng, std::size_t n, std::vector<Edge> edges, const Ranges& r) {
  std::vector<double> w(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = r.w_lo + (r.w_hi - r.w_lo) * rng.uniform();
    if (r.zero_weight_rate > 0.0 && rng.uniform() < r.zero_weight_rate) w[i] = 0.0;
    y[i] = r.y_sd * rng.normal();
  }
  return graphtv::make_graph(n, std::move(edges), std::move(w), std::move(y));
}

inline Graph tree(Rng& rng, std::size_t n, const Ranges& r = {}) {
  return finish(rng, n, random_tree(rng, n, r), r);
}

/// Ring through all vertices plus a few chords.
inline Graph cycle_with_chords(Rng& rng, std::size_t n, std::size_t chords, const Ranges& r = {}) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>((i + 1) % n),
                     r.lambda_lo + (r.lambda_hi - r.lambda_lo) * rng.uniform()});
  add_chords(rng, n, chords, r, edges);
  return finish(rng, n, std::move(edges), r);
}

inline Graph grid(Rng& rng, graphtv::GridShape shape, const Ranges& r = {}) {
  auto edges = graphtv::grid4_edges(shape, [&](VertexId, VertexId) {
    return r.lambda_lo + (r.lambda_hi - r.lambda_lo) * rng.uniform();
  });
  return finish(rng, shape.size(), std::move(edges), r);
}

/// Connected random graph: spanning tree plus about n chords.
inline Graph sparse(Rng& rng, std::size_t n, const Ranges& r = {}) {
  auto edges = random_tree(rng, n, r);
  add_chords(rng, n, n, r, edges);
  return finish(rng, n, std::move(edges), r);
}

/// The small families used for oracle comparisons, n <= 12.
inline Graph small_instance(Rng& rng, std::size_t index, const Ranges& r = {}) {
  switch (index % 4) {
    case 0: return tree(rng, 2 + below(rng, 11), r);
    case 1: return cycle_with_chords(rng, 3 + below(rng, 10), 3, r);
    case 2: return grid(rng, {3, 3}, r);
    default: return grid(rng, {3, 4}, r);
  }
}

inline bool all_weights_positive(const Graph& g) {
  return std::all_of(g.weights().begin(), g.weights().end(), [](double w) { return w > 0.0; });
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// Largest drop of the traced working objective between consecutive events.
inline double worst_decrease(const std::vector<graphtv::TraceRecord>& trace) {
  double worst = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i)
    worst = std::max(worst, trace[i - 1].working_objective - trace[i].working_objective);
  return worst;
}

// Brute-force empty-circumcircle test in plain double arithmetic, written
// independently of the triangulator's predicates. Returns the largest
// normalised encroachment (positive means a point lies inside a circle).
inline double worst_encroachment(const graphtv::PointSet& pts,
                                 const std::vector<graphtv::Triangle>& tris) {
  double worst = -1.0;
  for (const auto& t : tris) {
    const auto& a = pts[t[0]];
    const auto& b = pts[t[1]];
    const auto& c = pts[t[2]];
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    const double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
    const double ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    const double uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    const double r = std::hypot(a.x - ux, a.y - uy);
    for (VertexId i = 0; i < pts.size(); ++i) {
      if (i == t[0] || i == t[1] || i == t[2]) continue;
      worst = std::max(worst, (r - std::hypot(pts[i].x - ux, pts[i].y - uy)) / std::max(r, 1e-300));
    }
  }
  return worst;
}

}  // namespace support
