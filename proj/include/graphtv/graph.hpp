#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "graphtv/error.hpp"

namespace graphtv {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
  VertexId tail = 0;
  VertexId head = 0;
  double lambda = 0.0;
};

// Problem instance: vertex weights w and data y, and an ordered list of edges
// each carrying its own smoothing parameter. Immutable once built; construct
// through make_graph() or one of the builders below.
class Graph {
 public:
  Graph() = default;

  std::size_t num_vertices() const { return weights_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const Edge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> data() const { return data_; }
  double weight(VertexId v) const { return weights_[v]; }
  double datum(VertexId v) const { return data_[v]; }

  /// Edge ids incident to v, in edge order.
  std::span<const EdgeId> incident(VertexId v) const {
    return {incidence_.data() + offsets_[v], incidence_.data() + offsets_[v + 1]};
  }

  VertexId other_end(EdgeId e, VertexId v) const {
    const Edge& ed = edges_[e];
    return ed.tail == v ? ed.head : ed.tail;
  }

  friend Graph make_graph(std::size_t n, std::vector<Edge> edges, std::vector<double> weights,
                          std::vector<double> data);

 private:
  std::vector<Edge> edges_;
  std::vector<double> weights_;
  std::vector<double> data_;
  std::vector<std::size_t> offsets_;
  std::vector<EdgeId> incidence_;
};

/// Validates and builds a graph. Throws graphtv::Error on any violated
/// invariant (lambda <= 0, w < 0, self loops, repeated vertex pairs,
/// out-of-range endpoints, inconsistent lengths).
inline Graph make_graph(std::size_t n, std::vector<Edge> edges, std::vector<double> weights,
                        std::vector<double> data) {
  if (weights.size() != n || data.size() != n)
    throw Error(Errc::LengthMismatch, "weights and data must have one entry per vertex");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0))
      throw Error(Errc::NegativeWeight, "vertex " + std::to_string(i));
    if (!std::isfinite(weights[i]) || !std::isfinite(data[i]))
      throw Error(Errc::NonFiniteData, "vertex " + std::to_string(i));
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size() * 2);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& ed = edges[e];
    if (ed.tail >= n || ed.head >= n)
      throw Error(Errc::IndexOutOfRange, "edge " + std::to_string(e));
    if (ed.tail == ed.head) throw Error(Errc::SelfLoop, "edge " + std::to_string(e));
    if (!(ed.lambda > 0.0) || !std::isfinite(ed.lambda))
      throw Error(Errc::NonPositiveLambda, "edge " + std::to_string(e));
    const std::uint64_t lo = std::min(ed.tail, ed.head);
    const std::uint64_t hi = std::max(ed.tail, ed.head);
    if (!seen.insert((lo << 32) | hi).second)
      throw Error(Errc::ParallelEdge,
                  "vertices " + std::to_string(lo) + " and " + std::to_string(hi));
  }

  Graph g;
  g.edges_ = std::move(edges);
  g.weights_ = std::move(weights);
  g.data_ = std::move(data);
  g.offsets_.assign(n + 1, 0);
  for (const Edge& ed : g.edges_) {
    ++g.offsets_[ed.tail + 1];
    ++g.offsets_[ed.head + 1];
  }
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.incidence_.resize(2 * g.edges_.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (EdgeId e = 0; e < g.edges_.size(); ++e) {
    g.incidence_[cursor[g.edges_[e].tail]++] = e;
    g.incidence_[cursor[g.edges_[e].head]++] = e;
  }
  return g;
}

/// Same topology and weights, every edge set to the global parameter lambda.
inline Graph with_lambda(const Graph& g, double lambda) {
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (Edge& e : edges) e.lambda = lambda;
  return make_graph(g.num_vertices(), std::move(edges),
                    {g.weights().begin(), g.weights().end()}, {g.data().begin(), g.data().end()});
}

/// Same topology and weights, per-edge parameters replaced.
inline Graph with_lambdas(const Graph& g, std::span<const double> lambdas) {
  if (lambdas.size() != g.num_edges())
    throw Error(Errc::LengthMismatch, "need one lambda per edge");
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (std::size_t e = 0; e < edges.size(); ++e) edges[e].lambda = lambdas[e];
  return make_graph(g.num_vertices(), std::move(edges),
                    {g.weights().begin(), g.weights().end()}, {g.data().begin(), g.data().end()});
}

inline Graph with_data(const Graph& g, std::vector<double> data) {
  return make_graph(g.num_vertices(), {g.edges().begin(), g.edges().end()},
                    {g.weights().begin(), g.weights().end()}, std::move(data));
}

/// Chain graph over ordered observations: edges (i, i+1). Default weights are 1.
inline Graph build_chain(std::span<const double> y, std::span<const double> lambdas,
                         std::span<const double> weights = {}) {
  const std::size_t n = y.size();
  if (n == 0 || lambdas.size() + 1 != n)
    throw Error(Errc::LengthMismatch, "a chain of n vertices needs n-1 lambdas");
  if (!weights.empty() && weights.size() != n)
    throw Error(Errc::LengthMismatch, "weights length differs from data length");
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>(i + 1), lambdas[i]});
  std::vector<double> w = weights.empty() ? std::vector<double>(n, 1.0)
                                          : std::vector<double>(weights.begin(), weights.end());
  return make_graph(n, std::move(edges), std::move(w), {y.begin(), y.end()});
}

inline Graph build_chain(std::span<const double> y, double lambda) {
  std::vector<double> lambdas(y.empty() ? 0 : y.size() - 1, lambda);
  return build_chain(y, lambdas);
}

struct GridShape {
  std::size_t rows = 1;
  std::size_t cols = 1;

  std::size_t size() const { return rows * cols; }
  VertexId vertex(std::size_t r, std::size_t c) const {
    return static_cast<VertexId>(r * cols + c);
  }
};

/// Edge count of the 4-neighbourhood grid: 2*n1*n2 - n1 - n2.
inline std::size_t grid4_edge_count(GridShape shape) {
  return 2 * shape.rows * shape.cols - shape.rows - shape.cols;
}

using EdgeLambdaRule = std::function<double(VertexId, VertexId)>;

// Edges of the 4-neighbourhood: all horizontal pairs in row-major order,
// followed by all vertical pairs in row-major order.
inline std::vector<Edge> grid4_edges(GridShape shape, const EdgeLambdaRule& lambda) {
  std::vector<Edge> edges;
  edges.reserve(grid4_edge_count(shape));
  for (std::size_t r = 0; r < shape.rows; ++r)
    for (std::size_t c = 0; c + 1 < shape.cols; ++c) {
      VertexId a = shape.vertex(r, c), b = shape.vertex(r, c + 1);
      edges.push_back({a, b, lambda(a, b)});
    }
  for (std::size_t r = 0; r + 1 < shape.rows; ++r)
    for (std::size_t c = 0; c < shape.cols; ++c) {
      VertexId a = shape.vertex(r, c), b = shape.vertex(r + 1, c);
      edges.push_back({a, b, lambda(a, b)});
    }
  return edges;
}

inline Graph build_grid4(GridShape shape, std::span<const double> pixels,
                         const EdgeLambdaRule& lambda) {
  if (shape.rows == 0 || shape.cols == 0 || pixels.size() != shape.size())
    throw Error(Errc::ShapeMismatch, "pixel count does not match grid shape");
  return make_graph(shape.size(), grid4_edges(shape, lambda), std::vector<double>(shape.size(), 1.0),
                    {pixels.begin(), pixels.end()});
}

inline Graph build_grid4(GridShape shape, std::span<const double> pixels, double lambda) {
  return build_grid4(shape, pixels, [lambda](VertexId, VertexId) { return lambda; });
}

/// Appends a zero-weight dummy vertex with datum 0, joined to every existing
/// vertex by an edge with parameter lambda_b. The dummy is vertex n.
inline Graph augment_baseline(const Graph& g, double lambda_b) {
  if (!(lambda_b > 0.0)) throw Error(Errc::NonPositiveLambda, "baseline lambda must be positive");
  const std::size_t n = g.num_vertices();
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  for (std::size_t i = 0; i < n; ++i)
    edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>(n), lambda_b});
  std::vector<double> w(g.weights().begin(), g.weights().end());
  std::vector<double> y(g.data().begin(), g.data().end());
  w.push_back(0.0);
  y.push_back(0.0);
  return make_graph(n + 1, std::move(edges), std::move(w), std::move(y));
}

}  // namespace graphtv
