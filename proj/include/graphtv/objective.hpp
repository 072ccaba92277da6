#pragma once

#include <cmath>
#include <span>

#include "graphtv/graph.hpp"

namespace graphtv {

/// Q(f) = 1/2 sum_i w_i (f_i - y_i)^2 + sum_e lambda_e |f_head - f_tail|.
inline double objective(const Graph& g, std::span<const double> f) {
  double data = 0.0;
  for (std::size_t i = 0; i < g.num_vertices(); ++i) {
    const double r = f[i] - g.datum(static_cast<VertexId>(i));
    data += g.weight(static_cast<VertexId>(i)) * r * r;
  }
  double rough = 0.0;
  for (const Edge& e : g.edges()) rough += e.lambda * std::abs(f[e.head] - f[e.tail]);
  return 0.5 * data + rough;
}

/// Working objective: each edge penalty scaled by |c_e|.
inline double working_objective(const Graph& g, std::span<const double> f,
                                std::span<const double> c) {
  double data = 0.0;
  for (std::size_t i = 0; i < g.num_vertices(); ++i) {
    const double r = f[i] - g.datum(static_cast<VertexId>(i));
    data += g.weight(static_cast<VertexId>(i)) * r * r;
  }
  double rough = 0.0;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(static_cast<EdgeId>(e));
    rough += std::abs(c[e]) * ed.lambda * std::abs(f[ed.head] - f[ed.tail]);
  }
  return 0.5 * data + rough;
}

/// Unweighted residual sum of squares over vertices with positive weight.
inline double residual_sum_squares(const Graph& g, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.num_vertices(); ++i) {
    if (g.weight(static_cast<VertexId>(i)) <= 0.0) continue;
    const double r = f[i] - g.datum(static_cast<VertexId>(i));
    s += r * r;
  }
  return s;
}

}  // namespace graphtv
