#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "graphtv/graph.hpp"

namespace graphtv {

// Order in which edge constraints are driven to satisfaction. stage[i] is the
// stage of order[i]; natural schedules have a single stage 0.
struct EdgeSchedule {
  std::vector<EdgeId> order;
  std::vector<unsigned> stage;

  std::size_t size() const { return order.size(); }
};

inline EdgeSchedule natural_order(const Graph& g) {
  EdgeSchedule s;
  s.order.resize(g.num_edges());
  std::iota(s.order.begin(), s.order.end(), EdgeId{0});
  s.stage.assign(g.num_edges(), 0);
  return s;
}

/// True when order is a permutation of 0..num_edges-1.
inline bool is_permutation_of_edges(const EdgeSchedule& s, std::size_t num_edges) {
  if (s.order.size() != num_edges) return false;
  std::vector<char> seen(num_edges, 0);
  for (EdgeId e : s.order) {
    if (e >= num_edges || seen[e]) return false;
    seen[e] = 1;
  }
  return true;
}

inline unsigned dyadic_stage_count(GridShape shape) {
  const std::size_t longest = std::max(shape.rows, shape.cols);
  unsigned p = 0;
  while ((std::size_t{1} << p) < longest) ++p;
  return p;
}

// Dyadic stage order for grids built by build_grid4. At stage p the
// horizontal edges crossing column cuts 2^p q - 2^(p-1) (1-based, joining
// that column to the next) come first, then the vertical edges crossing the
// row cuts at the same positions. Cuts past the border are skipped, which
// adapts the scheme to any shape. Within a set edges go cut-major, then by
// the row (or column) index.
inline EdgeSchedule dyadic_grid_order(GridShape shape) {
  EdgeSchedule s;
  s.order.reserve(grid4_edge_count(shape));
  s.stage.reserve(grid4_edge_count(shape));
  const std::size_t horizontal = shape.rows * (shape.cols - 1);
  const unsigned stages = dyadic_stage_count(shape);
  for (unsigned p = 1; p <= stages; ++p) {
    const std::size_t step = std::size_t{1} << p;
    const std::size_t half = step >> 1;
    for (std::size_t cut = step - half; cut < shape.cols; cut += step)
      for (std::size_t r = 0; r < shape.rows; ++r) {
        // 1-based cut joins columns cut and cut+1, i.e. 0-based cut-1 and cut
        s.order.push_back(static_cast<EdgeId>(r * (shape.cols - 1) + (cut - 1)));
        s.stage.push_back(p);
      }
    for (std::size_t cut = step - half; cut < shape.rows; cut += step)
      for (std::size_t c = 0; c < shape.cols; ++c) {
        s.order.push_back(static_cast<EdgeId>(horizontal + (cut - 1) * shape.cols + c));
        s.stage.push_back(p);
      }
  }
  return s;
}

/// Largest region a dyadic solve can hold at stage p: 2^(2p), clipped to n.
inline std::size_t max_region_bound(GridShape shape, unsigned p) {
  if (p >= 32) return shape.size();
  const std::size_t side = std::size_t{1} << p;
  const std::size_t bound = side * side;
  return std::min(bound, shape.size());
}

}  // namespace graphtv
