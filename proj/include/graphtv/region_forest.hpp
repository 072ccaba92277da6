#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "graphtv/error.hpp"
#include "graphtv/graph.hpp"

namespace graphtv {

using RegionId = std::uint32_t;

struct RegionAggregates {
  double m = 0.0;
  double u = 0.0;
};

// The active set: an acyclic subset of the graph's edges. Its connected
// components are the regions of constant value. Each vertex carries a region
// label; labels are kept current by relabelling the smaller side on every
// merge and split, so region_id() is O(1).
class RegionForest {
 public:
  explicit RegionForest(const Graph& g)
      : graph_(&g),
        active_(g.num_edges(), 0),
        adjacency_(g.num_vertices()),
        label_(g.num_vertices()),
        stamp_(g.num_vertices(), 0) {
    const std::size_t n = g.num_vertices();
    size_.resize(n, 1);
    weight_.resize(n);
    positive_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
      label_[v] = static_cast<RegionId>(v);
      weight_[v] = g.weight(static_cast<VertexId>(v));
      positive_[v] = weight_[v] > 0.0 ? 1 : 0;
    }
    num_regions_ = n;
  }

  const Graph& graph() const { return *graph_; }
  bool is_active(EdgeId e) const { return active_[e] != 0; }
  std::size_t num_active() const { return num_active_; }
  std::size_t num_regions() const { return num_regions_; }

  RegionId region_id(VertexId v) const { return label_[v]; }
  bool same_region(VertexId a, VertexId b) const { return label_[a] == label_[b]; }
  std::size_t region_size(VertexId v) const { return size_[label_[v]]; }

  /// Cached u: total vertex weight of the region containing v. Exactly zero
  /// whenever no member has positive weight.
  double region_weight(VertexId v) const {
    const RegionId r = label_[v];
    return positive_[r] == 0 ? 0.0 : weight_[r];
  }

  std::span<const EdgeId> active_incident(VertexId v) const { return adjacency_[v]; }

  std::vector<EdgeId> active_edges() const {
    std::vector<EdgeId> out;
    out.reserve(num_active_);
    for (EdgeId e = 0; e < active_.size(); ++e)
      if (active_[e]) out.push_back(e);
    return out;
  }

  /// Vertices connected to k through active edges, k first, in BFS order.
  std::vector<VertexId> region_of(VertexId k) const { return collect(k, kNoEdge); }

  /// The two sides of the region obtained by deleting active edge (I,J):
  /// first contains the tail I, second contains the head J.
  std::pair<std::vector<VertexId>, std::vector<VertexId>> split_subregions(EdgeId e) const {
    if (!is_active(e)) throw Error(Errc::EdgeNotActive, "edge " + std::to_string(e));
    const Edge& ed = graph_->edge(e);
    return {collect(ed.tail, e), collect(ed.head, e)};
  }

  void add_active(EdgeId e) {
    if (is_active(e)) throw Error(Errc::WouldCreateCycle, "edge already active");
    const Edge& ed = graph_->edge(e);
    RegionId ra = label_[ed.tail], rb = label_[ed.head];
    if (ra == rb) throw Error(Errc::WouldCreateCycle, "endpoints already share a region");
    VertexId small_root = ed.head;
    if (size_[ra] < size_[rb]) {
      std::swap(ra, rb);
      small_root = ed.tail;
    }
    // rb is the smaller region; fold it into ra.
    for (VertexId v : collect(small_root, kNoEdge)) label_[v] = ra;
    size_[ra] += size_[rb];
    weight_[ra] += weight_[rb];
    positive_[ra] += positive_[rb];
    free_ids_.push_back(rb);
    adjacency_[ed.tail].push_back(e);
    adjacency_[ed.head].push_back(e);
    active_[e] = 1;
    ++num_active_;
    --num_regions_;
  }

  void remove_active(EdgeId e) {
    if (!is_active(e)) throw Error(Errc::EdgeNotActive, "edge " + std::to_string(e));
    const Edge& ed = graph_->edge(e);
    erase_adjacent(ed.tail, e);
    erase_adjacent(ed.head, e);
    active_[e] = 0;
    --num_active_;
    ++num_regions_;

    const RegionId old = label_[ed.tail];
    const auto small = smaller_side(ed.tail, ed.head);
    RegionId fresh;
    if (!free_ids_.empty()) {
      fresh = free_ids_.back();
      free_ids_.pop_back();
    } else {
      fresh = static_cast<RegionId>(size_.size());
      size_.push_back(0);
      weight_.push_back(0.0);
      positive_.push_back(0);
    }
    double w = 0.0;
    std::size_t pos = 0;
    for (VertexId v : small) {
      label_[v] = fresh;
      const double wv = graph_->weight(v);
      w += wv;
      pos += wv > 0.0 ? 1 : 0;
    }
    size_[fresh] = small.size();
    weight_[fresh] = w;
    positive_[fresh] = pos;
    size_[old] -= small.size();
    positive_[old] -= pos;
    weight_[old] = positive_[old] == 0 ? 0.0 : weight_[old] - w;
  }

 private:
  static constexpr EdgeId kNoEdge = static_cast<EdgeId>(-1);

  void erase_adjacent(VertexId v, EdgeId e) {
    auto& adj = adjacency_[v];
    auto it = std::find(adj.begin(), adj.end(), e);
    *it = adj.back();
    adj.pop_back();
  }

  std::uint32_t next_stamp() const {
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    return epoch_;
  }

  std::vector<VertexId> collect(VertexId start, EdgeId skip) const {
    const std::uint32_t mark = next_stamp();
    std::vector<VertexId> out{start};
    stamp_[start] = mark;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const VertexId v = out[i];
      for (EdgeId e : adjacency_[v]) {
        if (e == skip) continue;
        const VertexId w = graph_->other_end(e, v);
        if (stamp_[w] != mark) {
          stamp_[w] = mark;
          out.push_back(w);
        }
      }
    }
    return out;
  }

  // Breadth-first from both ends in lockstep; returns whichever side is
  // exhausted first, so the cost is proportional to the smaller side.
  std::vector<VertexId> smaller_side(VertexId a, VertexId b) const {
    const std::uint32_t mark = next_stamp();
    std::vector<VertexId> qa{a}, qb{b};
    stamp_[a] = mark;
    stamp_[b] = mark;
    std::size_t ia = 0, ib = 0;
    auto step = [&](std::vector<VertexId>& q, std::size_t& i) {
      const VertexId v = q[i++];
      for (EdgeId e : adjacency_[v]) {
        const VertexId w = graph_->other_end(e, v);
        if (stamp_[w] != mark) {
          stamp_[w] = mark;
          q.push_back(w);
        }
      }
    };
    while (true) {
      if (ia == qa.size()) return qa;
      if (ib == qb.size()) return qb;
      step(qa, ia);
      step(qb, ib);
    }
  }

  const Graph* graph_;
  std::vector<char> active_;
  std::vector<std::vector<EdgeId>> adjacency_;
  std::vector<RegionId> label_;
  std::vector<std::size_t> size_;
  std::vector<double> weight_;
  std::vector<std::size_t> positive_;
  std::vector<RegionId> free_ids_;
  std::size_t num_active_ = 0;
  std::size_t num_regions_ = 0;
  mutable std::vector<std::uint32_t> stamp_;
  mutable std::uint32_t epoch_ = 0;
};

/// m and u of a region or subregion given by its member list. The edge terms
/// run over every graph edge incident to a member, active or not.
inline RegionAggregates aggregates(const Graph& g, std::span<const double> c,
                                   std::span<const VertexId> members) {
  RegionAggregates a;
  for (VertexId i : members) {
    a.m += g.weight(i) * g.datum(i);
    a.u += g.weight(i);
    for (EdgeId e : g.incident(i)) {
      const Edge& ed = g.edge(e);
      a.m += ed.tail == i ? c[e] * ed.lambda : -c[e] * ed.lambda;
    }
  }
  return a;
}

}  // namespace graphtv
