#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphtv/error.hpp"
#include "graphtv/graph.hpp"
#include "graphtv/objective.hpp"
#include "graphtv/region_forest.hpp"
#include "graphtv/schedule.hpp"

namespace graphtv {

enum class EventKind { Merge = 0, Amalgamate = 1, Split = 2, NoChange = 3 };

inline std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::NoChange: return "nochange";
    case EventKind::Merge: return "merge";
    case EventKind::Amalgamate: return "amalgamate";
    case EventKind::Split: return "split";
  }
  return "?";
}

enum class Side { K, L };

inline constexpr EdgeId kNoEdge = static_cast<EdgeId>(-1);

// One candidate change of the active set while the iterating edge (k,l) is
// pulled towards its target coefficient. df_k and df_l are the uniform shifts
// of R(k) and R(l); dc is the change of c on (k,l). For amalgamation, `edge`
// is the boundary edge joining R(side) to the region of `neighbor`; for a
// split it is the active edge to remove and `new_c` its coefficient after
// removal.
struct Event {
  EventKind kind = EventKind::NoChange;
  double df_k = 0.0;
  double df_l = 0.0;
  double dc = 0.0;
  double step = 0.0;
  EdgeId edge = kNoEdge;
  Side side = Side::K;
  VertexId neighbor = 0;
  double new_c = 0.0;

  double size() const { return std::max(std::abs(df_k), std::abs(df_l)); }
};

/// Picks the event with the smallest shift. Candidates within `tol` of the
/// smallest are ordered Merge, Amalgamate, Split, NoChange, then by edge id.
inline Event select_event(std::span<const Event> candidates, double tol = 1e-12) {
  if (candidates.empty()) throw Error(Errc::NoFeasibleEvent, "no candidate event");
  double best = std::numeric_limits<double>::infinity();
  for (const Event& ev : candidates) best = std::min(best, ev.size());
  const Event* pick = nullptr;
  for (const Event& ev : candidates) {
    if (ev.size() > best + tol) continue;
    if (!pick || ev.kind < pick->kind || (ev.kind == pick->kind && ev.edge < pick->edge))
      pick = &ev;
  }
  return *pick;
}

struct SolveOptions {
  /// Absolute tolerance on shifts of f used for event ties and feasibility.
  double tolerance = 1e-12;
  /// Events allowed per edge iteration, as a multiple of 2|E|+1.
  std::size_t iteration_limit_factor = 10;
  /// Record one TraceRecord per applied event (costs O(n+m) per event).
  bool record_trace = false;
};

struct TraceRecord {
  std::size_t iteration = 0;
  EdgeId edge = 0;
  EventKind kind = EventKind::NoChange;
  double df_k = 0.0;
  double df_l = 0.0;
  double dc = 0.0;
  double working_objective = 0.0;
  double gap = 0.0;  // |f_l - f_k| after the event
};

struct IterationStats {
  EdgeId edge = 0;
  unsigned stage = 0;
  std::size_t events = 0;
  std::size_t max_region = 0;
};

/// Terminal (f, c, A) triple for the optimality checker.
struct Certificate {
  std::vector<double> f;
  std::vector<double> c;
  std::vector<EdgeId> active;
};

struct Solution {
  std::vector<double> f;
  Certificate certificate;
  std::vector<RegionId> regions;  // labels 0..R-1, numbered by first vertex
  std::vector<TraceRecord> trace;
  std::vector<IterationStats> iterations;
  std::size_t events = 0;
  std::size_t num_regions() const {
    return regions.empty() ? 0 : *std::max_element(regions.begin(), regions.end()) + 1;
  }
};

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Active-set solver for min_f Q(f). Starts from c = 0, f = y and drives each
// edge coefficient in turn to sign(f_head - f_tail), keeping f the minimiser
// of the working objective Q(f;c) through merge, amalgamation and split
// events. The Graph must outlive the solver.
class TvSolver {
 public:
  explicit TvSolver(const Graph& g, SolveOptions opts = {})
      : g_(&g),
        opts_(opts),
        forest_(g),
        f_(g.data().begin(), g.data().end()),
        c_(g.num_edges(), 0.0),
        satisfied_(g.num_edges(), 0),
        scan_index_(g.num_vertices(), kNotScanned) {}

  TvSolver(Graph&&, SolveOptions = {}) = delete;  // would dangle

  const Graph& graph() const { return *g_; }
  std::span<const double> fit() const { return f_; }
  std::span<const double> coefficients() const { return c_; }
  const RegionForest& forest() const { return forest_; }
  bool satisfied(EdgeId e) const { return satisfied_[e] != 0; }

  /// Edge breaks the stopping rule: f differs across it and c is not the sign.
  bool violates(EdgeId e) const {
    const Edge& ed = g_->edge(e);
    const double d = f_[ed.head] - f_[ed.tail];
    return d != 0.0 && c_[e] != sign_of(d);
  }

  double working_objective() const { return graphtv::working_objective(*g_, f_, c_); }

  /// Replaces the state; intended for tests that start mid-run. The caller
  /// is responsible for f minimising Q(.;c) under the given active set.
  void set_state(std::vector<double> f, std::vector<double> c, std::span<const EdgeId> active) {
    if (f.size() != g_->num_vertices() || c.size() != g_->num_edges())
      throw Error(Errc::DimensionMismatch, "state size does not match graph");
    f_ = std::move(f);
    c_ = std::move(c);
    forest_ = RegionForest(*g_);
    for (EdgeId e : active) forest_.add_active(e);
    for (EdgeId e = 0; e < c_.size(); ++e) satisfied_[e] = std::abs(c_[e]) == 1.0 ? 1 : 0;
  }

  // ---- event enumeration for an iteration on edge e (requires f_k != f_l) --

  std::optional<Event> event_no_change(EdgeId e) const {
    std::vector<Event> out;
    const Motion mv = prepare(e);
    push_no_change(mv, out);
    return out.empty() ? std::nullopt : std::optional<Event>(out.front());
  }

  Event event_merge(EdgeId e) const {
    std::vector<Event> out;
    push_merge(prepare(e), out);
    return out.front();
  }

  std::vector<Event> event_amalgamate(EdgeId e) const {
    std::vector<Event> out;
    const Motion mv = prepare(e);
    push_amalgamations(mv, Side::K, out);
    push_amalgamations(mv, Side::L, out);
    return out;
  }

  std::vector<Event> event_split(EdgeId e) const {
    std::vector<Event> out;
    const Motion mv = prepare(e);
    push_splits(mv, Side::K, out);
    push_splits(mv, Side::L, out);
    return out;
  }

  std::vector<Event> candidates(EdgeId e) const {
    std::vector<Event> out;
    const Motion mv = prepare(e);
    collect(mv, out);
    return out;
  }

  /// Applies an event of the iteration on e. Returns true when the iteration
  /// is complete (no-change or merge).
  bool apply_event(EdgeId e, const Event& ev) { return apply(prepare(e), ev); }

  /// Drives edge e to satisfaction. Returns the number of events applied.
  std::size_t iterate_edge(EdgeId e, unsigned stage = 0) {
    IterationStats stats{e, stage, 0, 0};
    const Edge& ed = g_->edge(e);
    if (f_[ed.tail] == f_[ed.head]) {
      // Equal values already satisfy the stopping rule. Joining distinct
      // regions through e locks that in at no cost: the edge's flow c*lambda
      // stays feasible once |c| = 1.
      if (!forest_.same_region(ed.tail, ed.head)) {
        forest_.add_active(e);
        c_[e] = c_[e] < 0.0 ? -1.0 : 1.0;
        satisfied_[e] = 1;
      }
      stats.max_region = forest_.region_size(ed.tail);
      iterations_.push_back(stats);
      return 0;
    }
    const std::size_t limit = opts_.iteration_limit_factor * (2 * g_->num_edges() + 1);
    const std::size_t iteration = iterations_.size();
    std::vector<Event> pool;
    while (true) {
      const Motion mv = prepare(e);
      stats.max_region = std::max({stats.max_region, mv.scan[0].order.size(), mv.scan[1].order.size()});
      pool.clear();
      collect(mv, pool);
      const Event ev = select_event(pool, opts_.tolerance);
      const bool done = apply(mv, ev);
      ++stats.events;
      ++events_;
      stats.max_region = std::max({stats.max_region, forest_.region_size(ed.tail),
                                   forest_.region_size(ed.head)});
      if (opts_.record_trace)
        trace_.push_back({iteration, e, ev.kind, ev.df_k, ev.df_l, ev.dc, working_objective(),
                          std::abs(f_[ed.head] - f_[ed.tail])});
      if (done) break;
      if (stats.events > limit)
        throw Error(Errc::IterationLimitExceeded, "edge " + std::to_string(e));
    }
    iterations_.push_back(stats);
    return stats.events;
  }

  /// Runs every edge of the schedule, then sweeps until no edge breaks the
  /// stopping rule. Edges left at c = 0 inside a region may separate again
  /// after later splits; the sweeps pick those up.
  void run(const EdgeSchedule& schedule) {
    if (!is_permutation_of_edges(schedule, g_->num_edges()))
      throw Error(Errc::IndexOutOfRange, "schedule is not a permutation of the edges");
    for (std::size_t i = 0; i < schedule.order.size(); ++i) {
      const EdgeId e = schedule.order[i];
      if (!satisfied(e)) iterate_edge(e, schedule.stage.empty() ? 0 : schedule.stage[i]);
    }
    const std::size_t max_sweeps = 2 * g_->num_edges() + 2;
    for (std::size_t sweep = 0;; ++sweep) {
      bool clean = true;
      for (EdgeId e : schedule.order)
        if (!satisfied(e) && violates(e)) {
          iterate_edge(e);
          clean = false;
        }
      if (clean) break;
      if (sweep > max_sweeps) throw Error(Errc::IterationLimitExceeded, "sweeps did not settle");
    }
  }

  std::vector<RegionId> region_labels() const {
    std::vector<RegionId> out(g_->num_vertices());
    std::vector<RegionId> remap(g_->num_vertices() + g_->num_edges() + 1,
                                std::numeric_limits<RegionId>::max());
    RegionId next = 0;
    for (VertexId v = 0; v < out.size(); ++v) {
      RegionId r = forest_.region_id(v);
      if (r >= remap.size()) remap.resize(r + 1, std::numeric_limits<RegionId>::max());
      if (remap[r] == std::numeric_limits<RegionId>::max()) remap[r] = next++;
      out[v] = remap[r];
    }
    return out;
  }

  Solution solution() const {
    Solution s;
    s.f = f_;
    s.certificate = {f_, c_, forest_.active_edges()};
    s.regions = region_labels();
    s.trace = trace_;
    s.iterations = iterations_;
    s.events = events_;
    return s;
  }

 private:
  static constexpr std::size_t kNotScanned = static_cast<std::size_t>(-1);

  // Region rooted at the pivot vertex (k or l): BFS order, parent edges and
  // subtree sums of weight and of the m-terms, where an active edge
  // contributes nothing and every other incident edge contributes its signed
  // flow c*lambda.
  struct RegionScan {
    std::vector<VertexId> order;
    std::vector<EdgeId> parent;
    std::vector<double> sub_u;
    std::vector<double> sub_m;
    std::vector<std::size_t> sub_pos;
    double value = 0.0;

    double u() const { return sub_pos[0] == 0 ? 0.0 : sub_u[0]; }
    double m() const { return sub_m[0]; }
  };

  // Straight-line path of the iteration: R(k) moves by a_k*h, R(l) by a_l*h
  // and the flow c*lambda on (k,l) by b*h.
  struct Motion {
    EdgeId edge = 0;
    VertexId k = 0, l = 0;
    double s = 0.0;  // sign(f_l - f_k), the target of c_kl
    double a_k = 0.0, a_l = 0.0, b = 0.0;
    double u_k = 0.0, u_l = 0.0;
    RegionScan scan[2];
  };

  RegionScan scan_region(VertexId root) const {
    RegionScan rs;
    rs.order.push_back(root);
    rs.parent.push_back(kNoEdge);
    std::vector<std::size_t>& index = scan_index_;
    index[root] = 0;
    for (std::size_t i = 0; i < rs.order.size(); ++i) {
      const VertexId v = rs.order[i];
      for (EdgeId e : forest_.active_incident(v)) {
        if (e == rs.parent[i]) continue;
        const VertexId w = g_->other_end(e, v);
        index[w] = rs.order.size();
        rs.order.push_back(w);
        rs.parent.push_back(e);
      }
    }
    const std::size_t n = rs.order.size();
    rs.sub_u.resize(n);
    rs.sub_m.resize(n);
    rs.sub_pos.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const VertexId v = rs.order[i];
      const double w = g_->weight(v);
      double m = w * g_->datum(v);
      for (EdgeId e : g_->incident(v)) {
        if (forest_.is_active(e)) continue;
        const Edge& ed = g_->edge(e);
        m += ed.tail == v ? c_[e] * ed.lambda : -c_[e] * ed.lambda;
      }
      rs.sub_u[i] = w;
      rs.sub_m[i] = m;
      rs.sub_pos[i] = w > 0.0 ? 1 : 0;
    }
    for (std::size_t i = n; i-- > 1;) {
      const std::size_t p = index[g_->other_end(rs.parent[i], rs.order[i])];
      rs.sub_u[p] += rs.sub_u[i];
      rs.sub_m[p] += rs.sub_m[i];
      rs.sub_pos[p] += rs.sub_pos[i];
    }
    for (VertexId v : rs.order) index[v] = kNotScanned;
    rs.value = f_[root];
    return rs;
  }

  Motion prepare(EdgeId e) const {
    Motion mv;
    const Edge& ed = g_->edge(e);
    mv.edge = e;
    mv.k = ed.tail;
    mv.l = ed.head;
    mv.s = sign_of(f_[mv.l] - f_[mv.k]);
    if (mv.s == 0.0) throw Error(Errc::NoFeasibleEvent, "iterating edge has equal end values");
    mv.scan[0] = scan_region(mv.k);
    mv.scan[1] = scan_region(mv.l);
    mv.u_k = mv.scan[0].u();
    mv.u_l = mv.scan[1].u();
    if (mv.u_k > 0.0 && mv.u_l > 0.0) {
      // u_k df_k = dc*lambda = -u_l df_l; h measures the flow change.
      mv.b = mv.s;
      mv.a_k = mv.s / mv.u_k;
      mv.a_l = -mv.s / mv.u_l;
    } else if (mv.u_k > 0.0) {
      mv.a_l = -mv.s;  // R(l) carries no weight and slides freely
    } else if (mv.u_l > 0.0) {
      mv.a_k = mv.s;
    } else {
      mv.a_k = mv.s;
      mv.a_l = -mv.s;
    }
    return mv;
  }

  Event at_step(const Motion& mv, EventKind kind, double h) const {
    Event ev;
    ev.kind = kind;
    ev.step = h;
    ev.df_k = mv.a_k * h;
    ev.df_l = mv.a_l * h;
    ev.dc = mv.b * h / g_->edge(mv.edge).lambda;
    ev.edge = mv.edge;
    return ev;
  }

  void push_no_change(const Motion& mv, std::vector<Event>& out) const {
    if (!(mv.u_k > 0.0 && mv.u_l > 0.0)) return;
    const double c0 = c_[mv.edge];
    const double h = (1.0 - mv.s * c0) * g_->edge(mv.edge).lambda;
    Event ev = at_step(mv, EventKind::NoChange, std::max(h, 0.0));
    ev.dc = mv.s - c0;
    out.push_back(ev);
  }

  void push_merge(const Motion& mv, std::vector<Event>& out) const {
    const double gap = std::abs(f_[mv.l] - f_[mv.k]);
    out.push_back(at_step(mv, EventKind::Merge, gap / (std::abs(mv.a_k) + std::abs(mv.a_l))));
  }

  // Boundary edges of the moving region whose far end would be overtaken in
  // breach of sign(c) = sign(f_head - f_tail).
  void push_amalgamations(const Motion& mv, Side side, std::vector<Event>& out) const {
    const double a = side == Side::K ? mv.a_k : mv.a_l;
    if (a == 0.0) return;
    const RegionScan& rs = mv.scan[side == Side::K ? 0 : 1];
    const double value = rs.value;
    const double slack = opts_.tolerance * (1.0 + std::abs(value));
    const double dir = sign_of(a);
    for (VertexId i : rs.order) {
      for (EdgeId e : g_->incident(i)) {
        if (e == mv.edge || forest_.is_active(e) || c_[e] == 0.0) continue;
        const VertexId K = g_->other_end(e, i);
        if (forest_.same_region(K, mv.k) || forest_.same_region(K, mv.l)) continue;
        const bool tail = g_->edge(e).tail == i;
        const bool breach = tail ? sign_of(c_[e]) == dir : sign_of(c_[e]) == -dir;
        if (!breach) continue;
        const double d = f_[K] - value;
        if (d * dir < -slack) continue;
        const double h = std::max(d / a, 0.0);
        Event ev = at_step(mv, EventKind::Amalgamate, h);
        if (side == Side::K)
          ev.df_k = d;
        else
          ev.df_l = d;
        ev.edge = e;
        ev.side = side;
        ev.neighbor = K;
        out.push_back(ev);
      }
    }
  }

  // Active edges of R(k) or R(l) whose flow reaches the bound |c|*lambda.
  // The flow across an edge follows from the subtree hanging below it; the
  // pivot is the scan root, so the subtree never sees the iterating edge.
  void push_splits(const Motion& mv, Side side, std::vector<Event>& out) const {
    const double a = side == Side::K ? mv.a_k : mv.a_l;
    if (a == 0.0) return;
    const RegionScan& rs = mv.scan[side == Side::K ? 0 : 1];
    for (std::size_t i = 1; i < rs.order.size(); ++i) {
      const EdgeId e = rs.parent[i];
      const Edge& ed = g_->edge(e);
      const double orient = ed.tail == rs.order[i] ? 1.0 : -1.0;
      const double u_sub = rs.sub_pos[i] == 0 ? 0.0 : rs.sub_u[i];
      const double rate = orient * u_sub * a;
      if (rate == 0.0) continue;
      const double flow = orient * (u_sub * rs.value - rs.sub_m[i]);
      const double bound = std::abs(c_[e]) * ed.lambda;
      const double h = std::max((sign_of(rate) * bound - flow) / rate, 0.0);
      Event ev = at_step(mv, EventKind::Split, h);
      ev.edge = e;
      ev.side = side;
      ev.new_c = sign_of(rate) * std::abs(c_[e]);
      out.push_back(ev);
    }
  }

  void collect(const Motion& mv, std::vector<Event>& out) const {
    push_no_change(mv, out);
    push_merge(mv, out);
    push_amalgamations(mv, Side::K, out);
    push_amalgamations(mv, Side::L, out);
    push_splits(mv, Side::K, out);
    push_splits(mv, Side::L, out);
  }

  void assign(const RegionScan& rs, double value) {
    for (VertexId v : rs.order) f_[v] = value;
  }

  bool apply(const Motion& mv, Event ev) {
    const double f_k = f_[mv.k], f_l = f_[mv.l];
    double v_k = f_k + ev.df_k;
    double v_l = f_l + ev.df_l;
    if (ev.kind == EventKind::Amalgamate) {
      (ev.side == Side::K ? v_k : v_l) = f_[ev.neighbor];
    }
    // Anything other than a merge must leave the regions strictly apart.
    if (ev.kind != EventKind::Merge && mv.s * (v_l - v_k) <= 0.0) ev.kind = EventKind::Merge;

    const double c0 = c_[mv.edge];
    double c_new = std::clamp(c0 + ev.dc, -1.0, 1.0);
    if (c_new * mv.s < 0.0) c_new = 0.0;

    switch (ev.kind) {
      case EventKind::Merge: {
        double v;
        if (mv.u_k > 0.0 && mv.u_l > 0.0)
          v = (mv.u_k * f_k + mv.u_l * f_l) / (mv.u_k + mv.u_l);
        else if (mv.u_l > 0.0)
          v = f_l;
        else if (mv.u_k > 0.0)
          v = f_k;
        else
          v = 0.5 * (f_k + f_l);
        assign(mv.scan[0], v);
        assign(mv.scan[1], v);
        forest_.add_active(mv.edge);
        c_[mv.edge] = mv.s;
        satisfied_[mv.edge] = 1;
        return true;
      }
      case EventKind::NoChange:
        assign(mv.scan[0], v_k);
        assign(mv.scan[1], v_l);
        c_[mv.edge] = mv.s;
        satisfied_[mv.edge] = 1;
        return true;
      case EventKind::Amalgamate:
        assign(mv.scan[0], v_k);
        assign(mv.scan[1], v_l);
        c_[mv.edge] = c_new;
        forest_.add_active(ev.edge);
        return false;
      case EventKind::Split:
        assign(mv.scan[0], v_k);
        assign(mv.scan[1], v_l);
        c_[mv.edge] = c_new;
        forest_.remove_active(ev.edge);
        c_[ev.edge] = ev.new_c;
        return false;
    }
    return false;
  }

  const Graph* g_;
  SolveOptions opts_;
  RegionForest forest_;
  std::vector<double> f_;
  std::vector<double> c_;
  std::vector<char> satisfied_;
  mutable std::vector<std::size_t> scan_index_;
  std::vector<TraceRecord> trace_;
  std::vector<IterationStats> iterations_;
  std::size_t events_ = 0;
};

/// Exact minimiser of Q(f) over the graph, edges driven in schedule order.
inline Solution solve(const Graph& g, const EdgeSchedule& schedule, SolveOptions opts = {}) {
  TvSolver solver(g, opts);
  solver.run(schedule);
  return solver.solution();
}

inline Solution solve(const Graph& g, SolveOptions opts = {}) {
  return solve(g, natural_order(g), opts);
}

/// Resets every region to the plain mean of the data of its positive-weight
/// members. Regions without such members raise EmptyRegionMean unless
/// keep_unobserved is set, in which case their value is left as is.
inline std::vector<double> mean_correction(const Graph& g, std::span<const double> f,
                                           std::span<const RegionId> regions,
                                           bool keep_unobserved = false) {
  if (f.size() != g.num_vertices() || regions.size() != g.num_vertices())
    throw Error(Errc::DimensionMismatch, "fit and labels must cover every vertex");
  RegionId count = 0;
  for (RegionId r : regions) count = std::max(count, r + 1);
  std::vector<double> sum(count, 0.0);
  std::vector<std::size_t> members(count, 0);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (g.weight(v) <= 0.0) continue;
    sum[regions[v]] += g.datum(v);
    ++members[regions[v]];
  }
  std::vector<double> out(f.begin(), f.end());
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const RegionId r = regions[v];
    if (members[r] == 0) {
      if (!keep_unobserved)
        throw Error(Errc::EmptyRegionMean, "region of vertex " + std::to_string(v));
      continue;
    }
    out[v] = sum[r] / static_cast<double>(members[r]);
  }
  return out;
}

inline std::vector<double> mean_correction(const Graph& g, std::span<const double> f,
                                           const RegionForest& forest,
                                           bool keep_unobserved = false) {
  std::vector<RegionId> labels(g.num_vertices());
  for (VertexId v = 0; v < g.num_vertices(); ++v) labels[v] = forest.region_id(v);
  return mean_correction(g, f, labels, keep_unobserved);
}

}  // namespace graphtv
