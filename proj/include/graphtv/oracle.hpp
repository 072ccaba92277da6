#pragma once

// Test-time authorities over the solver. Nothing here shares code with
// solver.hpp beyond the Graph type.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "graphtv/error.hpp"
#include "graphtv/graph.hpp"

namespace graphtv {

enum class CertificateForm { None, Relaxed, Strict };

inline const char* certificate_form_name(CertificateForm f) {
  switch (f) {
    case CertificateForm::Strict: return "strict";
    case CertificateForm::Relaxed: return "relaxed";
    case CertificateForm::None: return "none";
  }
  return "?";
}

// Per-condition maximum residuals of the sufficient optimality conditions.
//   stopping     c_e = sign(f_head - f_tail) or f_head = f_tail, every edge
//   unit_active  |c_e| = 1 on active edges (strict form only)
//   coefficient  |c_e| <= 1, every edge
//   constant     f equal across active edges
//   stationarity u_R f_R = m_R, every region
//   split_strict |u_S f_I - (m_S - c_e lambda_e)| <= lambda_e, every active e
//   split_relaxed the same bound with |c_e| lambda_e
struct CertificateReport {
  double stopping = 0.0;
  double unit_active = 0.0;
  double coefficient = 0.0;
  double constant = 0.0;
  double stationarity = 0.0;
  double split_strict = 0.0;
  double split_relaxed = 0.0;
  bool acyclic = true;
  double tol = 1e-8;
  CertificateForm form = CertificateForm::None;

  bool pass() const { return form != CertificateForm::None; }
};

namespace detail {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
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

}  // namespace detail

inline CertificateReport check_certificate(const Graph& g, std::span<const double> f,
                                           std::span<const double> c,
                                           std::span<const EdgeId> active, double tol = 1e-8) {
  const std::size_t n = g.num_vertices();
  if (f.size() != n || c.size() != g.num_edges())
    throw Error(Errc::DimensionMismatch, "f or c has the wrong length");
  for (EdgeId e : active)
    if (e >= g.num_edges()) throw Error(Errc::DimensionMismatch, "active edge out of range");

  CertificateReport rep;
  rep.tol = tol;

  std::vector<char> in_a(g.num_edges(), 0);
  detail::DisjointSets sets(n);
  for (EdgeId e : active) {
    if (in_a[e]) {
      rep.acyclic = false;
      continue;
    }
    in_a[e] = 1;
    if (!sets.unite(g.edge(e).tail, g.edge(e).head)) rep.acyclic = false;
  }

  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    const double d = f[ed.head] - f[ed.tail];
    const double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    rep.stopping = std::max(rep.stopping, std::min(std::abs(c[e] - s), std::abs(d)));
    rep.coefficient = std::max(rep.coefficient, std::abs(c[e]) - 1.0);
    if (in_a[e]) {
      rep.constant = std::max(rep.constant, std::abs(d));
      rep.unit_active = std::max(rep.unit_active, std::abs(1.0 - std::abs(c[e])));
    }
  }

  // Each vertex's own share of m: w y plus signed c*lambda of incident edges.
  std::vector<double> m_vertex(n);
  for (VertexId i = 0; i < n; ++i) m_vertex[i] = g.weight(i) * g.datum(i);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    m_vertex[ed.tail] += c[e] * ed.lambda;
    m_vertex[ed.head] -= c[e] * ed.lambda;
  }

  std::vector<double> uf(n, 0.0), m(n, 0.0);
  for (VertexId i = 0; i < n; ++i) {
    const std::size_t r = sets.find(i);
    uf[r] += g.weight(i) * f[i];
    m[r] += m_vertex[i];
  }
  for (VertexId i = 0; i < n; ++i)
    if (sets.find(i) == i) rep.stationarity = std::max(rep.stationarity, std::abs(uf[i] - m[i]));

  if (rep.acyclic) {
    std::vector<std::vector<EdgeId>> adj(n);
    for (EdgeId e : active) {
      adj[g.edge(e).tail].push_back(e);
      adj[g.edge(e).head].push_back(e);
    }
    std::vector<char> seen(n, 0);
    std::vector<VertexId> stack;
    for (EdgeId cut : active) {
      const Edge& ed = g.edge(cut);
      // Subregion on the tail side of the cut.
      std::fill(seen.begin(), seen.end(), 0);
      stack.assign(1, ed.tail);
      seen[ed.tail] = 1;
      double uf_s = 0.0, m_s = 0.0;
      while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        uf_s += g.weight(v) * f[v];
        m_s += m_vertex[v];
        for (EdgeId e : adj[v]) {
          if (e == cut) continue;
          const VertexId w = g.edge(e).tail == v ? g.edge(e).head : g.edge(e).tail;
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
        }
      }
      const double flow = std::abs(uf_s - (m_s - c[cut] * ed.lambda));
      rep.split_strict = std::max(rep.split_strict, flow - ed.lambda);
      rep.split_relaxed = std::max(rep.split_relaxed, flow - std::abs(c[cut]) * ed.lambda);
    }
  }

  const bool common = rep.acyclic && rep.stopping <= tol && rep.coefficient <= tol &&
                      rep.constant <= tol && rep.stationarity <= tol;
  if (common && rep.unit_active <= tol && rep.split_strict <= tol)
    rep.form = CertificateForm::Strict;
  else if (common && rep.split_relaxed <= tol)
    rep.form = CertificateForm::Relaxed;
  return rep;
}

struct OracleOptions {
  double tol = 1e-10;
  std::size_t max_sweeps = 2'000'000;
};

// Minimises Q by exact coordinate ascent on the dual: with a flow t_e in
// [-lambda_e, lambda_e] on every edge, f_i = y_i - (net inflow at i) / w_i,
// and each coordinate step is a one-dimensional quadratic clipped to its box.
// A final polish averages f (weighted) over groups joined by unsaturated
// flows. Requires every w_i > 0.
inline std::vector<double> brute_force_minimize(const Graph& g, OracleOptions opts = {}) {
  const std::size_t n = g.num_vertices();
  for (VertexId i = 0; i < n; ++i)
    if (!(g.weight(i) > 0.0))
      throw Error(Errc::NotConverged, "coordinate oracle needs positive weights");

  std::vector<double> t(g.num_edges(), 0.0);
  std::vector<double> f(g.data().begin(), g.data().end());
  double scale = 1.0;
  for (double y : g.data()) scale = std::max(scale, std::abs(y));
  const double stop = 1e-15 * scale;

  bool converged = g.num_edges() == 0;
  for (std::size_t sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    double biggest = 0.0;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const Edge& ed = g.edge(e);
      const double wa = g.weight(ed.tail), wb = g.weight(ed.head);
      const double step = (f[ed.head] - f[ed.tail]) / (1.0 / wa + 1.0 / wb);
      const double next = std::clamp(t[e] + step, -ed.lambda, ed.lambda);
      const double delta = next - t[e];
      if (delta == 0.0) continue;
      t[e] = next;
      f[ed.head] -= delta / wb;
      f[ed.tail] += delta / wa;
      biggest = std::max(biggest, std::abs(delta));
    }
    if (biggest <= stop) converged = true;
  }
  if (!converged) throw Error(Errc::NotConverged, "dual coordinate ascent did not settle");

  // Recompute f from the flows to shed accumulated drift.
  std::vector<double> inflow(n, 0.0);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    inflow[g.edge(e).head] += t[e];
    inflow[g.edge(e).tail] -= t[e];
  }
  for (VertexId i = 0; i < n; ++i) f[i] = g.datum(i) - inflow[i] / g.weight(i);

  detail::DisjointSets groups(n);
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (std::abs(t[e]) < g.edge(e).lambda * (1.0 - 1e-9))
      groups.unite(g.edge(e).tail, g.edge(e).head);
  std::vector<double> wf(n, 0.0), w(n, 0.0);
  for (VertexId i = 0; i < n; ++i) {
    wf[groups.find(i)] += g.weight(i) * f[i];
    w[groups.find(i)] += g.weight(i);
  }
  std::vector<double> polished(n);
  for (VertexId i = 0; i < n; ++i) polished[i] = wf[groups.find(i)] / w[groups.find(i)];

  auto q = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (VertexId i = 0; i < n; ++i) s += 0.5 * g.weight(i) * (x[i] - g.datum(i)) * (x[i] - g.datum(i));
    for (const Edge& ed : g.edges()) s += ed.lambda * std::abs(x[ed.head] - x[ed.tail]);
    return s;
  };
  return q(polished) <= q(f) ? polished : f;
}

}  // namespace graphtv
