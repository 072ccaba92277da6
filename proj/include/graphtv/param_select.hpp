#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "graphtv/error.hpp"
#include "graphtv/graph.hpp"
#include "graphtv/objective.hpp"
#include "graphtv/schedule.hpp"
#include "graphtv/solver.hpp"

namespace graphtv {

struct NoiseEstimate {
  double sigma = 0.0;
};

/// sigma = 1.48/sqrt(2) * median |y_head - y_tail| over all edges.
inline NoiseEstimate estimate_sigma(const Graph& g) {
  if (g.num_edges() == 0) throw Error(Errc::NoEdges, "noise estimate needs at least one edge");
  std::vector<double> d;
  d.reserve(g.num_edges());
  for (const Edge& e : g.edges()) d.push_back(std::abs(g.datum(e.head) - g.datum(e.tail)));
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  const double median = m % 2 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
  return {1.48 / std::sqrt(2.0) * median};
}

struct DiscrepancyOptions {
  double rel_tol = 1e-3;
  std::size_t max_solves = 60;
  SolveOptions solve;
};

struct DiscrepancyResult {
  double lambda = 0.0;
  double residual = 0.0;
  double target = 0.0;
  std::size_t solves = 0;
  Solution solution;
};

/// Residual of the fit at lambda = infinity: every connected component
/// collapses to its weighted mean.
inline double constant_fit_residual(const Graph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : g.edges()) parent[find(e.tail)] = find(e.head);
  std::vector<double> wy(n, 0.0), w(n, 0.0);
  for (VertexId i = 0; i < n; ++i) {
    wy[find(i)] += g.weight(i) * g.datum(i);
    w[find(i)] += g.weight(i);
  }
  double r = 0.0;
  for (VertexId i = 0; i < n; ++i) {
    if (g.weight(i) <= 0.0) continue;
    const double d = g.datum(i) - wy[find(i)] / w[find(i)];
    r += d * d;
  }
  return r;
}

// Global lambda such that sum (f_i - y_i)^2 = sigma^2 n, n counting the
// observed (positive weight) vertices. The residual grows with lambda, so the
// search doubles or halves from lambda = sigma until the target is bracketed
// and then bisects.
inline DiscrepancyResult solve_discrepancy(const Graph& g, double sigma,
                                           const EdgeSchedule& schedule,
                                           DiscrepancyOptions opts = {}) {
  if (!(sigma > 0.0)) throw Error(Errc::NonPositiveSigma, "sigma must be positive");
  std::size_t observed = 0;
  for (double w : g.weights()) observed += w > 0.0 ? 1 : 0;
  DiscrepancyResult out;
  out.target = sigma * sigma * static_cast<double>(observed);
  const double ceiling = constant_fit_residual(g);
  if (out.target > ceiling)
    throw Error(Errc::TargetUnreachable, "sigma^2 n exceeds the residual of the constant fit");

  auto attempt = [&](double lambda) {
    if (out.solves >= opts.max_solves)
      throw Error(Errc::NotConverged, "discrepancy search exhausted its solve budget");
    ++out.solves;
    Graph gl = with_lambda(g, lambda);
    Solution s = solve(gl, schedule, opts.solve);
    const double r = residual_sum_squares(gl, s.f);
    return std::pair<double, Solution>(r, std::move(s));
  };
  auto accept = [&](double lambda, double r, Solution& s) {
    out.lambda = lambda;
    out.residual = r;
    out.solution = std::move(s);
  };
  auto close = [&](double r) { return std::abs(r - out.target) <= opts.rel_tol * out.target; };

  double lambda = sigma;
  auto [r, s] = attempt(lambda);
  if (close(r)) {
    accept(lambda, r, s);
    return out;
  }
  double lo, hi;
  if (r < out.target) {
    lo = lambda;
    while (true) {
      lambda *= 2.0;
      auto [r2, s2] = attempt(lambda);
      if (close(r2)) {
        accept(lambda, r2, s2);
        return out;
      }
      if (r2 > out.target) break;
      lo = lambda;
    }
    hi = lambda;
  } else {
    hi = lambda;
    while (true) {
      lambda *= 0.5;
      auto [r2, s2] = attempt(lambda);
      if (close(r2)) {
        accept(lambda, r2, s2);
        return out;
      }
      if (r2 < out.target) break;
      hi = lambda;
    }
    lo = lambda;
  }
  while (true) {
    const double mid = 0.5 * (lo + hi);
    auto [r2, s2] = attempt(mid);
    if (close(r2)) {
      accept(mid, r2, s2);
      return out;
    }
    (r2 < out.target ? lo : hi) = mid;
  }
}

struct Interval {
  std::size_t begin = 0;  // first index
  std::size_t end = 0;    // one past the last index

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// All dyadic intervals [q 2^j, (q+1) 2^j) of 0..n-1, clipped at n, lengths 1 upward.
inline std::vector<Interval> dyadic_intervals(std::size_t n) {
  std::vector<Interval> out;
  for (std::size_t len = 1; len < 2 * n; len *= 2)
    for (std::size_t b = 0; b < n; b += len) out.push_back({b, std::min(b + len, n)});
  return out;
}

/// Intervals I with |sum_{i in I} r_i| > sigma * multiplier * sqrt(|I| log n).
inline std::vector<Interval> multiresolution_check(std::span<const double> residuals, double sigma,
                                                   std::span<const Interval> intervals,
                                                   double multiplier = 2.5) {
  const double logn = std::log(static_cast<double>(std::max<std::size_t>(residuals.size(), 2)));
  std::vector<double> prefix(residuals.size() + 1, 0.0);
  for (std::size_t i = 0; i < residuals.size(); ++i) prefix[i + 1] = prefix[i] + residuals[i];
  std::vector<Interval> bad;
  for (const Interval& iv : intervals) {
    const double sum = prefix[iv.end] - prefix[iv.begin];
    const double bound = sigma * multiplier * std::sqrt(static_cast<double>(iv.size()) * logn);
    if (std::abs(sum) > bound) bad.push_back(iv);
  }
  return bad;
}

struct SqueezeConfig {
  double threshold_multiplier = 2.5;
  double reduction_factor = 0.5;
  std::size_t max_rounds = 40;
  /// Starting lambda on every edge; 2 sigma sqrt(n) when unset.
  std::optional<double> initial_lambda;
  /// Noise level; estimate_sigma() on the chain when unset.
  std::optional<double> sigma;
};

struct SqueezeResult {
  std::vector<double> lambdas;
  std::vector<double> f;
  std::vector<RegionId> regions;
  double sigma = 0.0;
  std::size_t rounds = 0;
  bool converged = false;  // false when max_rounds ran out with violations left
};

// Local squeezing on a chain: start smooth and halve lambda on every edge
// touching an interval whose residual sum breaks the multiresolution bound,
// until no dyadic interval does. Lambdas only ever decrease.
inline SqueezeResult local_squeezing(std::span<const double> y, const SqueezeConfig& cfg = {}) {
  const std::size_t n = y.size();
  if (n < 2) throw Error(Errc::LengthMismatch, "local squeezing needs at least two points");
  SqueezeResult out;
  {
    std::vector<double> unit(n - 1, 1.0);
    out.sigma = cfg.sigma ? *cfg.sigma : estimate_sigma(build_chain(y, unit)).sigma;
  }
  double start = cfg.initial_lambda ? *cfg.initial_lambda
                                    : 2.0 * out.sigma * std::sqrt(static_cast<double>(n));
  if (!(start > 0.0)) start = 1.0;
  out.lambdas.assign(n - 1, start);
  const auto intervals = dyadic_intervals(n);

  while (true) {
    const Graph g = build_chain(y, out.lambdas);
    Solution s = solve(g);
    out.f = std::move(s.f);
    out.regions = std::move(s.regions);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - out.f[i];
    const auto bad = multiresolution_check(r, out.sigma, intervals, cfg.threshold_multiplier);
    if (bad.empty()) {
      out.converged = true;
      return out;
    }
    if (out.rounds >= cfg.max_rounds) return out;
    ++out.rounds;
    std::vector<char> shrink(n - 1, 0);
    for (const Interval& iv : bad) {
      // edges (i, i+1) with at least one end inside the interval
      const std::size_t first = iv.begin == 0 ? 0 : iv.begin - 1;
      const std::size_t last = std::min(iv.end, n - 1);
      for (std::size_t e = first; e < last; ++e) shrink[e] = 1;
    }
    for (std::size_t e = 0; e + 1 < n; ++e)
      if (shrink[e]) out.lambdas[e] *= cfg.reduction_factor;
  }
}

}  // namespace graphtv
