#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphtv/graphtv.hpp"

namespace {

using namespace graphtv;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kNumerical = 3;

struct Common {
  std::string output = "-";
  std::string trace;
  std::string state;
  bool regions = false;
  std::optional<double> lambda;
  std::optional<double> sigma;
  bool automatic = false;
};

// "-" means stdin/stdout throughout.
template <class Fn>
void with_input(const std::string& path, bool binary, Fn&& fn) {
  if (path == "-") {
    fn(std::cin);
    return;
  }
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path);
  fn(in);
}

template <class Fn>
void with_output(const std::string& path, bool binary, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary : std::ios::out);
  if (!out) throw Error(Errc::ParseError, "cannot write " + path);
  fn(out);
}

void add_common(CLI::App* cmd, Common& o, bool lambda_modes = true) {
  cmd->add_option("-o,--output", o.output, "output file, '-' for stdout");
  cmd->add_option("--trace", o.trace, "write the event log of the final solve here");
  cmd->add_option("--state", o.state, "write terminal coefficients and active flags here");
  if (lambda_modes) {
    auto* lam = cmd->add_option("--lambda", o.lambda, "global smoothing parameter");
    auto* aut = cmd->add_flag("--auto", o.automatic, "choose lambda by the discrepancy principle");
    lam->excludes(aut);
    cmd->add_option("--sigma", o.sigma, "noise level, overriding the estimate");
  }
}

std::vector<double> as_doubles(const std::vector<RegionId>& r) {
  return {r.begin(), r.end()};
}

void write_side_files(const Common& o, const Solution& s) {
  if (!o.trace.empty()) with_output(o.trace, false, [&](std::ostream& os) { write_trace(os, s.trace); });
  if (!o.state.empty()) with_output(o.state, false, [&](std::ostream& os) { write_state(os, s.certificate); });
}

SolveOptions solve_options(const Common& o) {
  SolveOptions opts;
  opts.record_trace = !o.trace.empty();
  return opts;
}

double sigma_for(const Common& o, const Graph& g) {
  if (o.sigma) {
    if (!(*o.sigma > 0.0)) throw Error(Errc::NonPositiveSigma, "--sigma must be positive");
    return *o.sigma;
  }
  const double s = estimate_sigma(g).sigma;
  if (!(s > 0.0)) throw Error(Errc::NonPositiveSigma, "estimated noise level is zero; pass --sigma");
  return s;
}

// Solves g either at the fixed lambda or at the discrepancy lambda. The final
// solve is repeated with tracing when a trace was requested.
Solution solve_global(const Common& o, const Graph& g, const EdgeSchedule& schedule, double* chosen) {
  double lambda = 0.0;
  if (o.automatic) {
    const double sigma = sigma_for(o, g);
    DiscrepancyResult d = solve_discrepancy(g, sigma, schedule);
    std::cerr << "sigma " << sigma << " lambda " << d.lambda << " residual " << d.residual
              << " target " << d.target << " solves " << d.solves << '\n';
    lambda = d.lambda;
    if (o.trace.empty()) {
      if (chosen) *chosen = lambda;
      return std::move(d.solution);
    }
  } else if (o.lambda) {
    lambda = *o.lambda;
  } else {
    throw CLI::RequiredError("one of --lambda or --auto");
  }
  if (chosen) *chosen = lambda;
  return solve(with_lambda(g, lambda), schedule, solve_options(o));
}

// ---------------------------------------------------------------- chain

struct ChainArgs {
  Common common;
  std::string input = "-";
  bool squeeze = false;
  std::string baseline;
  bool mean_correct = false;
};

int run_chain(const ChainArgs& a) {
  const Common& o = a.common;
  Signal sig;
  with_input(a.input, false, [&](std::istream& in) { sig = read_csv_signal(in, true); });
  const std::size_t n = sig.y.size();
  if (n < 2) throw Error(Errc::LengthMismatch, "chain needs at least two observations");

  std::vector<double> lambdas;
  if (a.squeeze) {
    if (o.lambda || o.automatic) throw CLI::ValidationError("--squeeze excludes --lambda and --auto");
    SqueezeConfig cfg;
    cfg.sigma = o.sigma;
    const SqueezeResult sq = local_squeezing(sig.y, cfg);
    std::cerr << "sigma " << sq.sigma << " rounds " << sq.rounds
              << (sq.converged ? "" : " (round limit reached)") << '\n';
    lambdas = sq.lambdas;
  } else if (o.automatic) {
    const Graph g = build_chain(sig.y, 1.0);
    const DiscrepancyResult d = solve_discrepancy(g, sigma_for(o, g), natural_order(g));
    std::cerr << "lambda " << d.lambda << " solves " << d.solves << '\n';
    lambdas.assign(n - 1, d.lambda);
  } else if (o.lambda) {
    lambdas.assign(n - 1, *o.lambda);
  } else {
    throw CLI::RequiredError("one of --lambda, --auto or --squeeze");
  }

  Graph g = build_chain(sig.y, lambdas);
  if (!a.baseline.empty()) {
    double lb = 0.0;
    if (a.baseline == "auto") {
      lb = *std::min_element(lambdas.begin(), lambdas.end());
    } else {
      try {
        std::size_t used = 0;
        lb = std::stod(a.baseline, &used);
        if (used != a.baseline.size()) throw std::invalid_argument(a.baseline);
      } catch (const std::exception&) {
        throw CLI::ValidationError("--baseline", "expects a number or 'auto'");
      }
    }
    g = augment_baseline(g, lb);
  }
  const Solution s = solve(g, solve_options(o));
  std::vector<double> f = s.f;
  if (a.mean_correct) f = mean_correction(g, f, s.regions, true);
  f.resize(n);
  std::vector<RegionId> regions(s.regions.begin(), s.regions.begin() + static_cast<std::ptrdiff_t>(n));

  std::vector<CsvColumn> cols{{"x", sig.x}, {"y", sig.y}, {"f", f}};
  if (o.regions) cols.push_back({"region", as_doubles(regions)});
  with_output(o.output, false, [&](std::ostream& os) { write_csv_fit(os, cols); });
  write_side_files(o, s);
  return kOk;
}

// ---------------------------------------------------------------- image

struct ImageArgs {
  Common common;
  std::string input;
  std::string schedule = "dyadic";
  std::string regions_path;
};

int run_image(const ImageArgs& a) {
  const Common& o = a.common;
  ImageBuffer img;
  with_input(a.input, true, [&](std::istream& in) { img = read_pgm(in); });
  const Graph g = build_grid4(img.shape, img.pixels, 1.0);
  if (g.num_edges() == 0) throw Error(Errc::NoEdges, "image has a single pixel");
  const EdgeSchedule schedule = a.schedule == "natural" ? natural_order(g) : dyadic_grid_order(img.shape);
  const Solution s = solve_global(o, g, schedule, nullptr);

  ImageBuffer out = img;
  out.pixels = s.f;
  with_output(o.output, true, [&](std::ostream& os) { write_pgm(os, out); });
  if (!a.regions_path.empty()) {
    std::vector<double> row(g.num_vertices()), col(g.num_vertices());
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      row[v] = static_cast<double>(v / img.shape.cols);
      col[v] = static_cast<double>(v % img.shape.cols);
    }
    with_output(a.regions_path, false, [&](std::ostream& os) {
      write_csv_fit(os, {{"row", row}, {"col", col}, {"f", s.f}, {"region", as_doubles(s.regions)}});
    });
  }
  write_side_files(o, s);
  return kOk;
}

// ---------------------------------------------------------------- scatter

struct ScatterArgs {
  Common common;
  std::string input = "-";
};

int run_scatter(const ScatterArgs& a) {
  const Common& o = a.common;
  ScatterSet data;
  with_input(a.input, false, [&](std::istream& in) { data = read_csv_scatter(in); });
  const DelaunayGraph dg = build_delaunay_graph(data.points, data.y, 1.0);
  const Solution s = solve_global(o, dg.graph, natural_order(dg.graph), nullptr);

  const std::size_t rows = data.size();
  std::vector<double> x1(rows), x2(rows), f(rows), region(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    x1[i] = data.points[i].x;
    x2[i] = data.points[i].y;
    f[i] = s.f[dg.vertex_of[i]];
    region[i] = s.regions[dg.vertex_of[i]];
  }
  std::vector<CsvColumn> cols{{"x1", x1}, {"x2", x2}, {"y", data.y}, {"f", f}};
  if (o.regions) cols.push_back({"region", region});
  with_output(o.output, false, [&](std::ostream& os) { write_csv_fit(os, cols); });
  write_side_files(o, s);
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string output = "-";
  std::size_t n = 1000;
  double sd = 0.05;
  std::uint64_t seed = 1;
};

int run_simulate(const SimulateArgs& a) {
  const ScatterSet s = generate_simulation(a.n, a.sd, a.seed);
  with_output(a.output, false, [&](std::ostream& os) { write_csv_scatter(os, s); });
  return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  Common common;
  std::string graph;
};

int run_solve(const SolveArgs& a) {
  const Common& o = a.common;
  Graph g;
  with_input(a.graph, false, [&](std::istream& in) { g = read_edge_list(in); });
  Solution s;
  if (o.lambda || o.automatic)
    s = solve_global(o, g, natural_order(g), nullptr);
  else
    s = solve(g, solve_options(o));
  std::vector<double> vertex(g.num_vertices());
  for (std::size_t v = 0; v < vertex.size(); ++v) vertex[v] = static_cast<double>(v);
  std::vector<CsvColumn> cols{{"vertex", vertex}, {"f", s.f}};
  if (o.regions) cols.push_back({"region", as_doubles(s.regions)});
  with_output(o.output, false, [&](std::ostream& os) { write_csv_fit(os, cols); });
  write_side_files(o, s);
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string graph;
  std::string fit;
  std::string state;
  double tol = 1e-8;
};

int run_verify(const VerifyArgs& a) {
  const Graph g = read_edge_list(a.graph);
  const std::vector<double> f = read_fit(a.fit);
  if (f.size() != g.num_vertices())
    throw Error(Errc::DimensionMismatch, "fit has " + std::to_string(f.size()) + " values, graph has " +
                                             std::to_string(g.num_vertices()) + " vertices");
  std::vector<double> c;
  std::vector<EdgeId> active;
  if (!a.state.empty()) {
    StoredState st = read_state(a.state, g.num_edges());
    c = std::move(st.c);
    active = std::move(st.active);
  } else {
    const Solution s = solve(g);
    c = s.certificate.c;
    active = s.certificate.active;
  }
  const CertificateReport r = check_certificate(g, f, c, active, a.tol);
  std::cout << "acyclic       " << (r.acyclic ? "yes" : "no") << '\n'
            << "stopping      " << r.stopping << '\n'
            << "coefficient   " << r.coefficient << '\n'
            << "unit_active   " << r.unit_active << '\n'
            << "constant      " << r.constant << '\n'
            << "stationarity  " << r.stationarity << '\n'
            << "split_strict  " << r.split_strict << '\n'
            << "split_relaxed " << r.split_relaxed << '\n'
            << "form          " << certificate_form_name(r.form) << '\n'
            << "objective     " << objective(g, f) << '\n'
            << (r.pass() ? "PASS" : "FAIL") << '\n';
  return r.pass() ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact total variation denoising on graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "graphtv 1.0");

  ChainArgs chain;
  auto* c = app.add_subcommand("chain", "denoise an ordered signal (CSV x,y)");
  c->add_option("input", chain.input, "CSV file, '-' for stdin");
  add_common(c, chain.common);
  c->add_flag("--squeeze", chain.squeeze, "per-edge lambdas by local squeezing");
  c->add_option("--baseline", chain.baseline, "add a baseline vertex: lambda_b or 'auto'");
  c->add_flag("--mean-correct", chain.mean_correct, "reset each region to the mean of its data");
  c->add_flag("--regions", chain.common.regions, "append a region id column");

  ImageArgs image;
  auto* im = app.add_subcommand("image", "denoise a PGM image on the 4-neighbour grid");
  im->add_option("input", image.input, "P2/P5 PGM file, '-' for stdin")->required();
  add_common(im, image.common);
  im->add_option("--schedule", image.schedule, "edge order")
      ->check(CLI::IsMember({"natural", "dyadic"}));
  im->add_option("--regions", image.regions_path, "write row,col,f,region CSV here");

  ScatterArgs scatter;
  auto* sc = app.add_subcommand("scatter", "denoise scattered data (CSV x1,x2,y) on its Delaunay graph");
  sc->add_option("input", scatter.input, "CSV file, '-' for stdin");
  add_common(sc, scatter.common);
  sc->add_flag("--regions", scatter.common.regions, "append a region id column");

  SimulateArgs sim;
  auto* si = app.add_subcommand("simulate", "emit the bump-surface test data set as CSV");
  si->add_option("-n", sim.n, "number of points")->check(CLI::Range(std::size_t{3}, std::size_t{1} << 30));
  si->add_option("--sd", sim.sd, "noise standard deviation")->check(CLI::NonNegativeNumber);
  si->add_option("--seed", sim.seed, "generator seed");
  si->add_option("-o,--output", sim.output, "output file, '-' for stdout");

  SolveArgs solve_args;
  auto* so = app.add_subcommand("solve", "solve a graph given in edge-list format");
  so->add_option("graph", solve_args.graph, "edge-list file, '-' for stdin")->required();
  add_common(so, solve_args.common);
  so->add_flag("--regions", solve_args.common.regions, "append a region id column");

  VerifyArgs verify;
  auto* ve = app.add_subcommand("verify", "check a fit against the optimality certificate");
  ve->add_option("--graph", verify.graph, "edge-list file")->required();
  ve->add_option("--fit", verify.fit, "fit: one value per line or CSV with an 'f' column")->required();
  ve->add_option("--state", verify.state, "coefficients and active flags; solved afresh when absent");
  ve->add_option("--tol", verify.tol, "tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c) return run_chain(chain);
    if (*im) return run_image(image);
    if (*sc) return run_scatter(scatter);
    if (*si) return run_simulate(sim);
    if (*so) return run_solve(solve_args);
    if (*ve) return run_verify(verify);
  } catch (const CLI::Error& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? kNumerical : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}
