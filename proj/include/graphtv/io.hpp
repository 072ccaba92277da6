#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "graphtv/delaunay.hpp"
#include "graphtv/error.hpp"
#include "graphtv/graph.hpp"
#include "graphtv/solver.hpp"

namespace graphtv {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto not_space = [](char ch) { return ch != ' ' && ch != '\t' && ch != '\r' && ch != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary : std::ios::out);
  if (!out) throw Error(Errc::ParseError, "cannot write " + path);
  return out;
}

inline void full_precision(std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
}

}  // namespace detail

// ---------------------------------------------------------------- edge list
// Line 1 "n m", then m lines "tail head lambda", then n lines "w y".

inline Graph read_edge_list(std::istream& in) {
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m)) throw Error(Errc::MalformedHeader, "edge list must start with 'n m'");
  std::vector<Edge> edges(m);
  for (std::size_t e = 0; e < m; ++e) {
    long long t = 0, h = 0;
    if (!(in >> t >> h >> edges[e].lambda))
      throw Error(in.eof() ? Errc::TruncatedData : Errc::ParseError, "edge line " + std::to_string(e));
    if (t < 0 || h < 0 || t > std::numeric_limits<VertexId>::max() ||
        h > std::numeric_limits<VertexId>::max())
      throw Error(Errc::IndexOutOfRange, "edge line " + std::to_string(e));
    edges[e].tail = static_cast<VertexId>(t);
    edges[e].head = static_cast<VertexId>(h);
  }
  std::vector<double> w(n), y(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(in >> w[i] >> y[i]))
      throw Error(in.eof() ? Errc::TruncatedData : Errc::ParseError, "vertex line " + std::to_string(i));
  return make_graph(n, std::move(edges), std::move(w), std::move(y));
}

inline Graph read_edge_list(const std::string& path) {
  auto in = detail::open_in(path);
  return read_edge_list(in);
}

inline void write_edge_list(std::ostream& os, const Graph& g) {
  detail::full_precision(os);
  os << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const Edge& e : g.edges()) os << e.tail << ' ' << e.head << ' ' << e.lambda << '\n';
  for (VertexId i = 0; i < g.num_vertices(); ++i) os << g.weight(i) << ' ' << g.datum(i) << '\n';
}

inline void write_edge_list(const std::string& path, const Graph& g) {
  auto out = detail::open_out(path);
  write_edge_list(out, g);
}

// ---------------------------------------------------------------- PGM

struct ImageBuffer {
  GridShape shape;
  std::vector<double> pixels;  // row-major, in [0, 1]
  unsigned maxval = 255;
  bool binary = true;  // P5 when true, P2 otherwise
};

namespace detail {

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

inline std::size_t pgm_number(std::istream& in, const char* what) {
  const std::string tok = pgm_token(in);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw Error(Errc::MalformedHeader, std::string("bad PGM ") + what);
  return v;
}

}  // namespace detail

inline ImageBuffer read_pgm(std::istream& in) {
  const std::string magic = detail::pgm_token(in);
  if (magic != "P2" && magic != "P5") throw Error(Errc::MalformedHeader, "not a P2/P5 PGM file");
  ImageBuffer img;
  img.binary = magic == "P5";
  img.shape.cols = detail::pgm_number(in, "width");
  img.shape.rows = detail::pgm_number(in, "height");
  const std::size_t maxval = detail::pgm_number(in, "maxval");
  if (img.shape.cols == 0 || img.shape.rows == 0)
    throw Error(Errc::MalformedHeader, "PGM dimensions must be positive");
  if (maxval == 0 || maxval > 65535) throw Error(Errc::MalformedHeader, "PGM maxval out of range");
  img.maxval = static_cast<unsigned>(maxval);
  const std::size_t count = img.shape.size();
  img.pixels.resize(count);
  const double scale = static_cast<double>(maxval);

  if (img.binary) {
    // the token reader consumed exactly one whitespace byte after maxval
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(count * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      throw Error(Errc::TruncatedData, "PGM raster shorter than header says");
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = bytes == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
      if (v > maxval) throw Error(Errc::MalformedHeader, "PGM sample exceeds maxval");
      img.pixels[i] = v / scale;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t v = 0;
      if (!(in >> v)) throw Error(Errc::TruncatedData, "PGM raster shorter than header says");
      if (v > maxval) throw Error(Errc::MalformedHeader, "PGM sample exceeds maxval");
      img.pixels[i] = static_cast<double>(v) / scale;
    }
  }
  return img;
}

inline ImageBuffer read_pgm(const std::string& path) {
  auto in = detail::open_in(path, true);
  return read_pgm(in);
}

/// Quantises p in [0,1] to round(p * maxval) with halves rounded up, clamped.
inline unsigned quantize(double p, unsigned maxval) {
  const double v = std::floor(p * maxval + 0.5);
  if (!(v > 0.0)) return 0;
  return v >= maxval ? maxval : static_cast<unsigned>(v);
}

inline void write_pgm(std::ostream& os, const ImageBuffer& img) {
  if (img.pixels.size() != img.shape.size())
    throw Error(Errc::ShapeMismatch, "pixel count does not match image shape");
  if (img.maxval == 0 || img.maxval > 65535) throw Error(Errc::MalformedHeader, "maxval out of range");
  os << (img.binary ? "P5" : "P2") << '\n'
     << img.shape.cols << ' ' << img.shape.rows << '\n'
     << img.maxval << '\n';
  if (img.binary) {
    const bool wide = img.maxval > 255;
    std::vector<unsigned char> raw;
    raw.reserve(img.pixels.size() * (wide ? 2 : 1));
    for (double p : img.pixels) {
      const unsigned v = quantize(p, img.maxval);
      if (wide) raw.push_back(static_cast<unsigned char>(v >> 8));
      raw.push_back(static_cast<unsigned char>(v & 0xff));
    }
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  } else {
    for (std::size_t r = 0; r < img.shape.rows; ++r) {
      for (std::size_t c = 0; c < img.shape.cols; ++c)
        os << (c ? " " : "") << quantize(img.pixels[r * img.shape.cols + c], img.maxval);
      os << '\n';
    }
  }
}

inline void write_pgm(const std::string& path, const ImageBuffer& img) {
  auto out = detail::open_out(path, true);
  write_pgm(out, img);
}

// ---------------------------------------------------------------- CSV

namespace detail {

// Numeric rows of a comma-separated file. A first line that does not parse
// as numbers is taken as a header; blank lines are skipped.
inline std::vector<std::vector<double>> read_csv_rows(std::istream& in, std::size_t min_cols) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    bool ok = true;
    std::string_view rest = line;
    while (true) {
      const std::size_t comma = rest.find(',');
      double v = 0.0;
      if (!parse_double(rest.substr(0, comma), v)) {
        ok = false;
        break;
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const bool was_first = first;
    first = false;
    if (!ok) {
      if (was_first) continue;
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": not numeric");
    }
    if (row.size() < min_cols)
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(min_cols) + " columns");
    for (double v : row)
      if (!std::isfinite(v))
        throw Error(Errc::NonFiniteData, "line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

struct Signal {
  std::vector<double> x;
  std::vector<double> y;
};

/// Two columns x,y. Rows come back sorted by x (stable). With
/// reject_duplicate_x, equal x values throw DuplicateX.
inline Signal read_csv_signal(std::istream& in, bool reject_duplicate_x = true) {
  const auto rows = detail::read_csv_rows(in, 2);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a][0] < rows[b][0]; });
  Signal s;
  for (std::size_t i : order) {
    if (reject_duplicate_x && !s.x.empty() && s.x.back() == rows[i][0])
      throw Error(Errc::DuplicateX, "x = " + std::to_string(rows[i][0]) + " appears twice");
    s.x.push_back(rows[i][0]);
    s.y.push_back(rows[i][1]);
  }
  return s;
}

inline Signal read_csv_signal(const std::string& path, bool reject_duplicate_x = true) {
  auto in = detail::open_in(path);
  return read_csv_signal(in, reject_duplicate_x);
}

struct ScatterSet {
  PointSet points;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
};

/// Three columns x1,x2,y.
inline ScatterSet read_csv_scatter(std::istream& in) {
  ScatterSet s;
  for (const auto& row : detail::read_csv_rows(in, 3)) {
    s.points.push_back({row[0], row[1]});
    s.y.push_back(row[2]);
  }
  return s;
}

inline ScatterSet read_csv_scatter(const std::string& path) {
  auto in = detail::open_in(path);
  return read_csv_scatter(in);
}

inline void write_csv_scatter(std::ostream& os, const ScatterSet& s) {
  detail::full_precision(os);
  os << "x1,x2,y\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << s.points[i].x << ',' << s.points[i].y << ',' << s.y[i] << '\n';
}

struct CsvColumn {
  std::string name;
  std::vector<double> values;
};

/// Header line of column names, then one row per index. Columns must agree in length.
inline void write_csv_fit(std::ostream& os, const std::vector<CsvColumn>& columns) {
  if (columns.empty()) return;
  const std::size_t rows = columns.front().values.size();
  for (const CsvColumn& c : columns)
    if (c.values.size() != rows) throw Error(Errc::LengthMismatch, "column " + c.name);
  detail::full_precision(os);
  for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j].name;
  os << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j].values[i];
    os << '\n';
  }
}

inline void write_csv_fit(const std::string& path, const std::vector<CsvColumn>& columns) {
  auto out = detail::open_out(path);
  write_csv_fit(out, columns);
}

// ---------------------------------------------------------------- traces and state

/// One line per event: iter edge_index kind df_k df_l dc Q_working
inline void write_trace(std::ostream& os, std::span<const TraceRecord> trace) {
  detail::full_precision(os);
  for (const TraceRecord& t : trace)
    os << t.iteration << ' ' << t.edge << ' ' << event_kind_name(t.kind) << ' ' << t.df_k << ' '
       << t.df_l << ' ' << t.dc << ' ' << t.working_objective << '\n';
}

// Terminal coefficients and active flags, one line "c active" per edge in
// edge order. verify reads this back to check a stored fit.
inline void write_state(std::ostream& os, const Certificate& cert) {
  detail::full_precision(os);
  std::vector<char> active(cert.c.size(), 0);
  for (EdgeId e : cert.active) active[e] = 1;
  for (std::size_t e = 0; e < cert.c.size(); ++e) os << cert.c[e] << ' ' << int{active[e]} << '\n';
}

inline void write_state(const std::string& path, const Certificate& cert) {
  auto out = detail::open_out(path);
  write_state(out, cert);
}

struct StoredState {
  std::vector<double> c;
  std::vector<EdgeId> active;
};

inline StoredState read_state(std::istream& in, std::size_t num_edges) {
  StoredState s;
  s.c.resize(num_edges);
  for (std::size_t e = 0; e < num_edges; ++e) {
    int flag = 0;
    if (!(in >> s.c[e] >> flag))
      throw Error(in.eof() ? Errc::TruncatedData : Errc::ParseError, "state line " + std::to_string(e));
    if (flag) s.active.push_back(static_cast<EdgeId>(e));
  }
  return s;
}

inline StoredState read_state(const std::string& path, std::size_t num_edges) {
  auto in = detail::open_in(path);
  return read_state(in, num_edges);
}

/// Reads a fit vector: one value per line, or a CSV whose column named "f"
/// (else the last column) holds the fit.
inline std::vector<double> read_fit(std::istream& in) {
  std::vector<double> f;
  std::string line;
  std::size_t column = static_cast<std::size_t>(-1);
  bool first = true;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const std::size_t comma = rest.find(',');
      cells.push_back(detail::trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    double v = 0.0;
    if (first) {
      first = false;
      if (!detail::parse_double(cells.back(), v)) {
        for (std::size_t j = 0; j < cells.size(); ++j)
          if (cells[j] == "f") column = j;
        continue;
      }
    }
    const std::size_t j = column < cells.size() ? column : cells.size() - 1;
    if (!detail::parse_double(cells[j], v)) throw Error(Errc::ParseError, "fit value: " + line);
    f.push_back(v);
  }
  return f;
}

inline std::vector<double> read_fit(const std::string& path) {
  auto in = detail::open_in(path);
  return read_fit(in);
}

}  // namespace graphtv
