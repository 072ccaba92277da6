#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "graphtv/error.hpp"
#include "graphtv/io.hpp"

namespace graphtv {

/// Test surface: a broad bump of height 1 at (0.5, 0.5) and two sharp dips
/// of depth 1 at (0.25, 0.25) and (0.75, 0.75).
inline double bump_surface(double x1, double x2) {
  auto sq = [](double a, double b) { return a * a + b * b; };
  return std::exp(-100.0 * sq(x1 - 0.5, x2 - 0.5)) - std::exp(-1000.0 * sq(x1 - 0.25, x2 - 0.25)) -
         std::exp(-1000.0 * sq(x1 - 0.75, x2 - 0.75));
}

// mt19937_64 with explicit conversions, so a given seed produces the same
// stream on every standard library (std distributions are unspecified).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by Box-Muller; the second value of each pair is kept.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// n covariates uniform on the unit square, y = bump_surface + N(0, sd^2).
/// Covariates are drawn first, then the noise.
inline ScatterSet generate_simulation(std::size_t n, double noise_sd, std::uint64_t seed) {
  if (n < 3) throw Error(Errc::TooFewPoints, "simulation needs at least three points");
  if (!(noise_sd >= 0.0)) throw Error(Errc::NonPositiveSigma, "noise sd must be non-negative");
  Rng rng(seed);
  ScatterSet s;
  s.points.resize(n);
  for (Point2& p : s.points) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  s.y.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.y[i] = bump_surface(s.points[i].x, s.points[i].y) + noise_sd * rng.normal();
  return s;
}

}  // namespace graphtv
