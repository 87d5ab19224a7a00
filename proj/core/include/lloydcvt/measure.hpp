#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lloydcvt/rng.hpp"

namespace lloydcvt {

enum class DistKind { analytic1d, analytic_nd, empirical };

// Support descriptor; lo/hi entries may be +-infinity.
struct Support {
  enum class Shape { interval, box, ball, all_space };
  Shape shape = Shape::all_space;
  std::vector<double> lo, hi;    // interval (dim 1) and box
  std::vector<double> center;    // ball
  double radius = 0.0;           // ball

  bool contains(const double* p, int dim) const;
  bool bounded(int dim) const;
};

// Probability model. The 1D analytic closures return raw partial moments
// over [a, b] (infinite endpoints allowed):
//   s0 = integral of rho, s1 = integral of xi*rho, s2 = integral of xi^2*rho.
// Built-in families carry closed forms; user-supplied 1D models fall back
// to adaptive quadrature for s1/s2.
struct Dist {
  DistKind kind = DistKind::analytic1d;
  int dim = 1;
  std::string family;            // "uniform" | "gaussian" | "exponential" | "empirical" | custom
  std::vector<double> mean;
  std::vector<double> scale;     // per-coordinate spread; sets probe boxes for unbounded support
  Support support;

  std::function<double(const double*)> density;  // empty for empirical models
  std::function<double(double)> cdf;             // 1D only
  std::function<double(double, double)> s0, s1, s2;

  std::function<void(RngStream&, double*)> draw;         // one sample of mu
  std::function<void(RngStream&, double*)> draw_tilted;  // splitting law
  bool tilt_fallback = false;  // draw_tilted is just mu (no usable tilted sampler)

  // Empirical payload: row-major support points, normalized weights, and
  // their running sum for inverse-cdf draws.
  std::vector<double> points;
  std::vector<double> weights;
  std::vector<double> weight_cdf;

  std::size_t point_count() const {
    return dim > 0 ? points.size() / static_cast<std::size_t>(dim) : 0;
  }
};

Dist uniform_box(std::vector<double> lo, std::vector<double> hi);
Dist gaussian(std::vector<double> mean, std::vector<double> sigma);
Dist exponential(double rate);

// User-supplied 1D model on [a, b] (+-inf allowed). density and cdf are
// required; mean and scale locate the distribution for probing and
// infinite-tail truncation. Partial moments may be supplied when closed
// forms are known; otherwise adaptive quadrature (tol 1e-12) is used with
// infinite endpoints truncated at mean +- 60*scale.
Dist analytic1d(std::string family, std::function<double(double)> density,
                std::function<double(double)> cdf, double a, double b, double mean,
                double scale, std::function<double(double, double)> s1 = {},
                std::function<double(double, double)> s2 = {});

Dist empirical(std::vector<double> points, int dim, std::vector<double> weights = {});

// CSV layout: one point per row, columns x1..xd, optional weight column
// named "w" when a header row is present. Without a header every column
// is a coordinate.
Dist empirical_from_csv(const std::string& path);

// n samples, row-major; stream (seed, kSample). Bitwise-reproducible for
// equal seeds.
std::vector<double> sample(const Dist& d, std::size_t n, std::uint64_t seed);

struct IntervalStats {
  double mass = 0.0;
  double mean = 0.0;           // conditional mean, NaN when mass == 0
  double second_moment = 0.0;  // raw: integral of xi^2 over [a, b]
};
IntervalStats interval_stats(const Dist& d, double a, double b);

// Second moment of |X - m| outside the ball B(m, 2R/5), m the distribution
// mean. Exact for 1D analytic and empirical models (std_err = 0), Monte
// Carlo with reported standard error otherwise.
double tail_second_moment(const Dist& d, double R, double* std_err = nullptr,
                          std::size_t mc_samples = std::size_t{1} << 17,
                          std::uint64_t seed = 0);

// One draw from the splitting law (density proportional to rho^{d/(d+2)},
// or weight-proportional for empirical models). Returns false when the
// model has no tilted sampler and the draw fell back to mu itself.
bool split_point(const Dist& d, RngStream& rng, double* out);

}  // namespace lloydcvt
