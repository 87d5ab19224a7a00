#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <vector>

#include "lloydcvt/errors.hpp"
#include "lloydcvt/measure.hpp"
#include "lloydcvt/numerics.hpp"
#include "oracles.hpp"

using namespace lloydcvt;

namespace {

// Closed-form partial moments must agree with plain quadrature of the
// density on random finite windows.
void check_moments_against_quadrature(const Dist& d, std::uint64_t seed) {
  double wlo, whi;
  oracles::window(d, wlo, whi);
  RngStream rng(seed, 0x77);
  for (int k = 0; k < 12; ++k) {
    double a = wlo + (whi - wlo) * rng.uniform01();
    double b = wlo + (whi - wlo) * rng.uniform01();
    if (a > b) std::swap(a, b);
    double q0 = oracles::quad([&](double t) { return d.density(&t); }, a, b);
    double q1 = oracles::quad([&](double t) { return t * d.density(&t); }, a, b);
    double q2 = oracles::quad([&](double t) { return t * t * d.density(&t); }, a, b);
    CHECK(std::fabs(d.s0(a, b) - q0) < 1e-9);
    CHECK(std::fabs(d.s1(a, b) - q1) < 1e-9);
    CHECK(std::fabs(d.s2(a, b) - q2) < 1e-9);
  }
  // Full-line moments: total mass 1, first moment = mean.
  double inf = std::numeric_limits<double>::infinity();
  CHECK(std::fabs(d.s0(-inf, inf) - 1.0) < 1e-12);
  CHECK(std::fabs(d.s1(-inf, inf) - d.mean[0]) < 1e-10);
}

}  // namespace

TEST_CASE("uniform closures match quadrature") {
  Dist d = uniform_box({-0.75}, {2.0});
  check_moments_against_quadrature(d, 1);
  CHECK(d.s2(-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()) ==
        doctest::Approx((8.0 + 0.75 * 0.75 * 0.75) / 3.0 / 2.75).epsilon(1e-12));
  CHECK(d.support.bounded(1));
  double p = 0.5;
  CHECK(d.density(&p) == doctest::Approx(1.0 / 2.75));
  p = -1.0;
  CHECK(d.density(&p) == 0.0);
}

TEST_CASE("gaussian closures match quadrature and known moments") {
  Dist d = gaussian({0.4}, {1.3});
  check_moments_against_quadrature(d, 2);
  double inf = std::numeric_limits<double>::infinity();
  CHECK(std::fabs(d.s2(-inf, inf) - (0.4 * 0.4 + 1.3 * 1.3)) < 1e-10);
  CHECK(d.cdf(0.4) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(d.support.bounded(1));
}

TEST_CASE("exponential closures match quadrature") {
  Dist d = exponential(1.7);
  check_moments_against_quadrature(d, 3);
  CHECK(d.mean[0] == doctest::Approx(1.0 / 1.7));
  double inf = std::numeric_limits<double>::infinity();
  CHECK(std::fabs(d.s2(0.0, inf) - 2.0 / (1.7 * 1.7)) < 1e-10);
  double m = -0.5;
  CHECK(d.density(&m) == 0.0);
}

TEST_CASE("user analytic1d model falls back to quadrature moments") {
  Dist d = oracles::make_triangle(-1.0, 3.0);
  check_moments_against_quadrature(d, 4);
  CHECK(d.mean[0] == doctest::Approx(1.0));
  CHECK(d.tilt_fallback);

  // Inverse-cdf draws follow the model.
  std::vector<double> xs = sample(d, 50000, 5);
  double ks = oracles::ks_statistic(xs, d.cdf);
  CHECK(ks < 1.628 / std::sqrt(50000.0));
}

TEST_CASE("built-in samplers pass a KS test") {
  const std::size_t n = 100000;
  double bound = 1.628 / std::sqrt(static_cast<double>(n));
  {
    Dist d = uniform_box({2.0}, {5.0});
    CHECK(oracles::ks_statistic(sample(d, n, 9), d.cdf) < bound);
  }
  {
    Dist d = gaussian({-1.0}, {0.5});
    CHECK(oracles::ks_statistic(sample(d, n, 10), d.cdf) < bound);
  }
  {
    Dist d = exponential(0.8);
    CHECK(oracles::ks_statistic(sample(d, n, 11), d.cdf) < bound);
  }
}

TEST_CASE("sampling is reproducible per seed") {
  Dist d = gaussian({0.0, 1.0}, {1.0, 2.0});
  std::vector<double> a = sample(d, 512, 123);
  std::vector<double> b = sample(d, 512, 123);
  std::vector<double> c = sample(d, 512, 124);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("empirical model normalizes weights and draws by weight") {
  Dist d = empirical({0.0, 1.0, 2.0}, 1, {1.0, 1.0, 2.0});
  CHECK(d.point_count() == 3);
  CHECK(d.weights[2] == doctest::Approx(0.5));
  CHECK(d.mean[0] == doctest::Approx(0.25 * 0.0 + 0.25 * 1.0 + 0.5 * 2.0));

  RngStream rng(77, streams::kSample);
  std::vector<int> hits(3, 0);
  double p;
  for (int i = 0; i < 40000; ++i) {
    d.draw(rng, &p);
    if (p == 0.0) ++hits[0];
    if (p == 1.0) ++hits[1];
    if (p == 2.0) ++hits[2];
  }
  CHECK(hits[0] + hits[1] + hits[2] == 40000);
  CHECK(std::fabs(hits[2] / 40000.0 - 0.5) < 0.01);
  CHECK(std::fabs(hits[0] / 40000.0 - 0.25) < 0.01);
}

TEST_CASE("empirical csv parsing") {
  const char* path = "measure_test_points.csv";
  {
    std::ofstream f(path);
    f << "x1,x2,w\n0.0,0.5,1\n1.0,0.25,3\n";
  }
  Dist d = empirical_from_csv(path);
  CHECK(d.dim == 2);
  CHECK(d.point_count() == 2);
  CHECK(d.weights[1] == doctest::Approx(0.75));
  std::remove(path);

  {
    std::ofstream f(path);
    f << "1.5,2.5\n3.5,4.5\n5.5,6.5\n";
  }
  Dist headerless = empirical_from_csv(path);
  CHECK(headerless.dim == 2);
  CHECK(headerless.point_count() == 3);
  CHECK(headerless.weights[0] == doctest::Approx(1.0 / 3.0));
  std::remove(path);

  {
    std::ofstream f(path);
    f << "1.0,2.0\n3.0\n";
  }
  CHECK_THROWS_AS(empirical_from_csv(path), Error);
  std::remove(path);
  CHECK_THROWS_AS(empirical_from_csv("no_such_file.csv"), Error);
}

TEST_CASE("interval stats agree with the closures") {
  Dist d = gaussian({0.0}, {1.0});
  IntervalStats st = interval_stats(d, -0.5, 1.5);
  CHECK(st.mass == doctest::Approx(d.s0(-0.5, 1.5)).epsilon(1e-12));
  CHECK(st.mean == doctest::Approx(d.s1(-0.5, 1.5) / d.s0(-0.5, 1.5)).epsilon(1e-12));
  CHECK(st.second_moment == doctest::Approx(d.s2(-0.5, 1.5)).epsilon(1e-12));
}

TEST_CASE("tail second moment: gaussian closed form at threshold 1") {
  // Threshold is 2R/5; R = 2.5 puts it at t = 1 where the half-line
  // integral 2*(t*phi(t) + 1 - Phi(t)) evaluates to 0.801252.
  Dist d = gaussian({0.0}, {1.0});
  double t = 1.0;
  double expect = 2.0 * (t * norm_pdf(t) + 1.0 - norm_cdf(t));
  CHECK(tail_second_moment(d, 2.5) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(expect == doctest::Approx(0.801252).epsilon(1e-6));
}

TEST_CASE("tail second moment vanishes beyond bounded support") {
  Dist d = uniform_box({0.0}, {1.0});
  CHECK(tail_second_moment(d, 1.25) == 0.0);   // t = 0.5 = support radius
  CHECK(tail_second_moment(d, 10.0) == 0.0);
  CHECK(tail_second_moment(d, 0.5) > 0.0);     // t = 0.2 cuts into the support
}

TEST_CASE("tail second moment: empirical exact sum") {
  Dist d = empirical({0.0, 1.0, 10.0}, 1, {0.5, 0.25, 0.25});
  // mean = 2.75; with R = 5, t = 2; |x-m| = 2.75, 1.75, 7.25.
  double expect = 0.5 * 2.75 * 2.75 + 0.25 * 7.25 * 7.25;
  CHECK(tail_second_moment(d, 5.0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("tail second moment: 2D gaussian Monte Carlo vs chi-square closed form") {
  Dist d = gaussian({0.0, 0.0}, {1.0, 1.0});
  double R = 3.0, t = 0.4 * R;
  double expect = (t * t + 2.0) * std::exp(-0.5 * t * t);  // E |X|^2 1{|X|>t}
  double se = 0.0;
  double got = tail_second_moment(d, R, &se, std::size_t{1} << 18, 3);
  CHECK(se > 0.0);
  CHECK(std::fabs(got - expect) < 6.0 * se);
  CHECK(tail_second_moment(d, R, nullptr, std::size_t{1} << 18, 3) == got);
}

TEST_CASE("split point draws the tilted law") {
  const std::size_t n = 60000;
  double bound = 1.628 / std::sqrt(static_cast<double>(n));
  {
    // Gaussian tilt: covariance scales by (d+2)/d = 3 in 1D.
    Dist d = gaussian({0.5}, {1.0});
    RngStream rng(21, streams::kSplit);
    std::vector<double> xs(n);
    for (auto& x : xs) {
      CHECK(split_point(d, rng, &x));
    }
    double s = std::sqrt(3.0);
    CHECK(oracles::ks_statistic(xs, [s](double x) { return norm_cdf((x - 0.5) / s); }) < bound);
  }
  {
    // Uniform tilt is uniform.
    Dist d = uniform_box({1.0}, {2.0});
    RngStream rng(22, streams::kSplit);
    std::vector<double> xs(n);
    for (auto& x : xs) CHECK(split_point(d, rng, &x));
    CHECK(oracles::ks_statistic(xs, d.cdf) < bound);
  }
  {
    // Exponential tilt: rate scales by d/(d+2) = 1/3.
    Dist d = exponential(3.0);
    RngStream rng(23, streams::kSplit);
    std::vector<double> xs(n);
    for (auto& x : xs) CHECK(split_point(d, rng, &x));
    CHECK(oracles::ks_statistic(
              xs, [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); }) < bound);
  }
  {
    // Empirical: support points, weight-proportional.
    Dist d = empirical({0.0, 1.0}, 1, {0.9, 0.1});
    RngStream rng(24, streams::kSplit);
    int ones = 0;
    double x;
    for (int i = 0; i < 20000; ++i) {
      CHECK(split_point(d, rng, &x));
      CHECK((x == 0.0 || x == 1.0));
      ones += x == 1.0;
    }
    CHECK(std::fabs(ones / 20000.0 - 0.1) < 0.01);
  }
  {
    // User model without a tilted sampler falls back to mu and says so.
    Dist d = oracles::make_triangle(0.0, 1.0);
    RngStream rng(25, streams::kSplit);
    double x;
    CHECK_FALSE(split_point(d, rng, &x));
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("constructor preconditions") {
  CHECK_THROWS_AS(uniform_box({1.0}, {1.0}), Error);
  CHECK_THROWS_AS(uniform_box({0.0, 0.0}, {1.0}), Error);
  CHECK_THROWS_AS(gaussian({0.0}, {0.0}), Error);
  CHECK_THROWS_AS(exponential(0.0), Error);
  CHECK_THROWS_AS(empirical({}, 1), Error);
  CHECK_THROWS_AS(empirical({0.0, 1.0}, 1, {1.0, -1.0}), Error);
}
