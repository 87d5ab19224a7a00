#include <doctest.h>

#include <cmath>
#include <vector>

#include "lloydcvt/distortion.hpp"
#include "lloydcvt/errors.hpp"
#include "lloydcvt/lloyd.hpp"
#include "oracles.hpp"

using namespace lloydcvt;

TEST_CASE("exact distortion matches quadrature across the model zoo") {
  RngStream rng(31, 0x41);
  for (int rep = 0; rep < 30; ++rep) {
    Dist d = oracles::random_model(rng);
    Grid g = oracles::random_grid(d, 1 + rng.next_u64() % 6, 2000 + rep);
    double got = distortion(g, d, Backend::exact1d()).value;
    CHECK(std::fabs(got - oracles::distortion_oracle(g, d)) < 1e-8);
  }
}

TEST_CASE("closed forms: uniform pair and gaussian pair") {
  Dist u = uniform_box({0.0}, {1.0});
  Grid gu = Grid::from_rows({{0.25}, {0.75}});
  CHECK(distortion(gu, u, Backend::exact1d()).value == doctest::Approx(1.0 / 48.0).epsilon(1e-14));

  // Optimal 2-point quantizer of N(0,1): +-sqrt(2/pi), error^2 = 1 - 2/pi.
  Dist n01 = gaussian({0.0}, {1.0});
  double a = std::sqrt(2.0 / std::numbers::pi);
  Grid gn = Grid::from_rows({{-a}, {a}});
  CHECK(distortion(gn, n01, Backend::exact1d()).value ==
        doctest::Approx(1.0 - 2.0 / std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("mc distortion brackets the exact value and replays per seed") {
  Dist d = gaussian({0.2}, {1.1});
  Grid g = Grid::from_rows({{-0.9}, {0.4}, {1.8}});
  double exact = distortion(g, d, Backend::exact1d()).value;
  Backend mc = Backend::mc(150000, 5);
  Estimate e = distortion(g, d, mc);
  CHECK(e.std_err > 0.0);
  CHECK(std::fabs(e.value - exact) < 6.0 * e.std_err);
  Estimate again = distortion(g, d, mc);
  CHECK(again.value == e.value);
  CHECK(again.std_err == e.std_err);
}

TEST_CASE("gradient matches finite differences on random cases") {
  RngStream rng(37, 0x42);
  Backend b = Backend::exact1d();
  for (int rep = 0; rep < 25; ++rep) {
    Dist d = oracles::random_model(rng);
    Grid g = oracles::random_grid(d, 2 + rng.next_u64() % 5, 3000 + rep);
    std::vector<double> grad = gradient(g, d, b);
    for (std::size_t p = 0; p < g.size(); ++p) {
      double h = 1e-5 * (1.0 + std::fabs(g.pts[p]));
      double fd = oracles::fd_gradient_entry(g, d, p, h);
      CHECK(std::fabs(grad[p] - fd) < 5e-7);
    }
  }
}

TEST_CASE("gradient is zero at the uniform fixed point and obeys the energy bound") {
  Dist u = uniform_box({0.0}, {1.0});
  Grid g = Grid::from_rows({{0.1}, {0.3}, {0.5}, {0.7}, {0.9}});
  std::vector<double> grad = gradient(g, u, Backend::exact1d());
  for (double v : grad) CHECK(std::fabs(v) < 1e-14);

  // |grad G|^2 <= 4 G on arbitrary grids.
  RngStream rng(39, 0x43);
  for (int rep = 0; rep < 30; ++rep) {
    Dist d = oracles::random_model(rng);
    Grid r = oracles::random_grid(d, 1 + rng.next_u64() % 6, 4000 + rep);
    std::vector<double> gr = gradient(r, d, Backend::exact1d());
    double n2 = 0.0;
    for (double v : gr) n2 += v * v;
    double G = distortion(r, d, Backend::exact1d()).value;
    CHECK(n2 <= 4.0 * G + 1e-12);
  }
}

TEST_CASE("mc gradient reports per-component errors that cover the exact gradient") {
  Dist d = gaussian({0.0}, {1.0});
  Grid g = Grid::from_rows({{-1.0}, {0.5}});
  std::vector<double> exact = gradient(g, d, Backend::exact1d());
  std::vector<double> se;
  std::vector<double> got = gradient(g, d, Backend::mc(200000, 8), &se);
  REQUIRE(se.size() == got.size());
  for (std::size_t p = 0; p < got.size(); ++p) {
    CHECK(se[p] > 0.0);
    CHECK(std::fabs(got[p] - exact[p]) < 6.0 * se[p]);
  }
}

TEST_CASE("energy gap equals the weighted displacement sum and the energy difference") {
  RngStream rng(41, 0x44);
  Backend b = Backend::exact1d();
  for (int rep = 0; rep < 20; ++rep) {
    Dist d = oracles::random_model(rng);
    Grid g = oracles::random_grid(d, 2 + rng.next_u64() % 5, 5000 + rep);
    CellStats st = cell_stats(g, d, b);
    double gap = energy_gap(g, st);

    double manual = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (st.centroid_defined[i]) {
        double dx = g.pts[i] - st.centroid[i];
        manual += st.mass[i] * dx * dx;
      }
    CHECK(gap == doctest::Approx(manual).epsilon(1e-12));

    // Independent identity check: gap = G(grid) - sum_cells int |xi - c_i|^2,
    // both sides by quadrature over the same cells.
    oracles::CellOracle ref = oracles::cell_oracle(g, d);
    double wlo, whi;
    oracles::window(d, wlo, whi);
    std::vector<std::size_t> order(g.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t c) { return g.pts[a] < g.pts[c]; });
    double post = 0.0;
    for (std::size_t s = 0; s < order.size(); ++s) {
      std::size_t i = order[s];
      if (!st.centroid_defined[i]) continue;
      double lo = s == 0 ? wlo : 0.5 * (g.pts[order[s - 1]] + g.pts[order[s]]);
      double hi = s + 1 == order.size() ? whi : 0.5 * (g.pts[order[s]] + g.pts[order[s + 1]]);
      double c = st.centroid[i];
      post += oracles::quad([&](double t) { return (t - c) * (t - c) * d.density(&t); }, lo, hi);
    }
    CHECK(std::fabs(gap - (ref.energy - post)) < 1e-8);
  }
}

TEST_CASE("split gain: exact difference and paired mc agree") {
  Dist d = gaussian({0.0}, {1.0});
  Grid prev = Grid::from_rows({{-0.8}, {0.8}});
  double cand = 0.1;
  Estimate ex = split_gain(prev, &cand, d, Backend::exact1d());
  Grid next = Grid::from_rows({{-0.8}, {0.8}, {0.1}});
  double direct = distortion(prev, d, Backend::exact1d()).value -
                  distortion(next, d, Backend::exact1d()).value;
  CHECK(ex.value == doctest::Approx(direct).epsilon(1e-12));
  CHECK(ex.std_err == 0.0);
  CHECK(ex.value > 0.0);

  Estimate mc = split_gain(prev, &cand, d, Backend::mc(200000, 12));
  CHECK(mc.std_err > 0.0);
  CHECK(std::fabs(mc.value - ex.value) < 6.0 * mc.std_err);
  // Pairing keeps the gain variance far below the distortion variance.
  Estimate raw = distortion(prev, d, Backend::mc(200000, 12));
  CHECK(mc.std_err < raw.std_err);
}

TEST_CASE("optimal error estimate hits known two-point optima") {
  Backend b = Backend::exact1d();
  {
    OptimalErrorEstimate est = estimate_optimal_error(uniform_box({0.0}, {1.0}), 2, b, 5, 7);
    CHECK(est.restart_errors.size() == 5);
    CHECK(est.e == doctest::Approx(std::sqrt(1.0 / 48.0)).epsilon(1e-6));
    CHECK(est.grid.size() == 2);
  }
  {
    OptimalErrorEstimate est = estimate_optimal_error(gaussian({0.0}, {1.0}), 2, b, 5, 7);
    CHECK(est.e == doctest::Approx(std::sqrt(1.0 - 2.0 / std::numbers::pi)).epsilon(1e-6));
  }
  // Level 1 needs no search: the mean is the unique optimum.
  {
    OptimalErrorEstimate est = estimate_optimal_error(gaussian({0.3}, {2.0}), 1, b, 3, 7);
    CHECK(est.e == doctest::Approx(2.0).epsilon(1e-8));
  }
}

TEST_CASE("optimal error estimate preconditions") {
  Backend b = Backend::exact1d();
  Dist d = uniform_box({0.0}, {1.0});
  CHECK_THROWS_AS(estimate_optimal_error(d, 0, b, 5, 1), Error);
  CHECK_THROWS_AS(estimate_optimal_error(d, 2, b, 0, 1), Error);
  Dist emp = empirical({0.0, 1.0, 2.0}, 1);
  CHECK_THROWS_AS(estimate_optimal_error(emp, 3, Backend::mc(1000, 1), 2, 1), Error);
}

TEST_CASE("distortion preconditions") {
  Dist d = uniform_box({0.0}, {1.0});
  Grid empty;
  CHECK_THROWS_AS(distortion(empty, d, Backend::exact1d()), Error);
  Grid g = Grid::from_rows({{0.5}});
  CHECK_THROWS_AS(distortion(g, d, Backend::mc(0, 1)), Error);
}
