#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lloydcvt/errors.hpp"
#include "lloydcvt/measure.hpp"
#include "lloydcvt/voronoi.hpp"
#include "oracles.hpp"

using namespace lloydcvt;

TEST_CASE("nearest_index matches brute force and breaks ties low") {
  RngStream rng(5, 0x31);
  for (int rep = 0; rep < 50; ++rep) {
    int dim = 1 + static_cast<int>(rng.next_u64() % 3);
    Grid g;
    g.dim = dim;
    std::size_t n = 2 + rng.next_u64() % 10;
    for (std::size_t i = 0; i < n * dim; ++i) g.pts.push_back(rng.normal());
    for (int q = 0; q < 20; ++q) {
      std::vector<double> p(dim);
      for (auto& v : p) v = rng.normal();
      CHECK(nearest_index(g, p.data()) == oracles::brute_nearest(g, p.data()));
    }
  }

  Grid tie = Grid::from_rows({{1.0}, {-1.0}, {1.0}});
  double origin_right = 1.0;
  CHECK(nearest_index(tie, &origin_right) == 0);  // duplicate: lowest index wins
  double mid = 0.0;
  CHECK(nearest_index(tie, &mid) == 0);  // equidistant: lowest index wins
}

TEST_CASE("exact 1D cell stats agree with quadrature across the model zoo") {
  RngStream rng(17, 0x32);
  Backend b = Backend::exact1d();
  for (int rep = 0; rep < 40; ++rep) {
    Dist d = oracles::random_model(rng);
    Grid g = oracles::random_grid(d, 1 + rng.next_u64() % 7, 1000 + rep);
    CellStats st = cell_stats(g, d, b);
    oracles::CellOracle ref = oracles::cell_oracle(g, d);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      total += st.mass[i];
      CHECK(std::fabs(st.mass[i] - ref.mass[i]) < 1e-9);
      CHECK(std::fabs(st.second_moment[i] - ref.second_moment[i]) < 1e-9);
      if (st.centroid_defined[i]) {
        CHECK(std::fabs(st.centroid[i] - ref.centroid[i]) < 1e-9);
      } else {
        CHECK(st.mass[i] == 0.0);
        CHECK(std::isnan(st.centroid[i]));
      }
    }
    CHECK(std::fabs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("duplicate generators: lowest index owns the span, the rest are dead") {
  Dist d = uniform_box({0.0}, {1.0});
  Grid g = Grid::from_rows({{0.7}, {0.3}, {0.3}});
  CellStats st = cell_stats(g, d, Backend::exact1d());
  CHECK(st.centroid_defined[0]);
  CHECK(st.centroid_defined[1]);
  CHECK_FALSE(st.centroid_defined[2]);
  CHECK(st.mass[2] == 0.0);
  CHECK(st.mass[1] == doctest::Approx(0.5).epsilon(1e-12));  // [0, 0.5)
  CHECK(st.centroid[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(st.mass[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mc cell stats track exact values within reported errors") {
  Dist d = gaussian({0.0}, {1.0});
  Grid g = Grid::from_rows({{-1.2}, {0.1}, {1.5}});
  CellStats ex = cell_stats(g, d, Backend::exact1d());
  Backend mc = Backend::mc(200000, 99);
  CellStats st = cell_stats(g, d, mc);
  CHECK(st.mc_samples == 200000);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(st.mass_se[i] > 0.0);
    CHECK(std::fabs(st.mass[i] - ex.mass[i]) < 6.0 * st.mass_se[i]);
    CHECK(std::fabs(st.centroid[i] - ex.centroid[i]) < 6.0 * st.centroid_se[i]);
    CHECK(std::fabs(st.second_moment[i] - ex.second_moment[i]) < 6.0 * st.second_moment_se[i]);
  }

  CellStats again = cell_stats(g, d, mc);
  CHECK(again.mass == st.mass);
  CHECK(again.centroid == st.centroid);  // bitwise replay per seed
}

TEST_CASE("mc cell stats flag unsampled cells as dead") {
  Dist d = uniform_box({0.0}, {1.0});
  Grid g = Grid::from_rows({{0.5}, {50.0}});
  CellStats st = cell_stats(g, d, Backend::mc(5000, 3));
  CHECK_FALSE(st.centroid_defined[1]);
  CHECK(st.mass[1] == 0.0);
  CHECK(st.centroid_defined[0]);
}

TEST_CASE("energy sums the second moments") {
  Dist d = uniform_box({0.0}, {1.0});
  Grid g = Grid::from_rows({{0.25}, {0.75}});
  CellStats st = cell_stats(g, d, Backend::exact1d());
  CHECK(st.energy() == doctest::Approx(1.0 / 48.0).epsilon(1e-12));
}

TEST_CASE("min pairwise distance") {
  Grid g = Grid::from_rows({{0.0, 0.0}, {3.0, 4.0}, {0.0, 1.0}});
  CHECK(min_pairwise_distance(g) == doctest::Approx(1.0));
  Grid one = Grid::from_rows({{2.0}});
  CHECK(min_pairwise_distance(one) == std::numeric_limits<double>::infinity());
}

TEST_CASE("boundary faces: 2x2 product grid adjacency") {
  Grid g = Grid::from_rows({{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}});
  std::vector<Face> faces = boundary_faces(g);
  REQUIRE(faces.size() == 6);
  auto face = [&](std::size_t i, std::size_t j) -> const Face& {
    for (const Face& f : faces)
      if (f.i == i && f.j == j) return f;
    REQUIRE(false);
    return faces[0];
  };
  CHECK(face(0, 1).active);
  CHECK(face(0, 2).active);
  CHECK(face(1, 3).active);
  CHECK(face(2, 3).active);
  CHECK_FALSE(face(0, 3).active);  // diagonal neighbors meet in one point only
  CHECK_FALSE(face(1, 2).active);

  const Face& f01 = face(0, 1);
  CHECK(f01.normal[0] == doctest::Approx(0.0));
  CHECK(std::fabs(f01.normal[1]) == doctest::Approx(1.0));
  // The witness sits on the shared boundary: equidistant, nothing closer.
  double di = dist2(g.point(0), f01.witness.data(), 2);
  double dj = dist2(g.point(1), f01.witness.data(), 2);
  CHECK(std::fabs(di - dj) < 1e-9);
  CHECK(nearest_index(g, f01.witness.data()) == 0);
}

TEST_CASE("boundary faces: collinear generators hide the far pair") {
  Grid g = Grid::from_rows({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}});
  std::vector<Face> faces = boundary_faces(g);
  for (const Face& f : faces) {
    bool adjacent = (f.i == 0 && f.j == 1) || (f.i == 1 && f.j == 2);
    CHECK(f.active == adjacent);
  }
}

TEST_CASE("boundary faces in 1D mark exactly the sorted neighbors") {
  Grid g = Grid::from_rows({{0.9}, {0.1}, {0.5}});
  std::vector<Face> faces = boundary_faces(g);
  for (const Face& f : faces) {
    bool adjacent = (f.i == 0 && f.j == 2) || (f.i == 1 && f.j == 2);
    CHECK(f.active == adjacent);
  }
}

TEST_CASE("cell stats preconditions") {
  Dist d = uniform_box({0.0}, {1.0});
  Grid empty;
  CHECK_THROWS_AS(cell_stats(empty, d, Backend::exact1d()), Error);
  Dist d2 = uniform_box({0.0, 0.0}, {1.0, 1.0});
  Grid g2 = Grid::from_rows({{0.5, 0.5}});
  CHECK_THROWS_AS(cell_stats(g2, d2, Backend::exact1d()), Error);  // exact1d needs dim 1
  Dist emp = empirical({0.2, 0.4}, 1);
  Grid g1 = Grid::from_rows({{0.5}});
  CHECK_THROWS_AS(cell_stats(g1, emp, Backend::exact1d()), Error);  // empirical runs on mc only
  CellStats st = cell_stats(g1, emp, Backend::mc(1000, 1));
  CHECK(st.mass[0] == doctest::Approx(1.0));
}
