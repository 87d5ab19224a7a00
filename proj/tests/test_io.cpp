#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lloydcvt/errors.hpp"
#include "lloydcvt/io.hpp"
#include "lloydcvt/lloyd.hpp"

using namespace lloydcvt;

namespace {

const std::vector<double> kAwkward = {
    -0.0, 0.1, 1.0 / 3.0, 1e-17, 1e300, 123456789.123456789, 3.14159265358979323846, -2.5e-8};

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("grid json round-trips bitwise") {
  Grid g(1, kAwkward);
  std::string text = grid_to_json(g);
  CHECK(text == grid_to_json(g));  // deterministic serialization
  Grid back = grid_from_json_text(text);
  CHECK(back.dim == 1);
  REQUIRE(back.pts.size() == g.pts.size());
  for (std::size_t i = 0; i < g.pts.size(); ++i) {
    CHECK(back.pts[i] == g.pts[i]);
    CHECK(std::signbit(back.pts[i]) == std::signbit(g.pts[i]));  // -0.0 preserved
  }

  Grid g2 = Grid::from_rows({{0.25, -0.75}, {0.5, 2.0 / 3.0}});
  Grid b2 = grid_from_json_text(grid_to_json(g2));
  CHECK(b2.dim == 2);
  CHECK(b2.pts == g2.pts);
}

TEST_CASE("grid json file round-trip") {
  TempFile f("lloydcvt_io_test_grid.json");
  Grid g = Grid::from_rows({{0.1}, {0.9}});
  write_grid_json(g, f.path);
  Grid back = read_grid_json(f.path);
  CHECK(back.pts == g.pts);
}

TEST_CASE("grid json rejects malformed input") {
  CHECK_THROWS_AS(grid_from_json_text("{{{"), Error);
  CHECK_THROWS_AS(grid_from_json_text("[1,2]"), Error);
  CHECK_THROWS_AS(grid_from_json_text(R"({"dim": 1})"), Error);
  CHECK_THROWS_AS(grid_from_json_text(R"({"points": [[0.5]]})"), Error);
  CHECK_THROWS_AS(grid_from_json_text(R"({"dim": 0, "points": []})"), Error);
  CHECK_THROWS_AS(grid_from_json_text(R"({"dim": 2, "points": [[0.5]]})"), Error);
  try {
    grid_from_json_text(R"({"level": 3, "dim": 1, "points": [[0.5]]})");
    FAIL("expected a level mismatch error");
  } catch (const Error& e) {
    CHECK(e.code() == "io");
    CHECK(std::string(e.what()).find("level") != std::string::npos);
  }
  // level is optional
  Grid g = grid_from_json_text(R"({"dim": 1, "points": [[0.5], [0.75]]})");
  CHECK(g.pts == std::vector<double>{0.5, 0.75});
}

TEST_CASE("grid csv round-trips") {
  Grid g(2, kAwkward);  // 4 points in 2D
  TempFile f("lloydcvt_io_test_grid.csv");
  write_grid_csv(g, f.path);
  Grid back = read_grid_csv(f.path);
  CHECK(back.dim == 2);
  CHECK(back.pts == g.pts);
}

TEST_CASE("grid csv rejects bad rows") {
  TempFile f("lloydcvt_io_test_bad.csv");
  write_text_file(f.path, "0.5,0.5\n0.25\n");
  CHECK_THROWS_AS(read_grid_csv(f.path), Error);
  write_text_file(f.path, "0.5,abc\n");
  CHECK_THROWS_AS(read_grid_csv(f.path), Error);
  write_text_file(f.path, "");
  CHECK_THROWS_AS(read_grid_csv(f.path), Error);
}

TEST_CASE("trace csv has the fixed header and round-trip numbers") {
  Trace t;
  TraceRow a;
  a.k = 0;
  a.energy = 0.25;
  a.gap = 0.125;
  a.grad_norm = 1e-17;
  a.min_pair_dist = 0.1;
  a.max_disp = 0.5;
  a.radius = 2.0;
  a.pullbacks = 3;
  TraceRow b;
  b.k = 1;
  b.energy = 1.0 / 3.0;
  b.gap = 0.0;
  b.grad_norm = 0.0;
  b.min_pair_dist = 0.0;
  b.max_disp = 0.0;
  b.radius = 0.0;
  b.pullbacks = 0;
  t.rows = {a, b};

  std::string want =
      "k,energy,gap,grad_norm,min_pair_dist,max_disp,radius,pullbacks\n"
      "0,0.25,0.125,1e-17,0.1,0.5,2,3\n"
      "1,0.3333333333333333,0,0,0,0,0,0\n";
  CHECK(trace_to_csv(t) == want);

  TempFile f("lloydcvt_io_test_trace.csv");
  write_trace_csv(t, f.path);
  CHECK(read_text_file(f.path) == want);
}

TEST_CASE("text file helpers") {
  CHECK_THROWS_AS(read_text_file("definitely_missing_file_zzz.txt"), Error);
  TempFile f("lloydcvt_io_test_text.txt");
  std::string payload = "line1\nline2\n\x01\x02 binary-ish\n";
  write_text_file(f.path, payload);
  CHECK(read_text_file(f.path) == payload);
}
