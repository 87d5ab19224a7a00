#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "lloydcvt/measure.hpp"

namespace lloydcvt {

// A grid of N generators in R^d, row-major. Indexing is the consistent
// representation: point i keeps its slot across Lloyd iterations.
struct Grid {
  int dim = 1;
  std::vector<double> pts;

  Grid() = default;
  Grid(int d, std::vector<double> flat) : dim(d), pts(std::move(flat)) {}

  static Grid from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const {
    return dim > 0 ? pts.size() / static_cast<std::size_t>(dim) : 0;
  }
  double* point(std::size_t i) { return pts.data() + i * static_cast<std::size_t>(dim); }
  const double* point(std::size_t i) const {
    return pts.data() + i * static_cast<std::size_t>(dim);
  }
};

inline double dist2(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// Lowest index wins ties, which fixes a deterministic owner for points on
// median hyperplanes (they carry no mass for strongly continuous input).
std::size_t nearest_index(const Grid& g, const double* xi);

struct Backend {
  enum class Kind { exact1d, mc };
  Kind kind = Kind::exact1d;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  static Backend exact1d() { return Backend{}; }
  static Backend mc(std::size_t n, std::uint64_t seed) {
    return Backend{Kind::mc, n, seed};
  }
};

// Per-cell mass, centroid and second moment about the generator:
//   second_moment[i] = integral over C_i of |xi - x_i|^2 dmu.
// Empty cells keep centroid_defined[i] == 0 and NaN centroid rows;
// consumers must branch (the degeneracy convention lives in lloyd, not
// here). Standard-error vectors are empty for the exact backend. Monte
// Carlo centroid_se entries are NaN when a cell holds fewer than two
// samples.
struct CellStats {
  std::size_t n = 0;
  int dim = 1;
  std::vector<double> mass;
  std::vector<double> centroid;
  std::vector<std::uint8_t> centroid_defined;
  std::vector<double> second_moment;
  std::vector<double> mass_se;
  std::vector<double> centroid_se;
  std::vector<double> second_moment_se;
  std::size_t mc_samples = 0;

  double energy() const;
  const double* centroid_row(std::size_t i) const {
    return centroid.data() + i * static_cast<std::size_t>(dim);
  }
};

// exact1d requires dim == 1 and a 1D analytic model; mc requires a sampler.
CellStats cell_stats(const Grid& g, const Dist& d, const Backend& backend);

double min_pairwise_distance(const Grid& g);

// Median hyperplane between generators i < j. `active` reports whether the
// shared boundary of the two cells was hit by any probe; probing happens on
// the hyperplane inside an inflated bounding box of the grid and is
// deterministic. `witness` holds one probe point on the shared boundary
// when active.
struct Face {
  std::size_t i = 0, j = 0;
  std::vector<double> anchor;
  std::vector<double> normal;  // (x_j - x_i)/|x_j - x_i|
  bool active = false;
  std::vector<double> witness;
};

std::vector<Face> boundary_faces(const Grid& g, std::size_t probes = 128);

}  // namespace lloydcvt
