#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lloydcvt/measure.hpp"
#include "lloydcvt/voronoi.hpp"

namespace lloydcvt {

struct Estimate {
  double value = 0.0;
  double std_err = 0.0;  // 0 for exact backends
};

// Distortion G(x) = E min_i |X - x_i|^2. The Monte Carlo path estimates it
// in one pass with its own standard error (same stream as cell_stats for a
// given seed, so stats-derived identities hold on the same sample set).
Estimate distortion(const Grid& g, const Dist& d, const Backend& backend);

// Gradient dG/dx_i = 2 * integral over C_i of (x_i - xi) dmu
//                  = 2 * M_i * (x_i - c_i),   row-major N x d.
// Empty cells contribute zero rows (the true one-sided derivative).
// std_err, when requested on the mc backend, receives per-component
// standard errors.
std::vector<double> gradient(const Grid& g, const Dist& d, const Backend& backend,
                             std::vector<double>* std_err = nullptr);

// Energy gap of one centroid phase from already-computed stats of `g`:
//   sum_j M_j |x_j - c_j|^2.
// Equals the distortion drop G(grid) - sum_j integral over C_j of
// |xi - c_j|^2, and bounds the squared grid displacement from below by
// min_j M_j.
double energy_gap(const Grid& g, const CellStats& stats);

struct OptimalErrorEstimate {
  double e = 0.0;        // estimated optimal error (not squared)
  double std_err = 0.0;  // from the winning run's final distortion estimate
  Grid grid;
  std::vector<double> restart_errors;  // final error per restart
};

// Multistart upper-bound estimate of the optimal error at level N:
// `restarts` Lloyd runs from randomized full-size initializations (drawn
// from the splitting law, duplicates redrawn), best final grid wins.
// Nonincreasing in N on a fixed seed schedule up to solver tolerance.
OptimalErrorEstimate estimate_optimal_error(const Dist& d, std::size_t N,
                                            const Backend& backend, int restarts,
                                            std::uint64_t seed);

// Paired estimate of G(prev) - G(prev + {candidate}) on a common sample
// set (exact on the exact backend). Used to certify strict splitting
// decrease without Monte Carlo noise masking the sign.
Estimate split_gain(const Grid& prev, const double* candidate, const Dist& d,
                    const Backend& backend);

}  // namespace lloydcvt
