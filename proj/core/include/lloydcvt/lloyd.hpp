#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lloydcvt/distortion.hpp"
#include "lloydcvt/measure.hpp"
#include "lloydcvt/voronoi.hpp"

namespace lloydcvt {

struct LloydConfig {
  // tol_gap < 0 means "relative default": 1e-12 * energy of the initial
  // grid, resolved at run start.
  double tol_gap = -1.0;
  double tol_move = 1e-9;
  std::size_t max_iter = 10000;
};

enum class Status { converged_gap, converged_move, max_iter, degenerate_cell_seen };

const char* to_string(Status s);

// One row per iteration. energy/grad_norm/min_pair_dist/radius describe
// the grid BEFORE the step; gap/max_disp/pullbacks describe the step
// taken from it. min_cell_mass and dead_cells feed the a-posteriori
// displacement-sum diagnostic and the degeneracy flag.
struct TraceRow {
  std::size_t k = 0;
  double energy = 0.0;
  double gap = 0.0;
  double grad_norm = 0.0;
  double min_pair_dist = 0.0;
  double max_disp = 0.0;
  double radius = 0.0;
  std::size_t pullbacks = 0;
  double min_cell_mass = 0.0;
  std::size_t dead_cells = 0;
};

struct Trace {
  std::vector<TraceRow> rows;
  Status status = Status::max_iter;
  bool degenerate_seen = false;
  double tol_gap_used = 0.0;
  double final_energy = 0.0;
  double final_energy_se = 0.0;
  double final_grad_norm = 0.0;
  std::size_t pullback_total = 0;
  // Smallest per-cell descent term M_j(|x_j - c_j|^2 - |x'_j - c_j|^2)
  // observed across all pull-backs; >= 0 certifies that every pull-back
  // kept the step energy-descending. 0 when no pull-back happened.
  double min_pullback_margin = 0.0;
};

struct StepResult {
  Grid next;
  CellStats stats;  // stats of the input grid
  double gap = 0.0;
  std::size_t dead_cells = 0;
};

// One batch step: centroid update with the degeneracy convention (an
// empty cell keeps its generator), then implicit re-allocation at the
// next evaluation.
StepResult lloyd_step(const Grid& g, const Dist& d, const Backend& backend);

struct RunResult {
  Grid grid;
  Trace trace;
};

// Fixed-point iteration with the dual stopping rule: stop when the
// energy gap falls below tol_gap or the max displacement falls below
// tol_move, whichever first; max_iter is a status, not an error.
RunResult run(Grid init, const Dist& d, const Backend& backend, const LloydConfig& cfg);

enum class PullbackRule { segment, freeze };

// Ball-constrained variant on B(mean, R): an out-of-ball centroid is
// pulled back to the sphere along the segment [x_j, centroid] (exit
// intersection), or frozen at x_j under PullbackRule::freeze. Requires
// the initial grid inside the closed ball.
RunResult run_bounded(Grid init, const Dist& d, const Backend& backend,
                      const LloydConfig& cfg, double R,
                      PullbackRule rule = PullbackRule::segment);

struct SplitResult {
  Grid grid;            // prev with the drawn point appended (index N-1)
  double prev_energy = 0.0;
  double init_energy = 0.0;
  int draws = 0;        // tilted draws consumed
  bool tilt_fallback = false;
};

// Splitting initialization: append one support point drawn from the
// tilted law to the previous-level grid, certifying a strict distortion
// decrease (paired comparison on mc). Redraws on duplicates or
// uncertifiable gain, up to max_draws, then throws a seeding error.
SplitResult split_init(const Grid& prev, const Dist& d, const Backend& backend,
                       std::uint64_t seed, int max_draws = 64);

struct LadderLevel {
  std::size_t N = 0;
  SplitResult split;   // split.draws == 0 at level 1 (grid is {mean})
  RunResult result;
};

struct LadderResult {
  std::vector<LadderLevel> levels;
  const LadderLevel& level(std::size_t N) const { return levels.at(N - 1); }
};

// Splitting ladder from level 1 ({mean}) to Nmax. Per-level final
// energies are strictly decreasing on the exact backend (checked; a
// violation is a numerical error).
LadderResult ladder(const Dist& d, std::size_t Nmax, const Backend& backend,
                    const LloydConfig& cfg, std::uint64_t seed);

// A-posteriori check of the displacement-sum bound along a trace:
//   sum_k max_disp(k)^2 <= energy(0) / m*,  m* = min over rows of
// min_cell_mass. Returns the slack (bound minus sum); nonnegative when
// the bound holds.
double displacement_sum_slack(const Trace& t);

}  // namespace lloydcvt
