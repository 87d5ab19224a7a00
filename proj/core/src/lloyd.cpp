#include "lloydcvt/lloyd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lloydcvt/distortion.hpp"
#include "lloydcvt/errors.hpp"
#include "lloydcvt/rng.hpp"

namespace lloydcvt {

const char* to_string(Status s) {
  switch (s) {
    case Status::converged_gap: return "converged_gap";
    case Status::converged_move: return "converged_move";
    case Status::max_iter: return "max_iter";
    case Status::degenerate_cell_seen: return "degenerate_cell_seen";
  }
  return "unknown";
}

namespace {

double grad_norm_from_stats(const Grid& g, const CellStats& st) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!st.centroid_defined[i]) continue;
    s += st.mass[i] * st.mass[i] * dist2(g.point(i), st.centroid_row(i), g.dim);
  }
  return 2.0 * std::sqrt(s);
}

double energy_se_from_stats(const CellStats& st) {
  if (st.second_moment_se.size() != st.n) return 0.0;  // exact backend: no SEs
  double s = 0.0;
  for (std::size_t i = 0; i < st.n; ++i) s += st.second_moment_se[i] * st.second_moment_se[i];
  return std::sqrt(s);
}

double max_radius_about(const Grid& g, const std::vector<double>& center) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    r2 = std::max(r2, dist2(g.point(i), center.data(), g.dim));
  return std::sqrt(r2);
}

double min_defined_mass(const CellStats& st) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < st.n; ++i)
    if (st.centroid_defined[i]) m = std::min(m, st.mass[i]);
  return std::isfinite(m) ? m : 0.0;
}

std::size_t dead_count(const CellStats& st) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < st.n; ++i)
    if (!st.centroid_defined[i]) ++c;
  return c;
}

void check_preconditions(const Grid& init, const Dist& d, const LloydConfig& cfg) {
  if (init.size() == 0) throw precondition_error("lloyd: empty initial grid");
  if (init.dim != d.dim) throw precondition_error("lloyd: grid/measure dimension mismatch");
  if (cfg.max_iter == 0) throw precondition_error("lloyd: max_iter must be >= 1");
  for (double v : init.pts)
    if (!std::isfinite(v)) throw precondition_error("lloyd: non-finite initial point");
  for (std::size_t i = 0; i < init.size(); ++i)
    for (std::size_t j = i + 1; j < init.size(); ++j)
      if (dist2(init.point(i), init.point(j), init.dim) == 0.0)
        throw precondition_error("lloyd: initial points must be pairwise distinct");
}

}  // namespace

StepResult lloyd_step(const Grid& g, const Dist& d, const Backend& backend) {
  StepResult out;
  out.stats = cell_stats(g, d, backend);
  out.next = g;
  out.dead_cells = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!out.stats.centroid_defined[i]) {
      ++out.dead_cells;  // empty cell keeps its generator
      continue;
    }
    const double* c = out.stats.centroid_row(i);
    std::copy(c, c + g.dim, out.next.pts.begin() + static_cast<std::ptrdiff_t>(i) * g.dim);
  }
  out.gap = energy_gap(g, out.stats);
  return out;
}

RunResult run(Grid init, const Dist& d, const Backend& backend, const LloydConfig& cfg) {
  check_preconditions(init, d, cfg);
  RunResult out;
  out.grid = std::move(init);
  Trace& tr = out.trace;
  tr.status = Status::max_iter;

  double tol_gap = cfg.tol_gap;
  for (std::size_t k = 0; k < cfg.max_iter; ++k) {
    StepResult step = lloyd_step(out.grid, d, backend);
    const CellStats& st = step.stats;
    double energy = st.energy();
    if (k == 0 && tol_gap < 0.0) tol_gap = 1e-12 * energy;  // resolved once, at the start

    double max_disp = 0.0;
    for (std::size_t i = 0; i < out.grid.size(); ++i)
      max_disp = std::max(max_disp,
                          std::sqrt(dist2(out.grid.point(i), step.next.point(i), out.grid.dim)));

    TraceRow row;
    row.k = k;
    row.energy = energy;
    row.gap = step.gap;
    row.grad_norm = grad_norm_from_stats(out.grid, st);
    row.min_pair_dist = min_pairwise_distance(out.grid);
    row.max_disp = max_disp;
    row.radius = max_radius_about(out.grid, d.mean);
    row.pullbacks = 0;
    row.min_cell_mass = min_defined_mass(st);
    row.dead_cells = dead_count(st);
    tr.rows.push_back(row);

    if (step.dead_cells > 0) tr.degenerate_seen = true;
    out.grid = std::move(step.next);

    if (step.gap < tol_gap) {
      tr.status = Status::converged_gap;
      break;
    }
    if (max_disp < cfg.tol_move) {
      tr.status = Status::converged_move;
      break;
    }
  }
  if (tr.degenerate_seen) tr.status = Status::degenerate_cell_seen;
  tr.tol_gap_used = tol_gap;

  CellStats fin = cell_stats(out.grid, d, backend);
  tr.final_energy = fin.energy();
  tr.final_energy_se = energy_se_from_stats(fin);
  tr.final_grad_norm = grad_norm_from_stats(out.grid, fin);
  return out;
}

RunResult run_bounded(Grid init, const Dist& d, const Backend& backend, const LloydConfig& cfg,
                      double R, PullbackRule rule) {
  check_preconditions(init, d, cfg);
  if (!(R > 0.0) || !std::isfinite(R)) throw precondition_error("run_bounded: R must be positive");
  const std::vector<double>& m = d.mean;
  for (std::size_t i = 0; i < init.size(); ++i)
    if (dist2(init.point(i), m.data(), init.dim) > R * R * (1.0 + 1e-12))
      throw precondition_error("run_bounded: initial grid must lie in the radius-R ball");

  RunResult out;
  out.grid = std::move(init);
  Trace& tr = out.trace;
  tr.status = Status::max_iter;
  int dim = out.grid.dim;

  double tol_gap = cfg.tol_gap;
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cfg.max_iter; ++k) {
    CellStats st = cell_stats(out.grid, d, backend);
    double energy = st.energy();
    if (k == 0 && tol_gap < 0.0) tol_gap = 1e-12 * energy;

    Grid next = out.grid;
    double gap = 0.0;
    std::size_t pullbacks = 0;
    std::size_t dead = 0;
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
      if (!st.centroid_defined[i]) {
        ++dead;
        continue;
      }
      const double* x = out.grid.point(i);
      const double* c = st.centroid_row(i);
      double* nx = next.pts.data() + static_cast<std::ptrdiff_t>(i) * dim;
      if (dist2(c, m.data(), dim) <= R * R) {
        std::copy(c, c + dim, nx);
      } else {
        ++pullbacks;
        if (rule == PullbackRule::freeze) {
          // keep nx == x
        } else {
          // Largest t in [0,1] with |x + t(c-x) - m| = R: the exit point of the
          // segment from the ball.  x is inside, c outside, so the positive root
          // of |u + t v|^2 = R^2 with u = x-m, v = c-x lies in (0,1].
          double uv = 0.0, vv = 0.0, uu = 0.0;
          for (int a = 0; a < dim; ++a) {
            double u = x[a] - m[a], v = c[a] - x[a];
            uv += u * v;
            vv += v * v;
            uu += u * u;
          }
          double disc = uv * uv - vv * (uu - R * R);
          if (disc < 0.0 || vv <= 0.0)
            throw numerical_error("run_bounded: pull-back discriminant is negative");
          double t = (-uv + std::sqrt(disc)) / vv;
          t = std::clamp(t, 0.0, 1.0);
          for (int a = 0; a < dim; ++a) nx[a] = x[a] + t * (c[a] - x[a]);
        }
      }
      double before = dist2(x, c, dim);
      double after = dist2(nx, c, dim);
      double delta = st.mass[i] * (before - after);
      if (delta < -1e-12 * (1.0 + energy))
        throw numerical_error("run_bounded: per-cell energy decrease is negative");
      if (after > 0.0) min_margin = std::min(min_margin, delta);  // pulled-back cell
      gap += delta;
    }
    tr.pullback_total += pullbacks;

    double max_disp = 0.0;
    for (std::size_t i = 0; i < out.grid.size(); ++i)
      max_disp =
          std::max(max_disp, std::sqrt(dist2(out.grid.point(i), next.point(i), dim)));

    TraceRow row;
    row.k = k;
    row.energy = energy;
    row.gap = gap;
    row.grad_norm = grad_norm_from_stats(out.grid, st);
    row.min_pair_dist = min_pairwise_distance(out.grid);
    row.max_disp = max_disp;
    row.radius = max_radius_about(out.grid, m);
    row.pullbacks = pullbacks;
    row.min_cell_mass = min_defined_mass(st);
    row.dead_cells = dead;
    tr.rows.push_back(row);

    if (dead > 0) tr.degenerate_seen = true;
    out.grid = std::move(next);

    if (gap < tol_gap) {
      tr.status = Status::converged_gap;
      break;
    }
    if (max_disp < cfg.tol_move) {
      tr.status = Status::converged_move;
      break;
    }
  }
  if (tr.degenerate_seen) tr.status = Status::degenerate_cell_seen;
  tr.tol_gap_used = tol_gap;
  tr.min_pullback_margin = tr.pullback_total > 0 ? min_margin : 0.0;

  CellStats fin = cell_stats(out.grid, d, backend);
  tr.final_energy = fin.energy();
  tr.final_energy_se = energy_se_from_stats(fin);
  tr.final_grad_norm = grad_norm_from_stats(out.grid, fin);
  return out;
}

SplitResult split_init(const Grid& prev, const Dist& d, const Backend& backend,
                       std::uint64_t seed, int max_draws) {
  if (prev.size() == 0) throw precondition_error("split_init: empty parent grid");
  if (prev.dim != d.dim) throw precondition_error("split_init: dimension mismatch");
  SplitResult out;
  out.prev_energy = distortion(prev, d, backend).value;

  // Stream keyed by the target level so ladder levels draw independently.
  RngStream rng(seed, streams::sub(streams::kSplit, prev.size() + 1));
  std::vector<double> cand(d.dim);
  for (int attempt = 0; attempt < max_draws; ++attempt) {
    bool tilted = split_point(d, rng, cand.data());
    out.tilt_fallback = out.tilt_fallback || !tilted;
    ++out.draws;
    bool dup = false;
    for (std::size_t i = 0; i < prev.size() && !dup; ++i)
      dup = dist2(prev.point(i), cand.data(), d.dim) == 0.0;
    if (dup) continue;
    Estimate gain = split_gain(prev, cand.data(), d, backend);
    bool certified = backend.kind == Backend::Kind::exact1d
                         ? gain.value > 0.0
                         : gain.value > 4.0 * gain.std_err && gain.value > 0.0;
    if (!certified) continue;
    out.grid = prev;
    out.grid.pts.insert(out.grid.pts.end(), cand.begin(), cand.end());
    out.init_energy = distortion(out.grid, d, backend).value;
    return out;
  }
  throw seeding_error("split_init: no candidate certified a strict energy decrease after " +
                      std::to_string(max_draws) + " draws");
}

LadderResult ladder(const Dist& d, std::size_t Nmax, const Backend& backend,
                    const LloydConfig& cfg, std::uint64_t seed) {
  if (Nmax == 0) throw precondition_error("ladder: Nmax must be >= 1");
  if (d.kind == DistKind::empirical && d.point_count() <= Nmax)
    throw precondition_error("ladder: Nmax must stay below the support cardinality");
  LadderResult out;

  Grid one;
  one.dim = d.dim;
  one.pts = d.mean;
  LadderLevel l1;
  l1.N = 1;
  l1.result = run(std::move(one), d, backend, cfg);
  out.levels.push_back(std::move(l1));

  for (std::size_t N = 2; N <= Nmax; ++N) {
    LadderLevel lvl;
    lvl.N = N;
    lvl.split = split_init(out.levels.back().result.grid, d, backend, seed);
    lvl.result = run(lvl.split.grid, d, backend, cfg);
    if (backend.kind == Backend::Kind::exact1d) {
      double prev = out.levels.back().result.trace.final_energy;
      if (!(lvl.result.trace.final_energy < prev))
        throw numerical_error("ladder: level " + std::to_string(N) +
                              " failed to strictly decrease the distortion");
    }
    out.levels.push_back(std::move(lvl));
  }
  return out;
}

double displacement_sum_slack(const Trace& tr) {
  if (tr.rows.empty()) return std::numeric_limits<double>::infinity();
  double m_star = std::numeric_limits<double>::infinity();
  double disp2 = 0.0;
  for (const TraceRow& r : tr.rows) {
    m_star = std::min(m_star, r.min_cell_mass);
    disp2 += r.max_disp * r.max_disp;
  }
  if (!(m_star > 0.0)) return std::numeric_limits<double>::infinity();
  return tr.rows.front().energy / m_star - disp2;
}

}  // namespace lloydcvt
