#include "lloydcvt/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lloydcvt/errors.hpp"
#include "lloydcvt/lloyd.hpp"
#include "lloydcvt/rng.hpp"

namespace lloydcvt {

Estimate distortion(const Grid& g, const Dist& d, const Backend& backend) {
  if (g.size() == 0) throw precondition_error("distortion: empty grid");
  if (backend.kind == Backend::Kind::exact1d) {
    CellStats st = cell_stats(g, d, backend);
    return {st.energy(), 0.0};
  }
  if (!d.draw) throw backend_error("mc backend requires a sampler");
  if (backend.samples == 0) throw backend_error("mc backend requires samples > 0");
  RngStream rng(backend.seed, streams::kCellStats);
  std::vector<double> buf(d.dim);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t s = 0; s < backend.samples; ++s) {
    d.draw(rng, buf.data());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i)
      best = std::min(best, dist2(g.point(i), buf.data(), g.dim));
    sum += best;
    sum2 += best * best;
  }
  double n = static_cast<double>(backend.samples);
  double mean = sum / n;
  double var = std::max(0.0, sum2 / n - mean * mean);
  return {mean, std::sqrt(var / std::max(1.0, n - 1.0))};
}

std::vector<double> gradient(const Grid& g, const Dist& d, const Backend& backend,
                             std::vector<double>* std_err) {
  std::size_t n = g.size();
  int dim = g.dim;
  CellStats st = cell_stats(g, d, backend);
  std::vector<double> grad(n * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!st.centroid_defined[i]) continue;  // empty cell: zero derivative
    for (int k = 0; k < dim; ++k)
      grad[i * dim + k] = 2.0 * st.mass[i] * (g.point(i)[k] - st.centroid_row(i)[k]);
  }

  if (std_err) {
    std_err->assign(n * dim, 0.0);
    if (backend.kind == Backend::Kind::mc) {
      // Dedicated pass: per-component sample variance of the integrand
      // 2*(x_i - xi)*1{C_i}.
      RngStream rng(backend.seed, streams::kCellStats);
      std::vector<double> buf(dim);
      std::vector<double> s1(n * dim, 0.0), s2(n * dim, 0.0);
      for (std::size_t s = 0; s < backend.samples; ++s) {
        d.draw(rng, buf.data());
        std::size_t i = nearest_index(g, buf.data());
        for (int k = 0; k < dim; ++k) {
          double y = 2.0 * (g.point(i)[k] - buf[k]);
          s1[i * dim + k] += y;
          s2[i * dim + k] += y * y;
        }
      }
      double N = static_cast<double>(backend.samples);
      for (std::size_t t = 0; t < n * static_cast<std::size_t>(dim); ++t) {
        double mean = s1[t] / N;
        double var = std::max(0.0, s2[t] / N - mean * mean);
        (*std_err)[t] = std::sqrt(var / std::max(1.0, N - 1.0));
      }
    }
  }
  return grad;
}

double energy_gap(const Grid& g, const CellStats& st) {
  double gap = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!st.centroid_defined[i]) continue;
    gap += st.mass[i] * dist2(g.point(i), st.centroid_row(i), g.dim);
  }
  return gap;
}

Estimate split_gain(const Grid& prev, const double* candidate, const Dist& d,
                    const Backend& backend) {
  if (backend.kind == Backend::Kind::exact1d) {
    Grid next = prev;
    next.pts.insert(next.pts.end(), candidate, candidate + prev.dim);
    double before = distortion(prev, d, backend).value;
    double after = distortion(next, d, backend).value;
    return {before - after, 0.0};
  }
  if (!d.draw) throw backend_error("mc backend requires a sampler");
  RngStream rng(backend.seed, streams::kCellStats);
  std::vector<double> buf(d.dim);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t s = 0; s < backend.samples; ++s) {
    d.draw(rng, buf.data());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prev.size(); ++i)
      best = std::min(best, dist2(prev.point(i), buf.data(), prev.dim));
    double cand = dist2(candidate, buf.data(), prev.dim);
    double gain = cand < best ? best - cand : 0.0;  // paired, nonnegative per sample
    sum += gain;
    sum2 += gain * gain;
  }
  double n = static_cast<double>(backend.samples);
  double mean = sum / n;
  double var = std::max(0.0, sum2 / n - mean * mean);
  return {mean, std::sqrt(var / std::max(1.0, n - 1.0))};
}

OptimalErrorEstimate estimate_optimal_error(const Dist& d, std::size_t N,
                                            const Backend& backend, int restarts,
                                            std::uint64_t seed) {
  if (N == 0) throw precondition_error("estimate_optimal_error: N must be >= 1");
  if (restarts < 1) throw precondition_error("estimate_optimal_error: restarts must be >= 1");
  if (d.kind == DistKind::empirical && d.point_count() <= N)
    throw precondition_error(
        "estimate_optimal_error: level must stay below the support cardinality");

  LloydConfig cfg;  // library defaults
  OptimalErrorEstimate best;
  best.e = std::numeric_limits<double>::infinity();
  std::vector<double> cand(d.dim);

  for (int r = 0; r < restarts; ++r) {
    RngStream rng(seed, streams::sub(streams::kInit, static_cast<std::uint64_t>(r)));
    Grid init;
    init.dim = d.dim;
    int guard = 0;
    while (init.size() < N) {
      split_point(d, rng, cand.data());
      bool dup = false;
      for (std::size_t i = 0; i < init.size() && !dup; ++i)
        dup = dist2(init.point(i), cand.data(), d.dim) == 0.0;
      if (dup) {
        if (++guard > 64 * static_cast<int>(N))
          throw seeding_error("estimate_optimal_error: cannot draw distinct start points");
        continue;
      }
      init.pts.insert(init.pts.end(), cand.begin(), cand.end());
    }
    RunResult rr = run(std::move(init), d, backend, cfg);
    double e = std::sqrt(std::max(0.0, rr.trace.final_energy));
    best.restart_errors.push_back(e);
    if (rr.trace.final_energy < best.e * best.e || !std::isfinite(best.e)) {
      best.e = e;
      best.grid = std::move(rr.grid);
      double E = rr.trace.final_energy;
      best.std_err = E > 0.0 ? rr.trace.final_energy_se / (2.0 * std::sqrt(E)) : 0.0;
    }
  }
  return best;
}

}  // namespace lloydcvt
