#include "lloydcvt/radius.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "lloydcvt/errors.hpp"
#include "lloydcvt/rng.hpp"

namespace lloydcvt {

namespace {

// Radial push-forward of the measure about its mean: ball probabilities and
// quantiles of |X - m|.  Exact for 1D analytic models and empirical data;
// multi-d analytic models use a fixed-seed sample proxy so the solver is
// deterministic per seed.
struct RadialProfile {
  std::function<double(double)> prob_within;
  std::function<double(double)> quantile;
};

RadialProfile make_profile(const Dist& d, std::uint64_t seed) {
  RadialProfile p;
  if (d.kind == DistKind::analytic1d) {
    double m = d.mean[0];
    auto s0 = d.s0;
    p.prob_within = [m, s0](double r) { return r <= 0.0 ? 0.0 : s0(m - r, m + r); };
    double scale = (!d.scale.empty() && d.scale[0] > 0.0) ? d.scale[0] : 1.0;
    auto pw = p.prob_within;
    p.quantile = [pw, scale](double q) {
      double hi = scale;
      int guard = 0;
      while (pw(hi) < q && guard++ < 2048) hi *= 2.0;
      double lo = 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (pw(mid) >= q ? hi : lo) = mid;
      }
      return hi;
    };
    return p;
  }

  // Sorted (radius, cumulative weight) table: exact for empirical, sampled
  // proxy otherwise.
  std::vector<std::pair<double, double>> rw;
  if (d.kind == DistKind::empirical) {
    std::size_t n = d.point_count();
    rw.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = dist2(d.points.data() + i * d.dim, d.mean.data(), d.dim);
      rw.emplace_back(std::sqrt(r2), d.weights[i]);
    }
  } else {
    std::size_t n = std::size_t{1} << 17;
    RngStream rng(seed, streams::kRadial);
    std::vector<double> buf(d.dim);
    rw.reserve(n);
    double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      d.draw(rng, buf.data());
      rw.emplace_back(std::sqrt(dist2(buf.data(), d.mean.data(), d.dim)), w);
    }
  }
  std::sort(rw.begin(), rw.end());
  auto radii = std::make_shared<std::vector<double>>();
  auto cumw = std::make_shared<std::vector<double>>();
  radii->reserve(rw.size());
  cumw->reserve(rw.size());
  double acc = 0.0;
  for (auto& [r, w] : rw) {
    acc += w;
    radii->push_back(r);
    cumw->push_back(acc);
  }
  cumw->back() = 1.0;
  p.prob_within = [radii, cumw](double r) {
    auto it = std::upper_bound(radii->begin(), radii->end(), r);
    if (it == radii->begin()) return 0.0;
    return (*cumw)[static_cast<std::size_t>(it - radii->begin()) - 1];
  };
  p.quantile = [radii, cumw](double q) {
    auto it = std::lower_bound(cumw->begin(), cumw->end(), q);
    if (it == cumw->end()) return radii->back();
    return (*radii)[static_cast<std::size_t>(it - cumw->begin())];
  };
  return p;
}

struct Feasibility {
  bool ok = false;
  double slack_core = -std::numeric_limits<double>::infinity();
  double slack_tail = 0.0;
  double r_best = 0.0;
  double tail = 0.0;
};

Feasibility evaluate(const Dist& d, const RadialProfile& p, const std::vector<double>& r_list,
                     double R, double c, double e_prev, std::uint64_t seed) {
  Feasibility f;
  f.tail = tail_second_moment(d, R, nullptr, std::size_t{1} << 17, seed);
  f.slack_tail = (e_prev * e_prev - c * c) - 4.0 * f.tail;
  for (double r : r_list) {
    if (!(r < R / 5.0)) continue;
    double s = (R / 5.0 - r) * (R / 5.0 - r) * p.prob_within(r) - c;
    if (s > f.slack_core) {
      f.slack_core = s;
      f.r_best = r;
    }
  }
  f.ok = f.slack_core > 0.0 && f.slack_tail > 0.0;
  return f;
}

}  // namespace

RadiusBound solve_radius(const Dist& d, double c, double e_prev, std::uint64_t seed) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw precondition_error("solve_radius: c must be positive and finite");
  if (!(e_prev >= c) || !std::isfinite(e_prev))
    throw precondition_error("solve_radius: need 0 < c <= e_prev");

  RadialProfile prof = make_profile(d, seed);

  // Candidate inner radii: low-to-median quantiles of |X - m|.  Both
  // conditions are monotone in R for fixed r, so a geometric R sweep with
  // bisection refinement finds the smallest feasible R on the grid.
  std::vector<double> r_list;
  for (int i = 0; i < 32; ++i) {
    double q = 0.01 + (0.50 - 0.01) * static_cast<double>(i) / 31.0;
    double r = prof.quantile(q);
    if (r > 0.0 && (r_list.empty() || r > r_list.back())) r_list.push_back(r);
  }
  if (r_list.empty())
    throw infeasible_error(
        "solve_radius: no positive radius captures probability mass near the mean");
  double r_min = r_list.front();

  const int kSteps = 64;
  double R_lo = 5.0 * r_min;
  double ratio = std::pow(1000.0, 1.0 / (kSteps - 1));
  double R_prev = 0.0;
  double R_found = -1.0;
  for (int j = 0; j < kSteps; ++j) {
    double R = R_lo * std::pow(ratio, j);
    Feasibility f = evaluate(d, prof, r_list, R, c, e_prev, seed);
    if (f.ok) {
      R_found = R;
      break;
    }
    R_prev = R;
  }
  if (R_found < 0.0) {
    double R_top = R_lo * std::pow(ratio, kSteps - 1);
    Feasibility f = evaluate(d, prof, r_list, R_top, c, e_prev, seed);
    std::string which;
    if (!(f.slack_core > 0.0)) which = "core mass condition";
    if (!(f.slack_tail > 0.0)) which += which.empty() ? "tail condition" : " and tail condition";
    throw infeasible_error("solve_radius: " + which + " cannot be satisfied up to R = " +
                           std::to_string(R_top));
  }

  double lo = R_prev, hi = R_found;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    Feasibility f = evaluate(d, prof, r_list, mid, c, e_prev, seed);
    (f.ok ? hi : lo) = mid;
  }

  Feasibility f = evaluate(d, prof, r_list, hi, c, e_prev, seed);
  if (!f.ok) throw numerical_error("solve_radius: refined radius failed re-validation");
  RadiusBound out;
  out.R = hi;
  out.r_witness = f.r_best;
  out.c = c;
  out.e_prev = e_prev;
  out.slack_core = f.slack_core;
  out.slack_tail = f.slack_tail;
  out.tail_vacuous = f.tail == 0.0;
  return out;
}

double gaussian_radius_asymptote(int d) {
  if (d < 1) throw precondition_error("gaussian_radius_asymptote: dimension must be >= 1");
  return std::sqrt(0.5) * std::sqrt(1.0 + 2.0 / static_cast<double>(d));
}

double measured_radius(const Grid& g, const std::vector<double>& center) {
  if (center.size() != static_cast<std::size_t>(g.dim))
    throw precondition_error("measured_radius: center dimension mismatch");
  double r2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    r2 = std::max(r2, dist2(g.point(i), center.data(), g.dim));
  return std::sqrt(r2);
}

}  // namespace lloydcvt
