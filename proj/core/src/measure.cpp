#include "lloydcvt/measure.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "lloydcvt/errors.hpp"
#include "lloydcvt/numerics.hpp"

namespace lloydcvt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double phi_safe(double z) { return std::isfinite(z) ? norm_pdf(z) : 0.0; }
double zphi_safe(double z) { return std::isfinite(z) ? z * norm_pdf(z) : 0.0; }

double cdf_safe(double z) {
  if (z == kInf) return 1.0;
  if (z == -kInf) return 0.0;
  return norm_cdf(z);
}

}  // namespace

bool Support::contains(const double* p, int dim) const {
  switch (shape) {
    case Shape::all_space:
      return true;
    case Shape::interval:
    case Shape::box:
      for (int k = 0; k < dim; ++k)
        if (p[k] < lo[k] || p[k] > hi[k]) return false;
      return true;
    case Shape::ball: {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) {
        double t = p[k] - center[k];
        s += t * t;
      }
      return s <= radius * radius;
    }
  }
  return false;
}

bool Support::bounded(int dim) const {
  switch (shape) {
    case Shape::all_space:
      return false;
    case Shape::ball:
      return std::isfinite(radius);
    case Shape::interval:
    case Shape::box:
      for (int k = 0; k < dim; ++k)
        if (!std::isfinite(lo[k]) || !std::isfinite(hi[k])) return false;
      return true;
  }
  return false;
}

Dist uniform_box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.empty() || lo.size() != hi.size())
    throw config_error("uniform_box: lo/hi must be nonempty and equally sized");
  int dim = static_cast<int>(lo.size());
  for (int k = 0; k < dim; ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]) || !(lo[k] < hi[k]))
      throw config_error("uniform_box: requires finite lo < hi per coordinate");
  }

  Dist d;
  d.kind = dim == 1 ? DistKind::analytic1d : DistKind::analytic_nd;
  d.dim = dim;
  d.family = "uniform";
  d.mean.resize(dim);
  d.scale.resize(dim);
  double vol = 1.0;
  for (int k = 0; k < dim; ++k) {
    d.mean[k] = 0.5 * (lo[k] + hi[k]);
    d.scale[k] = (hi[k] - lo[k]) / std::sqrt(12.0);
    vol *= hi[k] - lo[k];
  }
  d.support.shape = dim == 1 ? Support::Shape::interval : Support::Shape::box;
  d.support.lo = lo;
  d.support.hi = hi;

  double inv_vol = 1.0 / vol;
  d.density = [lo, hi, dim, inv_vol](const double* p) {
    for (int k = 0; k < dim; ++k)
      if (p[k] < lo[k] || p[k] > hi[k]) return 0.0;
    return inv_vol;
  };
  d.draw = [lo, hi, dim](RngStream& rng, double* out) {
    for (int k = 0; k < dim; ++k) out[k] = lo[k] + rng.uniform01() * (hi[k] - lo[k]);
  };
  d.draw_tilted = d.draw;  // uniform is invariant under tilting

  if (dim == 1) {
    double A = lo[0], B = hi[0], L = B - A;
    d.cdf = [A, B, L](double x) {
      if (x <= A) return 0.0;
      if (x >= B) return 1.0;
      return (x - A) / L;
    };
    d.s0 = [A, B, L](double a, double b) {
      double l = std::max(a, A), h = std::min(b, B);
      return h > l ? (h - l) / L : 0.0;
    };
    d.s1 = [A, B, L](double a, double b) {
      double l = std::max(a, A), h = std::min(b, B);
      return h > l ? (h * h - l * l) / (2.0 * L) : 0.0;
    };
    d.s2 = [A, B, L](double a, double b) {
      double l = std::max(a, A), h = std::min(b, B);
      return h > l ? (h * h * h - l * l * l) / (3.0 * L) : 0.0;
    };
  }
  return d;
}

Dist gaussian(std::vector<double> mean, std::vector<double> sigma) {
  if (mean.empty() || mean.size() != sigma.size())
    throw config_error("gaussian: mean/sigma must be nonempty and equally sized");
  int dim = static_cast<int>(mean.size());
  for (int k = 0; k < dim; ++k)
    if (!std::isfinite(mean[k]) || !(sigma[k] > 0.0) || !std::isfinite(sigma[k]))
      throw config_error("gaussian: requires finite mean and sigma > 0");

  Dist d;
  d.kind = dim == 1 ? DistKind::analytic1d : DistKind::analytic_nd;
  d.dim = dim;
  d.family = "gaussian";
  d.mean = mean;
  d.scale = sigma;
  d.support.shape = Support::Shape::all_space;

  d.density = [mean, sigma, dim](const double* p) {
    double v = 1.0;
    for (int k = 0; k < dim; ++k) v *= norm_pdf((p[k] - mean[k]) / sigma[k]) / sigma[k];
    return v;
  };
  d.draw = [mean, sigma, dim](RngStream& rng, double* out) {
    for (int k = 0; k < dim; ++k) out[k] = mean[k] + sigma[k] * rng.normal();
  };
  // Tilted law rho^{d/(d+2)} of a Gaussian is the Gaussian with variance
  // scaled by (d+2)/d.
  double tilt = std::sqrt((dim + 2.0) / dim);
  d.draw_tilted = [mean, sigma, dim, tilt](RngStream& rng, double* out) {
    for (int k = 0; k < dim; ++k) out[k] = mean[k] + tilt * sigma[k] * rng.normal();
  };

  if (dim == 1) {
    double m = mean[0], s = sigma[0];
    d.cdf = [m, s](double x) { return cdf_safe((x - m) / s); };
    auto std_of = [m, s](double x) {
      if (x == kInf) return kInf;
      if (x == -kInf) return -kInf;
      return (x - m) / s;
    };
    d.s0 = [std_of](double a, double b) { return cdf_safe(std_of(b)) - cdf_safe(std_of(a)); };
    d.s1 = [m, s, std_of](double a, double b) {
      double al = std_of(a), be = std_of(b);
      double s0 = cdf_safe(be) - cdf_safe(al);
      return m * s0 + s * (phi_safe(al) - phi_safe(be));
    };
    d.s2 = [m, s, std_of](double a, double b) {
      double al = std_of(a), be = std_of(b);
      double s0 = cdf_safe(be) - cdf_safe(al);
      double dphi = phi_safe(al) - phi_safe(be);
      double z2 = s0 + zphi_safe(al) - zphi_safe(be);
      return m * m * s0 + 2.0 * m * s * dphi + s * s * z2;
    };
  }
  return d;
}

Dist exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw config_error("exponential: requires rate > 0");

  Dist d;
  d.kind = DistKind::analytic1d;
  d.dim = 1;
  d.family = "exponential";
  d.mean = {1.0 / rate};
  d.scale = {1.0 / rate};
  d.support.shape = Support::Shape::interval;
  d.support.lo = {0.0};
  d.support.hi = {kInf};

  double lam = rate;
  d.density = [lam](const double* p) { return p[0] < 0.0 ? 0.0 : lam * std::exp(-lam * p[0]); };
  d.cdf = [lam](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-lam * x); };
  d.draw = [lam](RngStream& rng, double* out) { out[0] = rng.exponential(lam); };
  // rho^{1/3} in d = 1 is exponential again, with a third of the rate.
  double lam_t = lam / 3.0;
  d.draw_tilted = [lam_t](RngStream& rng, double* out) { out[0] = rng.exponential(lam_t); };

  auto E = [lam](double x) { return x == kInf ? 0.0 : std::exp(-lam * x); };
  d.s0 = [lam, E](double a, double b) {
    double l = std::max(a, 0.0), h = b;
    return h > l ? E(l) - E(h) : 0.0;
  };
  d.s1 = [lam, E](double a, double b) {
    double l = std::max(a, 0.0), h = b;
    if (!(h > l)) return 0.0;
    auto F = [lam, &E](double x) { return x == kInf ? 0.0 : (x + 1.0 / lam) * E(x); };
    return F(l) - F(h);
  };
  d.s2 = [lam, E](double a, double b) {
    double l = std::max(a, 0.0), h = b;
    if (!(h > l)) return 0.0;
    auto F = [lam, &E](double x) {
      return x == kInf ? 0.0 : (x * x + 2.0 * x / lam + 2.0 / (lam * lam)) * E(x);
    };
    return F(l) - F(h);
  };
  return d;
}

Dist analytic1d(std::string family, std::function<double(double)> density,
                std::function<double(double)> cdf, double a, double b, double mean,
                double scale, std::function<double(double, double)> s1,
                std::function<double(double, double)> s2) {
  if (!density || !cdf) throw config_error("analytic1d: density and cdf are required");
  if (!(a < b)) throw config_error("analytic1d: requires a < b");
  if (!(scale > 0.0)) throw config_error("analytic1d: requires scale > 0");

  Dist d;
  d.kind = DistKind::analytic1d;
  d.dim = 1;
  d.family = std::move(family);
  d.mean = {mean};
  d.scale = {scale};
  d.support.shape = Support::Shape::interval;
  d.support.lo = {a};
  d.support.hi = {b};
  d.density = [density](const double* p) { return density(p[0]); };
  d.cdf = cdf;
  d.s0 = [cdf](double lo, double hi) {
    double c_hi = hi == kInf ? 1.0 : (hi == -kInf ? 0.0 : cdf(hi));
    double c_lo = lo == kInf ? 1.0 : (lo == -kInf ? 0.0 : cdf(lo));
    return std::max(0.0, c_hi - c_lo);
  };

  // Quadrature truncates infinite endpoints where the mass is negligible.
  double cut_lo = std::isfinite(a) ? a : mean - 60.0 * scale;
  double cut_hi = std::isfinite(b) ? b : mean + 60.0 * scale;
  if (s1) {
    d.s1 = std::move(s1);
  } else {
    d.s1 = [density, cut_lo, cut_hi](double lo, double hi) {
      double l = std::max(lo, cut_lo), h = std::min(hi, cut_hi);
      if (!(h > l)) return 0.0;
      return integrate([&](double x) { return x * density(x); }, l, h, 1e-12);
    };
  }
  if (s2) {
    d.s2 = std::move(s2);
  } else {
    d.s2 = [density, cut_lo, cut_hi](double lo, double hi) {
      double l = std::max(lo, cut_lo), h = std::min(hi, cut_hi);
      if (!(h > l)) return 0.0;
      return integrate([&](double x) { return x * x * density(x); }, l, h, 1e-12);
    };
  }

  // Inverse-cdf draw by bisection on the (continuous, increasing) cdf.
  d.draw = [cdf, cut_lo, cut_hi](RngStream& rng, double* out) {
    double u = rng.uniform01();
    double lo = cut_lo, hi = cut_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::fabs(lo)); ++it) {
      double mid = 0.5 * (lo + hi);
      (cdf(mid) < u ? lo : hi) = mid;
    }
    out[0] = 0.5 * (lo + hi);
  };
  // No generic sampler for the tilted density: fall back to mu and flag it.
  d.draw_tilted = d.draw;
  d.tilt_fallback = true;
  return d;
}

Dist empirical(std::vector<double> points, int dim, std::vector<double> weights) {
  if (dim < 1) throw config_error("empirical: dim must be >= 1");
  if (points.empty() || points.size() % static_cast<std::size_t>(dim) != 0)
    throw config_error("empirical: points size must be a positive multiple of dim");
  std::size_t n = points.size() / static_cast<std::size_t>(dim);
  if (weights.empty()) weights.assign(n, 1.0);
  if (weights.size() != n)
    throw config_error("empirical: weights size must match the point count");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw config_error("empirical: weights must be finite and nonnegative");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw config_error("empirical: weights must not all vanish");

  Dist d;
  d.kind = DistKind::empirical;
  d.dim = dim;
  d.family = "empirical";
  d.points = std::move(points);
  d.weights = std::move(weights);
  for (double& w : d.weights) w /= wsum;

  d.weight_cdf.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += d.weights[i];
    d.weight_cdf[i] = acc;
  }
  d.weight_cdf[n - 1] = 1.0;

  d.mean.assign(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) d.mean[k] += d.weights[i] * d.points[i * dim + k];
  d.scale.assign(dim, 0.0);
  d.support.shape = dim == 1 ? Support::Shape::interval : Support::Shape::box;
  d.support.lo.assign(dim, kInf);
  d.support.hi.assign(dim, -kInf);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) {
      double v = d.points[i * dim + k];
      double t = v - d.mean[k];
      d.scale[k] += d.weights[i] * t * t;
      d.support.lo[k] = std::min(d.support.lo[k], v);
      d.support.hi[k] = std::max(d.support.hi[k], v);
    }
  }
  for (int k = 0; k < dim; ++k) d.scale[k] = std::sqrt(d.scale[k]);

  // The closures capture copies: a Dist is freely movable/copyable, so
  // they must not point into the payload vectors.
  std::vector<double> wcdf_copy = d.weight_cdf;
  std::vector<double> pts_copy = d.points;
  d.draw = [wcdf_copy, pts_copy, dim](RngStream& rng, double* out) {
    double u = rng.uniform01();
    auto it = std::upper_bound(wcdf_copy.begin(), wcdf_copy.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - wcdf_copy.begin());
    if (idx >= wcdf_copy.size()) idx = wcdf_copy.size() - 1;
    const double* p = pts_copy.data() + idx * static_cast<std::size_t>(dim);
    for (int k = 0; k < dim; ++k) out[k] = p[k];
  };
  // Splitting draw for data: weight-proportional support point.
  d.draw_tilted = d.draw;
  return d;
}

namespace {

bool numeric_token(const std::string& tok) {
  char* end = nullptr;
  std::string t = tok;
  if (t.empty()) return false;
  std::strtod(t.c_str(), &end);
  while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
  return end && *end == '\0';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (std::string& s : out) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

Dist empirical_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open data file: " + path);

  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw config_error("data file is empty: " + path);

  int weight_col = -1;
  std::size_t first_data = 0;
  bool has_header = false;
  for (const std::string& tok : rows[0])
    if (!numeric_token(tok)) has_header = true;
  if (has_header) {
    first_data = 1;
    for (std::size_t c = 0; c < rows[0].size(); ++c)
      if (rows[0][c] == "w" || rows[0][c] == "weight") weight_col = static_cast<int>(c);
  }
  if (first_data >= rows.size()) throw config_error("data file has a header but no rows: " + path);

  std::size_t cols = rows[first_data].size();
  int dim = static_cast<int>(cols) - (weight_col >= 0 ? 1 : 0);
  if (dim < 1) throw config_error("data file needs at least one coordinate column: " + path);

  std::vector<double> pts, w;
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw config_error("ragged data row " + std::to_string(r + 1) + " in " + path);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!numeric_token(rows[r][c]))
        throw config_error("non-numeric value in data row " + std::to_string(r + 1) + " of " +
                           path);
      double v = std::strtod(rows[r][c].c_str(), nullptr);
      if (static_cast<int>(c) == weight_col)
        w.push_back(v);
      else
        pts.push_back(v);
    }
  }
  return empirical(std::move(pts), dim, std::move(w));
}

std::vector<double> sample(const Dist& d, std::size_t n, std::uint64_t seed) {
  if (!d.draw) throw backend_error("distribution has no sampler");
  RngStream rng(seed, streams::kSample);
  std::vector<double> out(n * static_cast<std::size_t>(d.dim));
  for (std::size_t i = 0; i < n; ++i) d.draw(rng, out.data() + i * d.dim);
  return out;
}

IntervalStats interval_stats(const Dist& d, double a, double b) {
  if (d.dim != 1) throw precondition_error("interval_stats: 1D models only");
  IntervalStats st;
  if (d.kind == DistKind::empirical) {
    double m1 = 0.0;
    for (std::size_t i = 0; i < d.point_count(); ++i) {
      double x = d.points[i];
      if (x >= a && x <= b) {
        st.mass += d.weights[i];
        m1 += d.weights[i] * x;
        st.second_moment += d.weights[i] * x * x;
      }
    }
    st.mean = st.mass > 0.0 ? m1 / st.mass : kNaN;
    return st;
  }
  if (!d.s0 || !d.s1 || !d.s2)
    throw precondition_error("interval_stats: model lacks partial moment closures");
  st.mass = d.s0(a, b);
  double m1 = d.s1(a, b);
  st.second_moment = d.s2(a, b);
  st.mean = st.mass > 0.0 ? m1 / st.mass : kNaN;
  return st;
}

double tail_second_moment(const Dist& d, double R, double* std_err,
                          std::size_t mc_samples, std::uint64_t seed) {
  if (!(R >= 0.0)) throw precondition_error("tail_second_moment: R must be >= 0");
  double t = 0.4 * R;
  if (std_err) *std_err = 0.0;

  if (d.kind == DistKind::empirical) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.point_count(); ++i) {
      const double* p = d.points.data() + i * static_cast<std::size_t>(d.dim);
      double r2 = 0.0;
      for (int k = 0; k < d.dim; ++k) {
        double u = p[k] - d.mean[k];
        r2 += u * u;
      }
      if (r2 > t * t) acc += d.weights[i] * r2;
    }
    return acc;
  }

  if (d.kind == DistKind::analytic1d) {
    double m = d.mean[0];
    auto piece = [&](double a, double b) {
      return d.s2(a, b) - 2.0 * m * d.s1(a, b) + m * m * d.s0(a, b);
    };
    double v = piece(-kInf, m - t) + piece(m + t, kInf);
    return std::max(0.0, v);
  }

  // d-dimensional analytic models: Monte Carlo on a dedicated stream.
  if (!d.draw) throw backend_error("tail_second_moment: model has no sampler");
  RngStream rng(seed, streams::kTail);
  std::vector<double> buf(d.dim);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    d.draw(rng, buf.data());
    double r2 = 0.0;
    for (int k = 0; k < d.dim; ++k) {
      double u = buf[k] - d.mean[k];
      r2 += u * u;
    }
    double y = r2 > t * t ? r2 : 0.0;
    sum += y;
    sum2 += y * y;
  }
  double n = static_cast<double>(mc_samples);
  double mean = sum / n;
  if (std_err) {
    double var = std::max(0.0, sum2 / n - mean * mean);
    *std_err = std::sqrt(var / (n - 1.0));
  }
  return mean;
}

bool split_point(const Dist& d, RngStream& rng, double* out) {
  if (!d.draw_tilted) throw backend_error("split_point: model has no sampler");
  d.draw_tilted(rng, out);
  return !d.tilt_fallback;
}

}  // namespace lloydcvt
