#include "lloydcvt/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lloydcvt/errors.hpp"
#include "lloydcvt/rng.hpp"

namespace lloydcvt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

Grid Grid::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw config_error("grid needs at least one point");
  int dim = static_cast<int>(rows[0].size());
  if (dim < 1) throw config_error("grid points need at least one coordinate");
  Grid g;
  g.dim = dim;
  g.pts.reserve(rows.size() * static_cast<std::size_t>(dim));
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != dim)
      throw config_error("grid rows must share one dimension");
    g.pts.insert(g.pts.end(), r.begin(), r.end());
  }
  return g;
}

std::size_t nearest_index(const Grid& g, const double* xi) {
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double d = dist2(g.point(i), xi, g.dim);
    if (d < best_d) {  // strict: first minimum (lowest index) wins ties
      best_d = d;
      best = i;
    }
  }
  return best;
}

double CellStats::energy() const {
  double e = 0.0;
  for (double v : second_moment) e += v;
  return e;
}

double min_pairwise_distance(const Grid& g) {
  std::size_t n = g.size();
  if (n < 2) return kInf;
  double best = kInf;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      best = std::min(best, dist2(g.point(i), g.point(j), g.dim));
  return std::sqrt(best);
}

namespace {

// Exact 1D cell statistics from the model's partial-moment closures.
// Cells are the midpoint intervals of the sorted generators. A run of
// exactly equal generators collapses: the lowest original index owns the
// whole span (matching nearest_index tie-breaking), the rest get empty
// cells.
CellStats cell_stats_exact1d(const Grid& g, const Dist& d) {
  if (g.dim != 1) throw backend_error("exact1d backend requires dim == 1");
  if (d.kind != DistKind::analytic1d || !d.s0 || !d.s1 || !d.s2)
    throw backend_error("exact1d backend requires a 1D analytic model");

  std::size_t n = g.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.pts[a] != g.pts[b] ? g.pts[a] < g.pts[b] : a < b;
  });

  std::vector<double> lo(n), hi(n);
  for (std::size_t r = 0; r < n; ++r) {
    lo[r] = r == 0 ? -kInf : 0.5 * (g.pts[order[r - 1]] + g.pts[order[r]]);
    hi[r] = r + 1 == n ? kInf : 0.5 * (g.pts[order[r]] + g.pts[order[r + 1]]);
  }
  for (std::size_t r = 0; r < n;) {
    std::size_t q = r;
    while (q + 1 < n && g.pts[order[q + 1]] == g.pts[order[r]]) ++q;
    if (q > r) {
      hi[r] = hi[q];  // lowest original index takes the run's span
      for (std::size_t t = r + 1; t <= q; ++t) lo[t] = hi[t] = g.pts[order[t]];
    }
    r = q + 1;
  }

  CellStats st;
  st.n = n;
  st.dim = 1;
  st.mass.assign(n, 0.0);
  st.centroid.assign(n, kNaN);
  st.centroid_defined.assign(n, 0);
  st.second_moment.assign(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t i = order[r];
    double x = g.pts[i];
    double mass = d.s0(lo[r], hi[r]);
    double m1 = d.s1(lo[r], hi[r]);
    double m2 = d.s2(lo[r], hi[r]);
    st.mass[i] = mass;
    if (mass > 0.0) {
      st.centroid[i] = m1 / mass;
      st.centroid_defined[i] = 1;
    }
    st.second_moment[i] = m2 - 2.0 * x * m1 + x * x * mass;
  }
  return st;
}

CellStats cell_stats_mc(const Grid& g, const Dist& d, const Backend& backend) {
  if (!d.draw) throw backend_error("mc backend requires a sampler");
  if (backend.samples == 0) throw backend_error("mc backend requires samples > 0");

  std::size_t n = g.size();
  int dim = g.dim;
  if (d.dim != dim) throw precondition_error("grid and distribution dimensions differ");

  std::vector<double> cnt(n, 0.0);
  std::vector<double> sx(n * dim, 0.0), sxx(n * dim, 0.0);
  std::vector<double> sm(n, 0.0), smm(n, 0.0);

  RngStream rng(backend.seed, streams::kCellStats);
  std::vector<double> buf(dim);
  for (std::size_t s = 0; s < backend.samples; ++s) {
    d.draw(rng, buf.data());
    std::size_t i = nearest_index(g, buf.data());
    cnt[i] += 1.0;
    double r2 = dist2(g.point(i), buf.data(), dim);
    sm[i] += r2;
    smm[i] += r2 * r2;
    for (int k = 0; k < dim; ++k) {
      sx[i * dim + k] += buf[k];
      sxx[i * dim + k] += buf[k] * buf[k];
    }
  }

  double N = static_cast<double>(backend.samples);
  CellStats st;
  st.n = n;
  st.dim = dim;
  st.mc_samples = backend.samples;
  st.mass.assign(n, 0.0);
  st.centroid.assign(n * dim, kNaN);
  st.centroid_defined.assign(n, 0);
  st.second_moment.assign(n, 0.0);
  st.mass_se.assign(n, 0.0);
  st.centroid_se.assign(n * dim, kNaN);
  st.second_moment_se.assign(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    double p = cnt[i] / N;
    st.mass[i] = p;
    st.mass_se[i] = std::sqrt(std::max(0.0, p * (1.0 - p)) / N);
    st.second_moment[i] = sm[i] / N;
    double var_m = std::max(0.0, smm[i] / N - (sm[i] / N) * (sm[i] / N));
    st.second_moment_se[i] = std::sqrt(var_m / std::max(1.0, N - 1.0));
    if (cnt[i] > 0.0) {
      st.centroid_defined[i] = 1;
      for (int k = 0; k < dim; ++k) {
        double mean_k = sx[i * dim + k] / cnt[i];
        st.centroid[i * dim + k] = mean_k;
        if (cnt[i] > 1.0) {
          double var_k =
              std::max(0.0, (sxx[i * dim + k] - cnt[i] * mean_k * mean_k) / (cnt[i] - 1.0));
          st.centroid_se[i * dim + k] = std::sqrt(var_k / cnt[i]);
        }
      }
    }
  }
  return st;
}

}  // namespace

CellStats cell_stats(const Grid& g, const Dist& d, const Backend& backend) {
  if (g.size() == 0) throw precondition_error("cell_stats: empty grid");
  return backend.kind == Backend::Kind::exact1d ? cell_stats_exact1d(g, d)
                                                : cell_stats_mc(g, d, backend);
}

namespace {

// On the median hyperplane of (i, j) both distances tie; the probe lies on
// the shared cell boundary iff no third generator is strictly closer.
bool on_shared_boundary(const Grid& g, std::size_t i, std::size_t j, const double* xi) {
  double di = dist2(g.point(i), xi, g.dim);
  double dj = dist2(g.point(j), xi, g.dim);
  double dmin = kInf;
  for (std::size_t k = 0; k < g.size(); ++k) dmin = std::min(dmin, dist2(g.point(k), xi, g.dim));
  double tol = 1e-10 * (1.0 + dmin);
  return di <= dmin + tol && dj <= dmin + tol;
}

}  // namespace

std::vector<Face> boundary_faces(const Grid& g, std::size_t probes) {
  std::size_t n = g.size();
  int dim = g.dim;
  if (probes == 0) probes = 1;

  // Probe extent: grid bounding box inflated by half its diameter.
  std::vector<double> blo(dim, kInf), bhi(dim, -kInf);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) {
      blo[k] = std::min(blo[k], g.point(i)[k]);
      bhi[k] = std::max(bhi[k], g.point(i)[k]);
    }
  double diam2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    double t = bhi[k] - blo[k];
    diam2 += t * t;
  }
  double extent = 0.75 * std::sqrt(diam2) + 1e-12;

  std::vector<Face> faces;
  faces.reserve(n * (n - 1) / 2);
  std::vector<double> tangent((dim > 1 ? dim - 1 : 1) * dim, 0.0);
  std::vector<double> probe(dim), coef(dim > 1 ? dim - 1 : 1);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Face f;
      f.i = i;
      f.j = j;
      f.anchor.resize(dim);
      f.normal.resize(dim);
      double L2 = dist2(g.point(i), g.point(j), dim);
      if (L2 == 0.0) {  // coincident generators share no hyperplane
        faces.push_back(std::move(f));
        continue;
      }
      double L = std::sqrt(L2);
      for (int k = 0; k < dim; ++k) {
        f.anchor[k] = 0.5 * (g.point(i)[k] + g.point(j)[k]);
        f.normal[k] = (g.point(j)[k] - g.point(i)[k]) / L;
      }

      if (dim == 1) {
        f.active = on_shared_boundary(g, i, j, f.anchor.data());
        if (f.active) f.witness = f.anchor;
        faces.push_back(std::move(f));
        continue;
      }

      // Orthonormal tangent basis via Gram-Schmidt against the normal.
      int t_rows = 0;
      for (int axis = 0; axis < dim && t_rows < dim - 1; ++axis) {
        double* row = tangent.data() + t_rows * dim;
        for (int k = 0; k < dim; ++k) row[k] = (k == axis) ? 1.0 : 0.0;
        double dn = f.normal[axis];
        for (int k = 0; k < dim; ++k) row[k] -= dn * f.normal[k];
        for (int r = 0; r < t_rows; ++r) {
          const double* prev = tangent.data() + r * dim;
          double dp = 0.0;
          for (int k = 0; k < dim; ++k) dp += row[k] * prev[k];
          for (int k = 0; k < dim; ++k) row[k] -= dp * prev[k];
        }
        double norm = 0.0;
        for (int k = 0; k < dim; ++k) norm += row[k] * row[k];
        if (norm < 1e-20) continue;
        norm = std::sqrt(norm);
        for (int k = 0; k < dim; ++k) row[k] /= norm;
        ++t_rows;
      }

      // Latin-hypercube probes over the tangent cube [-extent, extent]^(dim-1),
      // deterministic per (i, j).
      RngStream rng(0x50b0e5ULL + (static_cast<std::uint64_t>(i) << 20) + j, streams::kProbe);
      std::vector<std::vector<std::uint32_t>> perm(t_rows);
      for (int r = 0; r < t_rows; ++r) {
        perm[r].resize(probes);
        for (std::size_t p = 0; p < probes; ++p) perm[r][p] = static_cast<std::uint32_t>(p);
        for (std::size_t p = probes; p > 1; --p) {
          std::size_t q = static_cast<std::size_t>(rng.next_u64() % p);
          std::swap(perm[r][p - 1], perm[r][q]);
        }
      }
      for (std::size_t p = 0; p < probes && !f.active; ++p) {
        for (int k = 0; k < dim; ++k) probe[k] = f.anchor[k];
        for (int r = 0; r < t_rows; ++r) {
          double u = (static_cast<double>(perm[r][p]) + rng.uniform01()) /
                     static_cast<double>(probes);
          double c = -extent + 2.0 * extent * u;
          const double* row = tangent.data() + r * dim;
          for (int k = 0; k < dim; ++k) probe[k] += c * row[k];
        }
        if (on_shared_boundary(g, i, j, probe.data())) {
          f.active = true;
          f.witness.assign(probe.begin(), probe.end());
        }
      }
      faces.push_back(std::move(f));
    }
  }
  return faces;
}

}  // namespace lloydcvt
