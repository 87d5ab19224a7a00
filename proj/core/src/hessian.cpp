#include "lloydcvt/hessian.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "lloydcvt/distortion.hpp"
#include "lloydcvt/errors.hpp"
#include "lloydcvt/numerics.hpp"
#include "lloydcvt/rng.hpp"

namespace lloydcvt {

HessianReport classify(std::vector<double> H, std::size_t n) {
  if (n == 0 || H.size() != n * n) throw precondition_error("classify: bad matrix size");
  HessianReport rep;
  rep.n = n;
  rep.matrix.assign(n * n, 0.0);
  rep.asymmetry = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      rep.asymmetry = std::max(rep.asymmetry, std::fabs(H[r * n + c] - H[c * n + r]));
      rep.matrix[r * n + c] = 0.5 * (H[r * n + c] + H[c * n + r]);
    }

  Eigen::MatrixXd M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rep.matrix[r * n + c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("classify: eigensolver failed");
  rep.eigenvalues.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    rep.eigenvalues[k] = es.eigenvalues()(static_cast<Eigen::Index>(k));

  double rho = 0.0;
  for (double ev : rep.eigenvalues) rho = std::max(rho, std::fabs(ev));
  rep.tol_eig = 1e-7 * (1.0 + rho);
  double lo = rep.eigenvalues.front();
  if (lo > rep.tol_eig)
    rep.label = "local_min";
  else if (lo < -rep.tol_eig)
    rep.label = "saddle";
  else
    rep.label = "inconclusive";
  return rep;
}

HessianReport hessian_1d(const Grid& g, const Dist& d) {
  if (g.dim != 1 || d.dim != 1) throw precondition_error("hessian_1d: requires dim == 1");
  if (d.kind != DistKind::analytic1d || !d.density || !d.s0)
    throw precondition_error("hessian_1d: requires a 1D analytic model with a density");
  std::size_t n = g.size();
  if (n == 0) throw precondition_error("hessian_1d: empty grid");
  if (n > 1 && !(min_pairwise_distance(g) > 0.0))
    throw precondition_error("hessian_1d: generators must be distinct");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return g.pts[a] < g.pts[b]; });

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> x(n), mid(n > 0 ? n - 1 : 0), rho_mid(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) x[i] = g.pts[order[i]];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mid[i] = 0.5 * (x[i] + x[i + 1]);
    rho_mid[i] = d.density(&mid[i]);
  }

  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double lo = i == 0 ? -inf : mid[i - 1];
    double hi = i + 1 == n ? inf : mid[i];
    double diag = 2.0 * d.s0(lo, hi);
    if (i + 1 < n) {
      double gap = x[i + 1] - x[i];
      double off = -0.5 * rho_mid[i] * gap;
      diag += off;  // -rho(m_i) g_i / 2
      H[order[i] * n + order[i + 1]] = off;
      H[order[i + 1] * n + order[i]] = off;
    }
    if (i > 0) diag += -0.5 * rho_mid[i - 1] * (x[i] - x[i - 1]);
    H[order[i] * n + order[i]] = diag;
  }

  HessianReport rep = classify(std::move(H), n);
  rep.dim = 1;
  rep.grid_size = n;
  return rep;
}

namespace {

struct Marginals {
  std::function<double(double)> F1;    // cdf of the first coordinate
  std::function<double(double)> rho2;  // density of the second coordinate
};

Marginals product_marginals(const Dist& d) {
  Marginals m;
  if (d.family == "uniform") {
    double lo0 = d.support.lo[0], hi0 = d.support.hi[0];
    double lo1 = d.support.lo[1], hi1 = d.support.hi[1];
    m.F1 = [lo0, hi0](double u) { return std::clamp((u - lo0) / (hi0 - lo0), 0.0, 1.0); };
    m.rho2 = [lo1, hi1](double v) {
      return v >= lo1 && v <= hi1 ? 1.0 / (hi1 - lo1) : 0.0;
    };
    return m;
  }
  if (d.family == "gaussian") {
    double m0 = d.mean[0], s0 = d.scale[0];
    double m1 = d.mean[1], s1 = d.scale[1];
    m.F1 = [m0, s0](double u) { return norm_cdf((u - m0) / s0); };
    m.rho2 = [m1, s1](double v) { return norm_pdf((v - m1) / s1) / s1; };
    return m;
  }
  throw precondition_error(
      "hessian_2d: cell masses need a built-in product-form model (uniform or gaussian)");
}

// Segment of the median line between generators i and j that carries the
// active face, clipped to the box [blo, bhi]. Returns false when the line
// misses the box or no boundary point could be located on it.
struct FaceSegment {
  double ax, ay;  // anchor
  double tx, ty;  // unit tangent
  double t0 = 0.0, t1 = 0.0;
  double length() const { return t1 - t0; }
};

bool face_segment(const Grid& g, const Face& f, const double* blo, const double* bhi,
                  FaceSegment& seg) {
  seg.ax = f.anchor[0];
  seg.ay = f.anchor[1];
  seg.tx = -f.normal[1];
  seg.ty = f.normal[0];

  // Clip the line to the box in parameter space.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double a[2] = {seg.ax, seg.ay};
  double t[2] = {seg.tx, seg.ty};
  for (int k = 0; k < 2; ++k) {
    if (std::fabs(t[k]) < 1e-300) {
      if (a[k] < blo[k] || a[k] > bhi[k]) return false;
      continue;
    }
    double u = (blo[k] - a[k]) / t[k];
    double v = (bhi[k] - a[k]) / t[k];
    lo = std::max(lo, std::min(u, v));
    hi = std::min(hi, std::max(u, v));
  }
  if (!(lo < hi)) return false;

  auto on_face = [&](double tv) {
    double p[2] = {seg.ax + tv * seg.tx, seg.ay + tv * seg.ty};
    std::size_t idx = nearest_index(g, p);
    return idx == std::min(f.i, f.j);
  };

  // Seed from the stored witness when it projects into range; otherwise
  // scan for any on-face parameter.
  double tw = (f.witness[0] - seg.ax) * seg.tx + (f.witness[1] - seg.ay) * seg.ty;
  bool have = tw >= lo && tw <= hi && on_face(tw);
  if (!have) {
    for (int s = 0; s < 256 && !have; ++s) {
      double tv = lo + (hi - lo) * (s + 0.5) / 256.0;
      if (on_face(tv)) {
        tw = tv;
        have = true;
      }
    }
  }
  if (!have) return false;

  seg.t1 = on_face(hi) ? hi : bisect_boundary(on_face, tw, hi, 1e-12 * (1.0 + hi - lo));
  seg.t0 = on_face(lo) ? lo : bisect_boundary(on_face, tw, lo, 1e-12 * (1.0 + hi - lo));
  return seg.t1 > seg.t0;
}

}  // namespace

HessianReport hessian_2d(const Grid& g, const Dist& d, std::size_t quad_nodes,
                         std::size_t probes) {
  if (g.dim != 2 || d.dim != 2) throw precondition_error("hessian_2d: requires dim == 2");
  if (!d.density) throw precondition_error("hessian_2d: requires an analytic density");
  std::size_t n = g.size();
  if (n == 0) throw precondition_error("hessian_2d: empty grid");
  if (n > 1 && !(min_pairwise_distance(g) > 0.0))
    throw precondition_error("hessian_2d: generators must be distinct");

  Marginals marg = product_marginals(d);

  // Integration box: the support box, or mean +- 6 sigma when unbounded.
  double blo[2], bhi[2];
  for (int k = 0; k < 2; ++k) {
    if (d.support.shape == Support::Shape::box) {
      blo[k] = d.support.lo[k];
      bhi[k] = d.support.hi[k];
    } else {
      blo[k] = d.mean[k] - 6.0 * d.scale[k];
      bhi[k] = d.mean[k] + 6.0 * d.scale[k];
    }
  }

  std::vector<Face> faces = boundary_faces(g, probes);
  std::vector<FaceSegment> segs(faces.size());
  std::vector<bool> usable(faces.size(), false);
  double total_len = 0.0;
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    if (!faces[fi].active) continue;
    usable[fi] = face_segment(g, faces[fi], blo, bhi, segs[fi]);
    if (usable[fi]) total_len += segs[fi].length();
  }
  if (total_len <= 0.0 && n > 1)
    throw numerical_error("hessian_2d: no active face intersects the integration box");

  const std::size_t D = n * 2;
  std::vector<double> H(D * D, 0.0);
  std::vector<double> mass(n, 0.0);

  // Face quadrature. For a point xi on the face between i and j at
  // separation L = |x_j - x_i|:
  //   d(grad_i)/d(x_j) block  += 2 (x_i - xi) (x_j - xi)^T / L * rho(xi)
  //   d(grad_i)/d(x_i) block  -= 2 (x_i - xi) (x_i - xi)^T / L * rho(xi)
  // and symmetrically with i and j swapped. The same nodes feed the
  // divergence-form mass integral with vector field (F1(xi_1) rho2(xi_2), 0).
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    if (!usable[fi]) continue;
    const Face& f = faces[fi];
    const FaceSegment& sg = segs[fi];
    std::size_t i = f.i, j = f.j;
    const double* xi_pt = g.point(i);
    const double* xj_pt = g.point(j);
    double L = std::sqrt(dist2(xi_pt, xj_pt, 2));

    std::size_t nodes = static_cast<std::size_t>(
        std::ceil(static_cast<double>(quad_nodes) * sg.length() / total_len));
    nodes = std::max<std::size_t>(nodes, 8);

    double acc_ii[4] = {0, 0, 0, 0}, acc_jj[4] = {0, 0, 0, 0};
    double acc_ij[4] = {0, 0, 0, 0}, acc_ji[4] = {0, 0, 0, 0};
    double mass_flux = 0.0;

    // One pass per block entry keeps composite_gl4 reusable; the density
    // evaluations dominate only for gaussian input and stay modest.
    auto quad = [&](const std::function<double(double, double)>& val) {
      return composite_gl4(
          [&](double t) {
            double px = sg.ax + t * sg.tx, py = sg.ay + t * sg.ty;
            return val(px, py);
          },
          sg.t0, sg.t1, nodes);
    };

    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        acc_ij[a * 2 + b] = quad([&](double px, double py) {
          double p[2] = {px, py};
          double rho = d.density(p);
          return 2.0 * (xi_pt[a] - p[a]) * (xj_pt[b] - p[b]) / L * rho;
        });
        acc_ji[a * 2 + b] = quad([&](double px, double py) {
          double p[2] = {px, py};
          double rho = d.density(p);
          return 2.0 * (xj_pt[a] - p[a]) * (xi_pt[b] - p[b]) / L * rho;
        });
        acc_ii[a * 2 + b] = quad([&](double px, double py) {
          double p[2] = {px, py};
          double rho = d.density(p);
          return -2.0 * (xi_pt[a] - p[a]) * (xi_pt[b] - p[b]) / L * rho;
        });
        acc_jj[a * 2 + b] = quad([&](double px, double py) {
          double p[2] = {px, py};
          double rho = d.density(p);
          return -2.0 * (xj_pt[a] - p[a]) * (xj_pt[b] - p[b]) / L * rho;
        });
      }
    mass_flux = quad([&](double px, double py) { return marg.F1(px) * marg.rho2(py); });

    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        H[(i * 2 + a) * D + (j * 2 + b)] += acc_ij[a * 2 + b];
        H[(j * 2 + a) * D + (i * 2 + b)] += acc_ji[a * 2 + b];
        H[(i * 2 + a) * D + (i * 2 + b)] += acc_ii[a * 2 + b];
        H[(j * 2 + a) * D + (j * 2 + b)] += acc_jj[a * 2 + b];
      }

    // Outward flux for cell i is along +normal (normal points i -> j).
    mass[i] += mass_flux * f.normal[0];
    mass[j] -= mass_flux * f.normal[0];
  }

  // Box-edge flux. Only the vertical edges carry flux for the field
  // (F1 rho2, 0); each edge is split into ownership intervals by scanning
  // plus bisection at owner changes.
  for (int side = 0; side < 2; ++side) {
    double ex = side == 0 ? blo[0] : bhi[0];
    double nu_x = side == 0 ? -1.0 : 1.0;
    double Fval = marg.F1(ex);
    if (Fval == 0.0) continue;
    const std::size_t kScan = 512;
    double y_prev = blo[1];
    double p0[2] = {ex, y_prev};
    std::size_t owner_prev = nearest_index(g, p0);
    for (std::size_t s = 1; s <= kScan; ++s) {
      double y = blo[1] + (bhi[1] - blo[1]) * static_cast<double>(s) / kScan;
      double p[2] = {ex, y};
      std::size_t owner = nearest_index(g, p);
      if (owner != owner_prev || s == kScan) {
        double y_hi = y;
        if (owner != owner_prev) {
          auto pred = [&](double yy) {
            double q[2] = {ex, yy};
            return nearest_index(g, q) == owner_prev;
          };
          y_hi = bisect_boundary(pred, y - (bhi[1] - blo[1]) / kScan, y,
                                 1e-12 * (1.0 + bhi[1] - blo[1]));
        }
        double seg_flux = composite_gl4([&](double yy) { return marg.rho2(yy); }, y_prev,
                                        y_hi, 64) *
                          Fval * nu_x;
        mass[owner_prev] += seg_flux;
        y_prev = y_hi;
        owner_prev = owner;
      }
    }
    // Tail of the edge after the last owner change.
    if (y_prev < bhi[1]) {
      double p[2] = {ex, bhi[1]};
      std::size_t owner = nearest_index(g, p);
      mass[owner] += composite_gl4([&](double yy) { return marg.rho2(yy); }, y_prev,
                                   bhi[1], 64) *
                     Fval * nu_x;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    H[(i * 2 + 0) * D + (i * 2 + 0)] += 2.0 * mass[i];
    H[(i * 2 + 1) * D + (i * 2 + 1)] += 2.0 * mass[i];
  }

  HessianReport rep = classify(std::move(H), D);
  rep.dim = 2;
  rep.grid_size = n;
  return rep;
}

namespace {

std::vector<double> hessian_fd_exact(const Grid& g, const Dist& d, const Backend& backend,
                                     double h) {
  std::size_t n = g.size();
  int dim = g.dim;
  std::size_t D = n * static_cast<std::size_t>(dim);
  std::vector<double> H(D * D, 0.0);
  Grid work = g;
  for (std::size_t p = 0; p < D; ++p) {
    double base = g.pts[p];
    double hp = h * (1.0 + std::fabs(base));
    work.pts[p] = base + hp;
    std::vector<double> gp = gradient(work, d, backend);
    work.pts[p] = base - hp;
    std::vector<double> gm = gradient(work, d, backend);
    work.pts[p] = base;
    for (std::size_t r = 0; r < D; ++r) H[r * D + p] = (gp[r] - gm[r]) / (2.0 * hp);
  }
  return H;
}

// One common sample stream serves every perturbed grid, so the finite
// difference cancels all sampling noise except ownership flips near moving
// boundaries and the deterministic shift of the perturbed generator.
std::vector<double> hessian_fd_mc(const Grid& g, const Dist& d, const Backend& backend,
                                  double h) {
  std::size_t n = g.size();
  int dim = g.dim;
  std::size_t D = n * static_cast<std::size_t>(dim);
  if (!d.draw) throw backend_error("hessian_fd: mc backend requires a sampler");
  if (backend.samples == 0) throw backend_error("hessian_fd: mc backend requires samples > 0");

  std::vector<double> hp(D);
  for (std::size_t p = 0; p < D; ++p) hp[p] = h * (1.0 + std::fabs(g.pts[p]));

  std::vector<double> acc(D * D, 0.0);       // sum over samples of y(+) - y(-)
  std::vector<double> shift_cnt(D, 0.0);     // samples owned by cell i under both signs
  std::vector<double> base_d(n);
  std::vector<double> xi(dim);

  RngStream rng(backend.seed, streams::kHessFd);
  for (std::size_t s = 0; s < backend.samples; ++s) {
    d.draw(rng, xi.data());
    std::size_t min1 = 0, min2 = 0;
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      base_d[i] = dist2(g.point(i), xi.data(), dim);
      if (base_d[i] < d1) {
        d2 = d1;
        min2 = min1;
        d1 = base_d[i];
        min1 = i;
      } else if (base_d[i] < d2) {
        d2 = base_d[i];
        min2 = i;
      }
    }

    for (std::size_t i = 0; i < n; ++i)
      for (int a = 0; a < dim; ++a) {
        std::size_t p = i * static_cast<std::size_t>(dim) + a;
        double hh = hp[p];
        double cross = 2.0 * hh * (xi[a] - g.point(i)[a]);
        double dp = base_d[i] + hh * hh - cross;  // generator moved by +hh
        double dm = base_d[i] + hh * hh + cross;  // generator moved by -hh
        std::size_t op, om;
        if (i == min1) {
          op = dp <= d2 ? i : min2;
          om = dm <= d2 ? i : min2;
        } else {
          op = dp < d1 ? i : min1;
          om = dm < d1 ? i : min1;
        }
        if (op == om) {
          if (op == i) shift_cnt[p] += 1.0;  // y(+)-y(-) = 4 hh e_p exactly
          continue;
        }
        // Ownership flip: add y(+) - y(-) explicitly.
        double* col = acc.data() + p;  // column p, stride D
        for (int b = 0; b < dim; ++b) {
          double yp = 2.0 * (g.point(op)[b] - xi[b]);
          if (op == i && b == a) yp += 2.0 * hh;
          double ym = 2.0 * (g.point(om)[b] - xi[b]);
          if (om == i && b == a) ym -= 2.0 * hh;
          col[(op * static_cast<std::size_t>(dim) + b) * D] += yp;
          col[(om * static_cast<std::size_t>(dim) + b) * D] -= ym;
        }
      }
  }

  double N = static_cast<double>(backend.samples);
  std::vector<double> H(D * D, 0.0);
  for (std::size_t p = 0; p < D; ++p) {
    for (std::size_t r = 0; r < D; ++r) H[r * D + p] = acc[r * D + p] / (N * 2.0 * hp[p]);
    H[p * D + p] += 2.0 * shift_cnt[p] / N;
  }
  return H;
}

}  // namespace

std::vector<double> hessian_fd(const Grid& g, const Dist& d, const Backend& backend,
                               double h) {
  if (g.size() == 0) throw precondition_error("hessian_fd: empty grid");
  if (!(h > 0.0) || !std::isfinite(h)) throw precondition_error("hessian_fd: h must be positive");
  if (backend.kind == Backend::Kind::exact1d) return hessian_fd_exact(g, d, backend, h);
  return hessian_fd_mc(g, d, backend, h);
}

}  // namespace lloydcvt
