#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>

namespace lloydcvt {

inline double norm_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double fa,
                      double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double fa, double b, double fb, double m, double fm,
                                   double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, m, fm, lm, flm);
  double right = simpson(f, m, fm, b, fb, rm, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on a finite interval. tol is absolute.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 48) {
  if (!(a < b)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Composite 4-point Gauss-Legendre with at least `nodes` evaluations,
// spread over ceil(nodes/4) equal panels. Exact for cubics per panel.
inline double composite_gl4(const std::function<double(double)>& f, double a, double b,
                            std::size_t nodes) {
  static constexpr double kX[4] = {-0.8611363115940526, -0.3399810435848563,
                                   0.3399810435848563, 0.8611363115940526};
  static constexpr double kW[4] = {0.3478548451374538, 0.6521451548625461,
                                   0.6521451548625461, 0.3478548451374538};
  if (!(a < b)) return 0.0;
  std::size_t panels = (nodes + 3) / 4;
  if (panels == 0) panels = 1;
  double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    double lo = a + static_cast<double>(p) * h;
    double c = lo + 0.5 * h, r = 0.5 * h;
    double s = 0.0;
    for (int q = 0; q < 4; ++q) s += kW[q] * f(c + r * kX[q]);
    total += s * r;
  }
  return total;
}

// Bisection for the boundary of a predicate that holds at `inside` and
// fails at `outside`. Returns the point where the predicate flips, within
// tol of the true boundary.
inline double bisect_boundary(const std::function<bool(double)>& pred, double inside,
                              double outside, double tol = 1e-10, int max_iter = 200) {
  for (int it = 0; it < max_iter && std::fabs(outside - inside) > tol; ++it) {
    double mid = 0.5 * (inside + outside);
    (pred(mid) ? inside : outside) = mid;
  }
  return 0.5 * (inside + outside);
}

}  // namespace lloydcvt
