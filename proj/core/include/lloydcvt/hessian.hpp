#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lloydcvt/measure.hpp"
#include "lloydcvt/voronoi.hpp"

namespace lloydcvt {

// Second-order report for the distortion at a grid. matrix is the
// symmetrized (N*d)x(N*d) Hessian, row-major; asymmetry records the
// largest |H - H^T| entry before averaging (quadrature noise). label is
// local_min when every eigenvalue exceeds tol_eig, saddle when any falls
// below -tol_eig, inconclusive otherwise, with
// tol_eig = 1e-7 * (1 + spectral radius).
struct HessianReport {
  std::size_t n = 0;
  int dim = 1;
  std::size_t grid_size = 0;
  std::vector<double> matrix;
  double asymmetry = 0.0;
  std::vector<double> eigenvalues;  // ascending
  std::string label;
  double tol_eig = 0.0;
};

// Shared tail: symmetrize, eigen-decompose, label.
HessianReport classify(std::vector<double> H, std::size_t n);

// 1D analytic Hessian. In sorted order, with gaps g_i = x_(i+1) - x_(i)
// and midpoints m_i, the matrix is tridiagonal:
//   H_ii     = 2 mu(C_i) - rho(m_i) g_i / 2 - rho(m_{i-1}) g_{i-1} / 2
//   H_i,i+1  = -rho(m_i) g_i / 2
// (boundary terms vanish beyond the extreme cells); entries are mapped
// back to the original indexing. Requires a 1D analytic model with a
// density and distinct generators.
HessianReport hessian_1d(const Grid& g, const Dist& d);

// 2D Hessian by quadrature over active Voronoi faces. Face endpoints are
// located by bisection on nearest-index membership along each median
// line, clipped to the support box (inflated by 6 standard deviations per
// coordinate for unbounded support). quad_nodes Gauss-Legendre nodes are
// spread over the faces proportionally to length. Cell masses for the
// diagonal blocks come from a divergence-form line integral over each
// cell's boundary (faces plus owned clip-box edge intervals), which needs
// the product structure of the built-in families. Requires dim == 2 and
// an analytic model with a density.
HessianReport hessian_2d(const Grid& g, const Dist& d, std::size_t quad_nodes = 512,
                         std::size_t probes = 128);

// Central finite differences of the distortion gradient, step
// h * (1 + |coordinate|) per perturbed coordinate. Returns the raw
// (N*d)x(N*d) matrix, column (i,a) = [grad(x + h e_ia) - grad(x - h e_ia)]
// / (2 h_ia). The mc backend streams one common sample set through every
// perturbed grid (common random numbers), so the difference isolates the
// boundary terms instead of resampling noise.
std::vector<double> hessian_fd(const Grid& g, const Dist& d, const Backend& backend,
                               double h);

}  // namespace lloydcvt
