#pragma once

// Discrete Gauss curvature of conformal data: K = -e^{-2u} (Laplacian u).
// Grids use the 5-point stencil (second order); radial profiles use the
// nonuniform 3-point polar Laplacian u_rr + u_r / r. Nodes without a full
// stencil report quiet NaN.

#include <vector>

#include "ricci/common.hpp"
#include "ricci/conformal_grid.hpp"
#include "ricci/radial_profile.hpp"

namespace ricci {

// 5-point Laplacian at interior nodes; NaN elsewhere.
inline std::vector<double> grid_laplacian(const ConformalGrid& g) {
  std::vector<double> lap(g.n_nodes(), std::numeric_limits<double>::quiet_NaN());
  double inv_h2 = 1.0 / (g.h * g.h);
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      if (g.interior(i, j)) {
        int k = g.idx(i, j);
        lap[k] = (g.u[k - 1] + g.u[k + 1] + g.u[k - g.width] + g.u[k + g.width] - 4.0 * g.u[k]) *
                 inv_h2;
      }
  return lap;
}

inline std::vector<double> gauss_curvature(const ConformalGrid& g) {
  g.validate();
  std::vector<double> K = grid_laplacian(g);
  for (int k = 0; k < g.n_nodes(); ++k)
    if (std::isfinite(K[k])) K[k] = -std::exp(-2.0 * g.u[k]) * K[k];
  return K;
}

// Nonuniform 3-point derivatives: exact on quadratics, O(spacing^2) for
// smooth data even on geometrically graded nodes.
inline double nonuniform_second(double um, double u0, double up, double a, double b) {
  return 2.0 * (a * up - (a + b) * u0 + b * um) / (a * b * (a + b));
}

inline double nonuniform_first(double um, double u0, double up, double a, double b) {
  return (a * a * up - b * b * um + (b * b - a * a) * u0) / (a * b * (a + b));
}

// Polar Laplacian of the radial samples. A leading node at r = 0 uses the
// smooth-axis limit lap = 4 (u1 - u0) / r1^2; other end nodes are NaN.
inline std::vector<double> profile_laplacian(const RadialProfile& p) {
  std::vector<double> lap(p.n(), std::numeric_limits<double>::quiet_NaN());
  for (int i = 1; i + 1 < p.n(); ++i) {
    double a = p.r[i] - p.r[i - 1], b = p.r[i + 1] - p.r[i];
    double urr = nonuniform_second(p.u[i - 1], p.u[i], p.u[i + 1], a, b);
    double ur = nonuniform_first(p.u[i - 1], p.u[i], p.u[i + 1], a, b);
    lap[i] = urr + ur / p.r[i];
  }
  if (p.r[0] == 0.0) lap[0] = 4.0 * (p.u[1] - p.u[0]) / sq(p.r[1]);
  return lap;
}

inline std::vector<double> gauss_curvature(const RadialProfile& p) {
  p.validate();
  std::vector<double> K = profile_laplacian(p);
  for (int i = 0; i < p.n(); ++i)
    if (std::isfinite(K[i])) K[i] = -std::exp(-2.0 * p.u[i]) * K[i];
  return K;
}

}  // namespace ricci
