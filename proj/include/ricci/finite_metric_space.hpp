#pragma once

// Finite pointed metric space: a full symmetric distance matrix plus a
// basepoint index. The hub format for Gromov-Hausdorff experiments.

#include <vector>

#include "ricci/common.hpp"

namespace ricci {

struct FiniteMetricSpace {
  int n = 0;
  int basepoint = 0;
  std::vector<double> d;  // row-major n x n

  double dist(int i, int j) const { return d[(size_t)i * n + j]; }
  double& at(int i, int j) { return d[(size_t)i * n + j]; }

  double diameter() const {
    double m = 0.0;
    for (double x : d) m = std::max(m, x);
    return m;
  }

  // Symmetry, zero diagonal, nonnegativity, and the triangle inequality up to
  // a fixed 1e-9 relative slack; anything worse is a hard error.
  void validate() const {
    if (n < 1) throw invalid_input("FiniteMetricSpace: empty");
    if ((int)d.size() != n * n) throw invalid_input("FiniteMetricSpace: matrix size mismatch");
    if (basepoint < 0 || basepoint >= n)
      throw invalid_input("FiniteMetricSpace: basepoint out of range");
    double scale = diameter();
    double tol = 1e-9 * std::max(1.0, scale);
    for (int i = 0; i < n; ++i) {
      if (std::fabs(dist(i, i)) > tol)
        throw invalid_input("FiniteMetricSpace: nonzero diagonal");
      for (int j = 0; j < n; ++j) {
        if (!finite(dist(i, j)) || dist(i, j) < -tol)
          throw invalid_input("FiniteMetricSpace: invalid entry");
        if (std::fabs(dist(i, j) - dist(j, i)) > tol)
          throw invalid_input("FiniteMetricSpace: asymmetric matrix");
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          if (dist(i, k) > dist(i, j) + dist(j, k) + tol)
            throw invalid_input("FiniteMetricSpace: triangle inequality violated");
  }

  // Indices within distance rad of the basepoint, in index order.
  std::vector<int> ball(double rad) const {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
      if (dist(basepoint, i) <= rad) out.push_back(i);
    return out;
  }
};

// Restriction to a subset of points (order preserved); basepoint must be kept.
inline FiniteMetricSpace sub_space(const FiniteMetricSpace& f, const std::vector<int>& keep) {
  FiniteMetricSpace out;
  out.n = (int)keep.size();
  out.d.resize((size_t)out.n * out.n);
  out.basepoint = -1;
  for (int a = 0; a < out.n; ++a) {
    if (keep[a] == f.basepoint) out.basepoint = a;
    for (int b = 0; b < out.n; ++b) out.at(a, b) = f.dist(keep[a], keep[b]);
  }
  if (out.basepoint < 0) throw invalid_input("sub_space: basepoint dropped");
  return out;
}

}  // namespace ricci
