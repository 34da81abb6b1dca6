#pragma once

// Square-lattice chart carrying a conformal factor u: the metric is
// e^{2u} (dx^2 + dy^2) on the chart region. Non-rectangular charts (discs,
// annuli) are carved out of the lattice with a per-node state mask.

#include <functional>
#include <vector>

#include "ricci/common.hpp"

namespace ricci {

enum class ChartKind { plane, disc, annulus, sphere_stereographic };

enum class NodeState : unsigned char {
  outside,   // not part of the chart
  boundary,  // chart node whose value is prescribed (Dirichlet ring / collar)
  interior   // chart node evolved by the flow; full stencil available
};

struct ConformalGrid {
  int width = 0, height = 0;  // node counts
  double h = 0.0;             // lattice spacing
  double x0 = 0.0, y0 = 0.0;  // chart coordinates of node (0,0)
  ChartKind chart = ChartKind::plane;
  double outer_radius = 0.0;  // disc/annulus/stereographic charts
  double inner_radius = 0.0;  // annulus only
  int collar = 1;             // boundary ring thickness in units of h
  std::vector<double> u;      // row-major: idx = j*width + i
  std::vector<NodeState> mask;

  int idx(int i, int j) const { return j * width + i; }
  double x_of(int i) const { return x0 + i * h; }
  double y_of(int j) const { return y0 + j * h; }
  bool in_lattice(int i, int j) const { return i >= 0 && i < width && j >= 0 && j < height; }
  NodeState state(int i, int j) const {
    return in_lattice(i, j) ? mask[idx(i, j)] : NodeState::outside;
  }
  bool active(int i, int j) const { return state(i, j) != NodeState::outside; }
  bool interior(int i, int j) const { return state(i, j) == NodeState::interior; }
  int n_nodes() const { return width * height; }

  void validate() const {
    if (width < 3 || height < 3)
      throw invalid_input("ConformalGrid: lattice must be at least 3x3");
    if (!(h > 0.0)) throw invalid_input("ConformalGrid: spacing must be positive");
    if ((int)u.size() != n_nodes() || (int)mask.size() != n_nodes())
      throw invalid_input("ConformalGrid: field size mismatch");
    for (int k = 0; k < n_nodes(); ++k)
      if (mask[k] != NodeState::outside && !finite(u[k]))
        throw invalid_input("ConformalGrid: non-finite u on an active node");
    // Interior nodes need their full 4-point stencil inside the chart.
    for (int j = 0; j < height; ++j)
      for (int i = 0; i < width; ++i)
        if (interior(i, j) &&
            !(active(i - 1, j) && active(i + 1, j) && active(i, j - 1) && active(i, j + 1)))
          throw invalid_input("ConformalGrid: interior node lacks a full stencil");
  }
};

// Total metric area: sum of e^{2u} h^2 over active nodes, in fixed row-major
// order so identical inputs sum identically.
inline double area(const ConformalGrid& g) {
  double a = 0.0;
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      if (g.active(i, j)) a += std::exp(2.0 * g.u[g.idx(i, j)]) * g.h * g.h;
  return a;
}

// Area of the sub-region selected by `keep` (active nodes only).
inline double area(const ConformalGrid& g, const std::function<bool(int, int)>& keep) {
  double a = 0.0;
  long n = 0;
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      if (g.active(i, j) && keep(i, j)) {
        a += std::exp(2.0 * g.u[g.idx(i, j)]) * g.h * g.h;
        ++n;
      }
  if (n == 0) throw invalid_input("area: empty region");
  return a;
}

inline double min_u(const ConformalGrid& g) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.n_nodes(); ++k)
    if (g.mask[k] != NodeState::outside) m = std::min(m, g.u[k]);
  return m;
}

inline double max_u(const ConformalGrid& g) {
  double m = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.n_nodes(); ++k)
    if (g.mask[k] != NodeState::outside) m = std::max(m, g.u[k]);
  return m;
}

}  // namespace ricci
