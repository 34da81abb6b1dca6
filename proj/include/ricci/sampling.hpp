#pragma once

// Finite samples of the continuous spaces, as pointed FiniteMetricSpaces.
// Greedy farthest-point sampling keeps the sample spread deterministic
// (ties broken by lowest node index); polar layouts give matched samples of
// rotationally symmetric spaces so different spaces can be compared
// point-for-point.

#include <vector>

#include "ricci/common.hpp"
#include "ricci/cone.hpp"
#include "ricci/conformal_grid.hpp"
#include "ricci/finite_metric_space.hpp"
#include "ricci/geodesic.hpp"
#include "ricci/radial_profile.hpp"
#include "ricci/revolution.hpp"

namespace ricci {

struct SampleResult {
  FiniteMetricSpace fms;
  std::vector<int> node_ids;  // source node per sample point
  bool short_sample = false;  // fewer candidates than requested points
};

// Farthest-point sample of the metric ball around `basepoint` on a grid.
// Distances are full-space Dijkstra distances; n Dijkstra passes total.
inline SampleResult sample_fms(const ConformalGrid& g, int basepoint, double radius, int n) {
  if (n < 1) throw invalid_input("sample_fms: need n >= 1");
  auto d0 = grid_distances(g, basepoint);
  std::vector<int> candidates;
  for (int k = 0; k < g.n_nodes(); ++k)
    if (d0[k] <= radius) candidates.push_back(k);
  SampleResult out;
  out.short_sample = (int)candidates.size() < n;
  int take = std::min<int>(n, (int)candidates.size());
  std::vector<std::vector<double>> rows;
  std::vector<double> min_dist(candidates.size(), std::numeric_limits<double>::infinity());
  out.node_ids.push_back(basepoint);
  rows.push_back(d0);
  while ((int)out.node_ids.size() < take) {
    for (size_t c = 0; c < candidates.size(); ++c)
      min_dist[c] = std::min(min_dist[c], rows.back()[candidates[c]]);
    int best = -1;
    double best_d = -1.0;
    for (size_t c = 0; c < candidates.size(); ++c)
      if (min_dist[c] > best_d + 1e-15 * (1.0 + best_d)) {
        best_d = min_dist[c];
        best = (int)c;
      }
    out.node_ids.push_back(candidates[best]);
    rows.push_back(grid_distances(g, candidates[best]));
  }
  int m = (int)out.node_ids.size();
  out.fms.n = m;
  out.fms.basepoint = 0;
  out.fms.d.assign((size_t)m * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out.fms.at(a, b) = rows[a][out.node_ids[b]];
  // Dijkstra is symmetric only up to rounding; enforce it exactly.
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      double v = 0.5 * (out.fms.dist(a, b) + out.fms.dist(b, a));
      out.fms.at(a, b) = out.fms.at(b, a) = v;
    }
  out.fms.validate();
  return out;
}

// Same on a radial ray (1D; distances along the ray).
inline SampleResult sample_fms(const RadialProfile& p, int basepoint, double radius, int n) {
  if (n < 1) throw invalid_input("sample_fms: need n >= 1");
  std::vector<int> candidates;
  for (int i = 0; i < p.n(); ++i)
    if (p.ray_distance(basepoint, i) <= radius) candidates.push_back(i);
  SampleResult out;
  out.short_sample = (int)candidates.size() < n;
  int take = std::min<int>(n, (int)candidates.size());
  out.node_ids.push_back(basepoint);
  std::vector<double> min_dist(candidates.size(), std::numeric_limits<double>::infinity());
  while ((int)out.node_ids.size() < take) {
    int last = out.node_ids.back();
    for (size_t c = 0; c < candidates.size(); ++c)
      min_dist[c] = std::min(min_dist[c], p.ray_distance(last, candidates[c]));
    int best = -1;
    double best_d = -1.0;
    for (size_t c = 0; c < candidates.size(); ++c)
      if (min_dist[c] > best_d + 1e-15 * (1.0 + best_d)) {
        best_d = min_dist[c];
        best = (int)c;
      }
    out.node_ids.push_back(candidates[best]);
  }
  int m = (int)out.node_ids.size();
  out.fms.n = m;
  out.fms.basepoint = 0;
  out.fms.d.assign((size_t)m * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      out.fms.at(a, b) = p.ray_distance(out.node_ids[a], out.node_ids[b]);
  out.fms.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Matched polar layouts: center point + n_rings rings of n_cols points.

struct PolarLayout {
  int n_rings = 6;
  int n_cols = 12;
  int points() const { return 1 + n_rings * n_cols; }
};

// Flat disc reference sample (exact Euclidean distances).
inline FiniteMetricSpace flat_disc_fms(double radius, const PolarLayout& lay = {}) {
  int m = lay.points();
  std::vector<double> px(m), py(m);
  px[0] = py[0] = 0.0;
  for (int k = 1; k <= lay.n_rings; ++k)
    for (int j = 0; j < lay.n_cols; ++j) {
      double rr = radius * k / lay.n_rings, th = 2.0 * kPi * j / lay.n_cols;
      int id = 1 + (k - 1) * lay.n_cols + j;
      px[id] = rr * std::cos(th);
      py[id] = rr * std::sin(th);
    }
  FiniteMetricSpace f;
  f.n = m;
  f.basepoint = 0;
  f.d.assign((size_t)m * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) f.at(a, b) = std::hypot(px[a] - px[b], py[a] - py[b]);
  f.validate();
  return f;
}

// Cone ball around the vertex (closed-form distances).
inline FiniteMetricSpace cone_vertex_fms(double c, double radius, const PolarLayout& lay = {}) {
  ConeSpace cone(c);
  int m = lay.points();
  std::vector<ConePoint> pts(m);
  pts[0] = {0.0, 0.0};
  for (int k = 1; k <= lay.n_rings; ++k)
    for (int j = 0; j < lay.n_cols; ++j)
      pts[1 + (k - 1) * lay.n_cols + j] = {radius * k / lay.n_rings,
                                           2.0 * kPi * j / lay.n_cols};
  FiniteMetricSpace f;
  f.n = m;
  f.basepoint = 0;
  f.d.assign((size_t)m * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) f.at(a, b) = cone_distance(cone, pts[a], pts[b]);
  f.validate();
  return f;
}

// Cone ball around an off-vertex point at tip distance rho0. The layout is
// placed in the developed (unrolled) plane around the point and mapped back to
// cone coordinates; valid while the ball stays clear of the cut locus.
inline FiniteMetricSpace cone_offset_fms(double c, double rho0, double radius,
                                         const PolarLayout& lay = {}) {
  ConeSpace cone(c);
  if (!(radius < rho0)) throw invalid_input("cone_offset_fms: ball must exclude the vertex");
  int m = lay.points();
  std::vector<ConePoint> pts(m);
  auto place = [&](double a, double b) -> ConePoint {
    double R = std::hypot(rho0 + a, b);
    double phi = std::atan2(b, rho0 + a);
    return {R, phi / c};
  };
  pts[0] = place(0.0, 0.0);
  for (int k = 1; k <= lay.n_rings; ++k)
    for (int j = 0; j < lay.n_cols; ++j) {
      double rr = radius * k / lay.n_rings, th = 2.0 * kPi * j / lay.n_cols;
      pts[1 + (k - 1) * lay.n_cols + j] = place(rr * std::cos(th), rr * std::sin(th));
    }
  FiniteMetricSpace f;
  f.n = m;
  f.basepoint = 0;
  f.d.assign((size_t)m * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) f.at(a, b) = cone_distance(cone, pts[a], pts[b]);
  f.validate();
  return f;
}

// Polar sample of a surface of revolution around the apex, distances from the
// polar-graph Dijkstra. The graph's theta count must be a multiple of
// lay.n_cols so sample columns land on graph columns.
inline FiniteMetricSpace revolution_apex_fms(const RevolutionGraph& graph, double radius,
                                             const PolarLayout& lay = {}) {
  if (!graph.has_apex()) throw invalid_input("revolution_apex_fms: graph has no apex");
  if (graph.n_theta() % lay.n_cols != 0)
    throw invalid_input("revolution_apex_fms: column counts incompatible");
  const auto& rho = graph.surface().rho;
  auto ring_of = [&](double target) {
    int best = 1;
    double err = std::numeric_limits<double>::infinity();
    for (int i = 1; i < (int)rho.size(); ++i)
      if (std::fabs(rho[i] - target) < err) {
        err = std::fabs(rho[i] - target);
        best = i;
      }
    return best;
  };
  int stride = graph.n_theta() / lay.n_cols;
  std::vector<int> nodes;
  nodes.push_back(graph.apex());
  for (int k = 1; k <= lay.n_rings; ++k) {
    int ring = ring_of(radius * k / lay.n_rings);
    for (int j = 0; j < lay.n_cols; ++j) nodes.push_back(graph.node(ring, j * stride));
  }
  int m = (int)nodes.size();
  FiniteMetricSpace f;
  f.n = m;
  f.basepoint = 0;
  f.d.assign((size_t)m * m, 0.0);
  for (int a = 0; a < m; ++a) {
    auto da = graph.distances(nodes[a]);
    for (int b = 0; b < m; ++b) f.at(a, b) = da[nodes[b]];
  }
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      double v = 0.5 * (f.dist(a, b) + f.dist(b, a));
      f.at(a, b) = f.at(b, a) = v;
    }
  f.validate();
  return f;
}

}  // namespace ricci
