#pragma once

// Rotationally symmetric surfaces stored as a single radial ray: the metric is
// e^{2u(r)} (dr^2 + r^2 dtheta^2) in polar chart coordinates. Two topologies:
//
//  plane_chart         nodes on [0, R] or [r_in, R]; boundary handled by the
//                      flow's BoundaryMode.
//  sphere_double_chart closed surface given as two stereographic charts glued
//                      over the unit annulus. The stored ray is chart A up to
//                      r_ov > 1; chart B is the inversion image. Equator-
//                      symmetric data means v(s) = u + ln r is even in s = ln r,
//                      which is how the overlap consistency is validated. The
//                      tiny pole cap below r[0] is tracked as a flat disc.

#include <vector>

#include "ricci/common.hpp"

namespace ricci {

enum class ProfileTopology { plane_chart, sphere_double_chart };

struct RadialProfile {
  ProfileTopology topology = ProfileTopology::plane_chart;
  std::vector<double> r;  // strictly increasing chart radii
  std::vector<double> u;  // conformal factor samples
  int equator_index = -1; // sphere topology: node with r == 1

  int n() const { return (int)r.size(); }

  void validate(double overlap_tol = 1e-9) const {
    if (n() < 3) throw invalid_input("RadialProfile: need at least 3 nodes");
    if (u.size() != r.size()) throw invalid_input("RadialProfile: field size mismatch");
    for (int i = 0; i < n(); ++i) {
      if (!finite(u[i]) || !finite(r[i]))
        throw invalid_input("RadialProfile: non-finite node");
      if (i > 0 && !(r[i] > r[i - 1]))
        throw invalid_input("RadialProfile: radii must be strictly increasing");
    }
    if (r[0] < 0.0) throw invalid_input("RadialProfile: negative radius");
    if (topology == ProfileTopology::sphere_double_chart) {
      if (equator_index <= 0 || equator_index >= n() - 1)
        throw invalid_input("RadialProfile: sphere needs an interior equator node");
      if (std::fabs(r[equator_index] - 1.0) > 1e-12)
        throw invalid_input("RadialProfile: equator node must sit at r = 1");
      if (r[0] <= 0.0) throw invalid_input("RadialProfile: sphere chart excludes r = 0");
      // Chart gluing: u(r) and the inverted chart factor u(1/r) - 2 ln r must
      // agree over the overlap annulus, i.e. v(s) = u + ln r is even in s.
      for (int k = 1; equator_index + k < n(); ++k) {
        int p = equator_index + k, q = equator_index - k;
        if (q < 0) throw invalid_input("RadialProfile: overlap wider than interior");
        double sp = std::log(r[p]), sq = std::log(r[q]);
        if (std::fabs(sp + sq) > 1e-9)
          throw invalid_input("RadialProfile: overlap nodes not inversion-symmetric");
        double vp = u[p] + sp, vq = u[q] + sq;
        if (std::fabs(vp - vq) > overlap_tol * (1.0 + std::fabs(vq)))
          throw invalid_input("RadialProfile: chart factors disagree under inversion");
      }
    }
  }

  // Metric length along the ray between nodes i and j (trapezoid of e^u dr).
  double ray_distance(int i, int j) const {
    if (i < 0 || j < 0 || i >= n() || j >= n())
      throw invalid_input("ray_distance: node index out of range");
    if (i > j) std::swap(i, j);
    double len = 0.0;
    for (int k = i; k < j; ++k)
      len += 0.5 * (std::exp(u[k]) + std::exp(u[k + 1])) * (r[k + 1] - r[k]);
    return len;
  }
};

// Area of the annular band between consecutive nodes [i, i+1]:
// 2 pi * trapezoid of e^{2u} r dr.
inline double band_area(const RadialProfile& p, int i) {
  double fa = std::exp(2.0 * p.u[i]) * p.r[i];
  double fb = std::exp(2.0 * p.u[i + 1]) * p.r[i + 1];
  return 2.0 * kPi * 0.5 * (fa + fb) * (p.r[i + 1] - p.r[i]);
}

// Residual flat cap below the first node (sphere topology): the circle at r[0]
// has metric radius ~ e^{u0} r0, and the cut-off cap is flat to O(radius^2).
inline double pole_cap_area(const RadialProfile& p) {
  return kPi * std::exp(2.0 * p.u[0]) * sq(p.r[0]);
}

// Total metric area. Sphere topology sums both charts over their unit discs
// (they tile the surface, overlapping only on the measure-zero unit circle)
// plus the two pole caps; by the stored equator symmetry chart B contributes
// the same as chart A.
inline double total_area(const RadialProfile& p) {
  if (p.topology == ProfileTopology::sphere_double_chart) {
    double half = 0.0;
    for (int i = 0; i < p.equator_index; ++i) half += band_area(p, i);
    return 2.0 * (half + pole_cap_area(p));
  }
  double a = 0.0;
  for (int i = 0; i + 1 < p.n(); ++i) a += band_area(p, i);
  return a;
}

// Largest metric gap between consecutive nodes; the discretization scale used
// by tolerance formulas.
inline double max_metric_spacing(const RadialProfile& p) {
  double m = 0.0;
  for (int i = 0; i + 1 < p.n(); ++i)
    m = std::max(m, 0.5 * (std::exp(p.u[i]) + std::exp(p.u[i + 1])) * (p.r[i + 1] - p.r[i]));
  return m;
}

inline double min_u(const RadialProfile& p) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : p.u) m = std::min(m, x);
  return m;
}

inline double max_u(const RadialProfile& p) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : p.u) m = std::max(m, x);
  return m;
}

}  // namespace ricci
