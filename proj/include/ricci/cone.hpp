#pragma once

// Exact flat cone: metric dr^2 + c^2 r^2 dtheta^2 with total vertex angle
// 2 pi c, 0 < c <= 1. Points are (r, theta) with theta taken mod 2 pi.
// Distances come from unrolling the cone to a wedge of angle 2 pi c: the
// angular gap seen by the flat wedge is dphi = min(c |dtheta|, 2 pi c - c |dtheta|)
// <= pi c <= pi, so the straight chord never exceeds r1 + r2 and no
// through-vertex comparison is needed.

#include "ricci/common.hpp"

namespace ricci {

struct ConePoint {
  double r = 0.0;
  double theta = 0.0;
};

struct ConeSpace {
  double c = 1.0;  // angle factor, total angle 2 pi c

  explicit ConeSpace(double c_) : c(c_) {
    if (!(c > 0.0) || c > 1.0) throw invalid_input("ConeSpace: need 0 < c <= 1");
  }

  double total_angle() const { return 2.0 * kPi * c; }

  // Area of the metric ball of radius r centered at the vertex.
  double vertex_ball_area(double r) const {
    if (r < 0.0) throw invalid_input("vertex_ball_area: negative radius");
    return kPi * c * r * r;
  }
};

inline double cone_distance(const ConeSpace& cone, const ConePoint& a, const ConePoint& b) {
  if (a.r < 0.0 || b.r < 0.0) throw invalid_input("cone_distance: negative radius");
  double dtheta = std::fabs(a.theta - b.theta);
  dtheta = std::fmod(dtheta, 2.0 * kPi);
  double gap = cone.c * dtheta;
  double dphi = std::min(gap, cone.total_angle() - gap);
  double d2 = a.r * a.r + b.r * b.r - 2.0 * a.r * b.r * std::cos(dphi);
  return std::sqrt(std::max(0.0, d2));
}

}  // namespace ricci
