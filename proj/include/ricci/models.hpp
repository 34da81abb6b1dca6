#pragma once

// Builders for the standard model geometries, as lattice charts
// (ConformalGrid), radial rays (RadialProfile), or generator profiles
// (RevolutionSurface). Conformal factors:
//
//   flat              u = 0
//   round sphere      u = ln(2 / (1 + r^2))        (stereographic chart, K = 1)
//   hyperbolic disc   u = ln(2 / (1 - r^2))        (unit-disc chart,     K = -1)
//   hyperbolic cusp   u = -ln(r ln(1/r)), r < 1    (punctured disc,      K = -1)
//   flat cone         u = (c-1) ln rho + ln c      (chart radius rho = geodesic^ (1/c))
//
// The smoothed cone replaces the tip with a tangent spherical cap of radius
// delta (C^1 seam, K >= 0); the thin cylinder is a sphere-topology surface of
// length `length` capped by hemispheres of the given circumference.

#include <functional>
#include <variant>

#include "ricci/common.hpp"
#include "ricci/conformal_grid.hpp"
#include "ricci/radial_profile.hpp"
#include "ricci/revolution.hpp"

namespace ricci {

inline double u_flat(double, double) { return 0.0; }

inline double u_sphere_stereographic(double x, double y) {
  return std::log(2.0) - std::log1p(x * x + y * y);
}

inline double u_poincare(double x, double y) {
  double r2 = x * x + y * y;
  if (r2 >= 1.0) throw invalid_input("u_poincare: chart point outside the unit disc");
  return std::log(2.0) - std::log1p(-r2);
}

inline double u_cusp(double x, double y) {
  double r = std::hypot(x, y);
  if (r <= 0.0 || r >= 1.0) throw invalid_input("u_cusp: need 0 < r < 1");
  return -std::log(r * std::log(1.0 / r));
}

// ---------------------------------------------------------------------------
// Lattice charts

using FactorFn = std::function<double(double, double)>;

namespace detail {

inline void demote_incomplete_interiors(ConformalGrid& g) {
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      if (g.interior(i, j) &&
          !(g.active(i - 1, j) && g.active(i + 1, j) && g.active(i, j - 1) && g.active(i, j + 1)))
        g.mask[g.idx(i, j)] = NodeState::boundary;
}

inline void fill_factor(ConformalGrid& g, const FactorFn& f) {
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i)
      if (g.active(i, j)) g.u[g.idx(i, j)] = f(g.x_of(i), g.y_of(j));
}

}  // namespace detail

// Square chart [0, L]^2 with an n x n lattice; the outermost `collar` rings
// are boundary nodes.
inline ConformalGrid make_plane_grid(int n, double length, const FactorFn& f = u_flat,
                                     int collar = 1) {
  if (n < 3) throw invalid_input("make_plane_grid: need n >= 3");
  ConformalGrid g;
  g.width = g.height = n;
  g.h = length / (n - 1);
  g.x0 = g.y0 = 0.0;
  g.chart = ChartKind::plane;
  g.collar = collar;
  g.u.assign(g.n_nodes(), 0.0);
  g.mask.assign(g.n_nodes(), NodeState::interior);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i < collar || j < collar || i >= n - collar || j >= n - collar)
        g.mask[g.idx(i, j)] = NodeState::boundary;
  detail::fill_factor(g, f);
  g.validate();
  return g;
}

// Disc chart of the given radius centered at the origin. Nodes with
// chart radius beyond `radius` are outside; the outermost `collar` spacings
// inside the rim are boundary nodes.
inline ConformalGrid make_disc_grid(double radius, double h_target, const FactorFn& f,
                                    int collar = 3, ChartKind kind = ChartKind::disc) {
  if (!(radius > 0.0) || !(h_target > 0.0))
    throw invalid_input("make_disc_grid: radius and spacing must be positive");
  int m = (int)std::ceil(radius / h_target);
  ConformalGrid g;
  g.width = g.height = 2 * m + 1;
  g.h = radius / m;
  g.x0 = g.y0 = -radius;
  g.chart = kind;
  g.outer_radius = radius;
  g.collar = collar;
  g.u.assign(g.n_nodes(), 0.0);
  g.mask.assign(g.n_nodes(), NodeState::outside);
  double eps = 1e-9 * g.h;
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      double r = std::hypot(g.x_of(i), g.y_of(j));
      if (r <= radius + eps)
        g.mask[g.idx(i, j)] =
            (r > radius - collar * g.h - eps) ? NodeState::boundary : NodeState::interior;
    }
  detail::demote_incomplete_interiors(g);
  detail::fill_factor(g, f);
  g.validate();
  return g;
}

// Annular chart r_in <= r <= r_out; both rims get `collar`-wide boundary rings.
inline ConformalGrid make_annulus_grid(double r_in, double r_out, double h_target,
                                       const FactorFn& f, int collar = 3) {
  if (!(0.0 < r_in && r_in < r_out))
    throw invalid_input("make_annulus_grid: need 0 < r_in < r_out");
  int m = (int)std::ceil(r_out / h_target);
  ConformalGrid g;
  g.width = g.height = 2 * m + 1;
  g.h = r_out / m;
  g.x0 = g.y0 = -r_out;
  g.chart = ChartKind::annulus;
  g.outer_radius = r_out;
  g.inner_radius = r_in;
  g.collar = collar;
  g.u.assign(g.n_nodes(), 0.0);
  g.mask.assign(g.n_nodes(), NodeState::outside);
  double eps = 1e-9 * g.h;
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      double r = std::hypot(g.x_of(i), g.y_of(j));
      if (r >= r_in - eps && r <= r_out + eps)
        g.mask[g.idx(i, j)] = (r < r_in + collar * g.h + eps || r > r_out - collar * g.h - eps)
                                  ? NodeState::boundary
                                  : NodeState::interior;
    }
  detail::demote_incomplete_interiors(g);
  detail::fill_factor(g, f);
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Radial profiles

// Flat or prescribed-factor ray on [0, R] (uniform spacing).
inline RadialProfile make_radial_profile(int n, double r_min, double r_max,
                                         const std::function<double(double)>& u_of_r,
                                         bool log_spaced = false) {
  if (n < 3) throw invalid_input("make_radial_profile: need n >= 3");
  if (log_spaced && !(r_min > 0.0))
    throw invalid_input("make_radial_profile: log spacing needs r_min > 0");
  RadialProfile p;
  p.topology = ProfileTopology::plane_chart;
  p.r.resize(n);
  p.u.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = (double)i / (n - 1);
    p.r[i] = log_spaced ? r_min * std::pow(r_max / r_min, t) : r_min + (r_max - r_min) * t;
    p.u[i] = u_of_r(p.r[i]);
  }
  p.validate();
  return p;
}

// Round unit sphere in log-radial (cylinder) gauge: v(s) = -ln cosh s, nodes
// uniform in s from the pole cut up to the overlap radius r_ov > 1, with the
// equator s = 0 exactly on the grid.
inline RadialProfile make_sphere_profile(int n_min, double pole_cut = 1e-3,
                                         double r_ov = 1.25) {
  if (!(pole_cut > 0.0 && pole_cut < 0.5) || !(r_ov > 1.0))
    throw invalid_input("make_sphere_profile: bad pole cut or overlap radius");
  double s_min = std::log(pole_cut), s_ov = std::log(r_ov);
  double ds0 = (s_ov - s_min) / std::max(2, n_min - 1);
  int k0 = (int)std::ceil(-s_min / ds0);
  double ds = -s_min / k0;
  int n_ov = std::max(2, (int)std::ceil(s_ov / ds));
  RadialProfile p;
  p.topology = ProfileTopology::sphere_double_chart;
  p.equator_index = k0;
  int n = k0 + n_ov + 1;
  p.r.resize(n);
  p.u.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = (i - k0) * ds;
    double v = -std::log(std::cosh(s));
    p.r[i] = std::exp(s);
    p.u[i] = v - s;
  }
  p.r[k0] = 1.0;  // pin the equator node exactly
  p.validate();
  return p;
}

// Circumference that gives a length-L cylinder with hemispherical caps the
// target total area (solves c^2/pi + L c = A).
inline double thin_cylinder_circumference(double length, double target_area) {
  if (!(length > 0.0) || !(target_area > 0.0))
    throw invalid_input("thin_cylinder_circumference: positive inputs required");
  return 0.5 * kPi * (-length + std::sqrt(length * length + 4.0 * target_area / kPi));
}

// Thin cylinder with hemispherical caps, as a sphere-topology radial profile
// in cylinder gauge. cap_cut is the fraction of the cap radius at which the
// pole is truncated (the remainder is tracked as a flat cap).
inline RadialProfile make_thin_cylinder_profile(double length, double circumference, int n_min,
                                                double cap_cut = 1e-2, double r_ov = 1.25) {
  if (!(length > 0.0) || !(circumference > 0.0))
    throw invalid_input("make_thin_cylinder_profile: positive dimensions required");
  double a = circumference / (2.0 * kPi);  // cap radius = cylinder radius
  double s_seam = -(0.5 * length) / a;     // cap joins cylinder here (south side)
  double W = std::acosh(1.0 / cap_cut);    // extra log-width resolved into the cap
  double s_min = s_seam - W, s_ov = std::log(r_ov);
  double ds0 = (s_ov - s_min) / std::max(2, n_min - 1);
  int k0 = (int)std::ceil(-s_min / ds0);
  double ds = -s_min / k0;
  int n_ov = std::max(2, (int)std::ceil(s_ov / ds));
  RadialProfile p;
  p.topology = ProfileTopology::sphere_double_chart;
  p.equator_index = k0;
  int n = k0 + n_ov + 1;
  p.r.resize(n);
  p.u.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = (i - k0) * ds;
    double w = std::fabs(s) - std::fabs(s_seam);  // arc position past the seam
    double v = std::log(a) - (w > 0.0 ? std::log(std::cosh(w)) : 0.0);
    p.r[i] = std::exp(s);
    p.u[i] = v - s;
  }
  p.r[k0] = 1.0;
  p.validate();
  return p;
}

// Exact flat cone as a radial profile (chart radius rho, geodesic tip
// distance rho^c). Nodes log-spaced in chart radius between the geodesic
// radii [tip_cut, R_geo].
inline RadialProfile make_cone_profile(double c, double R_geo, int n, double tip_cut) {
  if (!(c > 0.0) || c > 1.0) throw invalid_input("make_cone_profile: need 0 < c <= 1");
  if (!(0.0 < tip_cut && tip_cut < R_geo)) throw invalid_input("make_cone_profile: bad radii");
  double rho_min = std::pow(tip_cut, 1.0 / c), rho_max = std::pow(R_geo, 1.0 / c);
  return make_radial_profile(
      n, rho_min, rho_max,
      [c](double rho) { return (c - 1.0) * std::log(rho) + std::log(c); }, true);
}

// ---------------------------------------------------------------------------
// Generator profiles (surfaces of revolution)

inline RevolutionSurface cone_revolution(double c, double rho_max, int n_rings) {
  if (!(c > 0.0) || c > 1.0) throw invalid_input("cone_revolution: need 0 < c <= 1");
  RevolutionSurface s;
  s.rho.resize(n_rings);
  s.f.resize(n_rings);
  for (int i = 0; i < n_rings; ++i) {
    s.rho[i] = rho_max * i / (n_rings - 1);
    s.f[i] = c * s.rho[i];
  }
  return s;
}

// Smoothed cone: spherical cap of radius delta for rho <= delta*arccos(c)
// (f = delta sin(rho/delta)), tangent cone line beyond.
inline RevolutionSurface smoothed_cone_revolution(double c, double delta, double rho_max,
                                                  int n_rings) {
  if (!(c > 0.0) || c > 1.0) throw invalid_input("smoothed_cone_revolution: need 0 < c <= 1");
  if (!(delta > 0.0)) throw invalid_input("smoothed_cone_revolution: need delta > 0");
  double rho_seam = delta * std::acos(c);
  double f_seam = delta * std::sqrt(1.0 - c * c);
  RevolutionSurface s;
  s.rho.resize(n_rings);
  s.f.resize(n_rings);
  for (int i = 0; i < n_rings; ++i) {
    double rho = rho_max * i / (n_rings - 1);
    s.rho[i] = rho;
    s.f[i] = (rho <= rho_seam) ? delta * std::sin(rho / delta) : f_seam + c * (rho - rho_seam);
  }
  return s;
}

// Smoothed cone as a conformal radial profile. Chart coordinate normalized so
// the cone region matches the exact cone chart of the tangent (virtual)
// vertex: s = (1/c) ln(f/c) there, s = ln tan(rho/(2 delta)) + C on the cap.
inline RadialProfile make_smoothed_cone_profile(double c, double delta, double R_geo, int n,
                                                double tip_cut) {
  if (!(c > 0.0) || c >= 1.0)
    throw invalid_input("make_smoothed_cone_profile: need 0 < c < 1");
  if (!(0.0 < tip_cut && tip_cut < delta * std::acos(c)) || !(R_geo > delta * std::acos(c)))
    throw invalid_input("make_smoothed_cone_profile: tip_cut must cut into the cap");
  double rho_seam = delta * std::acos(c);
  double f_seam = delta * std::sqrt(1.0 - c * c);
  double s_seam = (1.0 / c) * std::log(f_seam / c);
  double cap_C = s_seam - std::log(std::tan(rho_seam / (2.0 * delta)));
  auto s_of_rho = [&](double rho) {
    if (rho <= rho_seam) return std::log(std::tan(rho / (2.0 * delta))) + cap_C;
    return (1.0 / c) * std::log((f_seam + c * (rho - rho_seam)) / c);
  };
  auto f_of_s = [&](double s) {
    if (s <= s_seam) {
      double rho = 2.0 * delta * std::atan(std::exp(s - cap_C));
      return delta * std::sin(rho / delta);
    }
    return c * std::exp(c * s);
  };
  double s_lo = s_of_rho(tip_cut), s_hi = s_of_rho(R_geo);
  RadialProfile p;
  p.topology = ProfileTopology::plane_chart;
  p.r.resize(n);
  p.u.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = s_lo + (s_hi - s_lo) * i / (n - 1);
    p.r[i] = std::exp(s);
    p.u[i] = std::log(f_of_s(s)) - s;
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Model catalogue

enum class ModelKind {
  flat,
  round_sphere,
  poincare_disc,
  hyperbolic_cusp,
  cone,
  cone_smoothed,
  thin_cylinder
};

enum class Representation { grid, profile };

struct ModelSpec {
  ModelKind kind = ModelKind::flat;
  Representation rep = Representation::grid;
  int n = 65;               // lattice side / minimum profile nodes
  double extent = 1.0;      // chart radius (grid) or outer radius (profile)
  double inner = 0.0;       // annulus inner radius / profile inner cut
  double h_target = 0.02;   // grid spacing target
  int collar = 3;           // grid boundary ring width
  double cone_c = 0.5;      // cone angle factor
  double cone_delta = 0.1;  // smoothing cap radius
  double cyl_length = 2.0;  // thin cylinder dimensions
  double cyl_circumference = 0.12;
};

using Surface = std::variant<ConformalGrid, RadialProfile>;

inline Surface make_model(const ModelSpec& m) {
  if (m.rep == Representation::grid) {
    switch (m.kind) {
      case ModelKind::flat:
        return make_plane_grid(m.n, m.extent, u_flat, std::max(1, m.collar));
      case ModelKind::round_sphere:
        return make_disc_grid(m.extent, m.h_target, u_sphere_stereographic, m.collar,
                              ChartKind::sphere_stereographic);
      case ModelKind::poincare_disc:
        return make_disc_grid(m.extent, m.h_target, u_poincare, m.collar);
      case ModelKind::hyperbolic_cusp:
        return make_annulus_grid(m.inner, m.extent, m.h_target, u_cusp, m.collar);
      default:
        throw invalid_input("make_model: no lattice form for this model");
    }
  }
  switch (m.kind) {
    case ModelKind::flat:
      return make_radial_profile(m.n, 0.0, m.extent, [](double) { return 0.0; });
    case ModelKind::round_sphere:
      return make_sphere_profile(m.n);
    case ModelKind::poincare_disc:
      return make_radial_profile(m.n, 0.0, m.extent, [](double r) {
        return std::log(2.0) - std::log1p(-r * r);
      });
    case ModelKind::hyperbolic_cusp:
      return make_radial_profile(
          m.n, m.inner, m.extent,
          [](double r) { return -std::log(r * std::log(1.0 / r)); }, true);
    case ModelKind::cone:
      return make_cone_profile(m.cone_c, m.extent, m.n, m.inner);
    case ModelKind::cone_smoothed:
      return make_smoothed_cone_profile(m.cone_c, m.cone_delta, m.extent, m.n, m.inner);
    case ModelKind::thin_cylinder:
      return make_thin_cylinder_profile(m.cyl_length, m.cyl_circumference, m.n);
  }
  throw invalid_input("make_model: unknown model kind");
}

}  // namespace ricci
