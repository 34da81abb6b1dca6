// Surface-core: grids, profiles, curvature stencils, areas, cone geometry,
// intrinsic distances, and finite-metric-space sampling.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ricci/cone.hpp"
#include "ricci/curvature.hpp"
#include "ricci/finite_metric_space.hpp"
#include "ricci/geodesic.hpp"
#include "ricci/models.hpp"
#include "ricci/revolution.hpp"
#include "ricci/sampling.hpp"
#include "ricci/surface_ops.hpp"

using namespace ricci;

namespace {

// Worst interior deviation of the discrete curvature from a constant target.
double curvature_error(const ConformalGrid& g, double target) {
  const std::vector<double> K = gauss_curvature(g);
  double worst = 0.0;
  for (int k = 0; k < g.n_nodes(); ++k)
    if (g.mask[k] == NodeState::interior) worst = std::max(worst, std::abs(K[k] - target));
  return worst;
}

}  // namespace

TEST_CASE("flat grid has zero curvature at interior nodes") {
  ConformalGrid g = make_plane_grid(21, 1.0);
  const std::vector<double> K = gauss_curvature(g);
  for (int k = 0; k < g.n_nodes(); ++k) {
    if (g.mask[k] == NodeState::interior)
      REQUIRE(std::abs(K[k]) < 1e-11);
    else
      REQUIRE(std::isnan(K[k]));
  }
}

TEST_CASE("grid smaller than 3x3 is rejected") {
  ConformalGrid g;
  g.width = 2;
  g.height = 2;
  g.h = 0.1;
  g.u.assign(4, 0.0);
  g.mask.assign(4, NodeState::interior);
  REQUIRE_THROWS_AS(g.validate(), invalid_input);
}

TEST_CASE("stereographic sphere factor gives K = 1 at second order") {
  ConformalGrid coarse = make_disc_grid(1.0, 0.02, u_sphere_stereographic);
  ConformalGrid fine = make_disc_grid(1.0, 0.01, u_sphere_stereographic);
  const double e1 = curvature_error(coarse, 1.0);
  const double e2 = curvature_error(fine, 1.0);
  REQUIRE(e1 < 5e-3);
  REQUIRE(e1 / e2 > 3.5);  // second-order stencil: halving h quarters the error
}

TEST_CASE("Poincare factor gives K = -1 at second order") {
  ConformalGrid coarse = make_disc_grid(0.7, 0.01, u_poincare);
  ConformalGrid fine = make_disc_grid(0.7, 0.005, u_poincare);
  const double e1 = curvature_error(coarse, -1.0);
  const double e2 = curvature_error(fine, -1.0);
  REQUIRE(e1 < 5e-3);
  REQUIRE(e1 / e2 > 3.5);
}

TEST_CASE("cusp factor gives K = -1 at second order") {
  ConformalGrid coarse = make_annulus_grid(0.1, 0.6, 0.002, u_cusp);
  ConformalGrid fine = make_annulus_grid(0.1, 0.6, 0.001, u_cusp);
  const double e1 = curvature_error(coarse, -1.0);
  const double e2 = curvature_error(fine, -1.0);
  REQUIRE(e1 < 0.05);
  REQUIRE(e1 / e2 > 3.5);
}

TEST_CASE("curvature commutes with constant conformal shifts") {
  ConformalGrid g = make_disc_grid(1.0, 0.05, u_sphere_stereographic);
  ConformalGrid shifted = g;
  const double kappa = 0.37;
  for (double& x : shifted.u) x += kappa;
  const std::vector<double> K0 = gauss_curvature(g);
  const std::vector<double> K1 = gauss_curvature(shifted);
  const double scale = std::exp(-2.0 * kappa);
  for (int k = 0; k < g.n_nodes(); ++k) {
    if (g.mask[k] != NodeState::interior) continue;
    REQUIRE(std::abs(K1[k] - scale * K0[k]) < 1e-12 * std::max(1.0, std::abs(K0[k])));
  }
}

TEST_CASE("flat unit square area is 1 within O(h)") {
  ConformalGrid g = make_plane_grid(101, 1.0);
  REQUIRE(std::abs(area(g) - 1.0) < 3.0 * g.h);
}

TEST_CASE("stereographic factor over the radius-10 chart disc integrates to 4 pi 100/101") {
  ConformalGrid g = make_disc_grid(10.0, 0.05, u_sphere_stereographic);
  const double expected = 4.0 * kPi * 100.0 / 101.0;
  REQUIRE(std::abs(area(g) - expected) < 0.005 * expected);
}

TEST_CASE("conformal shift scales area exactly") {
  ConformalGrid g = make_disc_grid(0.9, 0.1, u_poincare, 1);
  const double a0 = area(g);
  const double lambda = 3.7;
  for (double& x : g.u) x += 0.5 * std::log(lambda);
  REQUIRE(std::abs(area(g) - lambda * a0) < 1e-12 * lambda * a0);
}

TEST_CASE("empty area region is rejected") {
  ConformalGrid g = make_plane_grid(5, 1.0);
  REQUIRE_THROWS_AS(area(g, [](int, int) { return false; }), invalid_input);
}

TEST_CASE("sphere profile integrates to 4 pi") {
  RadialProfile p = make_sphere_profile(512);
  p.validate();
  REQUIRE(std::abs(total_area(p) - 4.0 * kPi) < 1e-3 * 4.0 * kPi);
}

TEST_CASE("thin cylinder hits its target area within 1%") {
  const double eps = 0.01;
  const double target = 8.0 * kPi * eps;
  const double circ = thin_cylinder_circumference(2.0, target);
  // circumference solves c^2/pi + L c = A exactly
  REQUIRE(std::abs(circ * circ / kPi + 2.0 * circ - target) < 1e-12);
  RadialProfile p = make_thin_cylinder_profile(2.0, circ, 2048);
  REQUIRE(std::abs(total_area(p) - target) < 0.01 * target);
}

TEST_CASE("sphere profile overlap symmetry is enforced") {
  RadialProfile p = make_sphere_profile(128);
  p.u.back() += 0.1;  // break the inversion symmetry on the overlap annulus
  REQUIRE_THROWS_AS(p.validate(), invalid_input);
}

TEST_CASE("cone distance closed forms") {
  ConeSpace plane{1.0};
  REQUIRE(std::abs(cone_distance(plane, {1.0, 0.0}, {1.0, kPi / 2}) - std::sqrt(2.0)) < 1e-14);

  ConeSpace half{0.5};
  REQUIRE(std::abs(cone_distance(half, {1.0, 0.0}, {1.0, kPi}) - std::sqrt(2.0)) < 1e-14);
  const double expected = std::sqrt(2.0 - 2.0 * std::cos(1.5));
  REQUIRE(std::abs(cone_distance(half, {1.0, 0.0}, {1.0, 3.0}) - expected) < 1e-14);

  // vertex to radius 1 is the radial geodesic
  REQUIRE(std::abs(cone_distance(half, {0.0, 0.0}, {1.0, 2.2}) - 1.0) < 1e-14);

  REQUIRE_THROWS_AS(ConeSpace{0.0}, invalid_input);
  REQUIRE_THROWS_AS(ConeSpace{1.2}, invalid_input);
}

TEST_CASE("cone distances match an independent fine-graph shortest path") {
  // Oracle: Dijkstra on a fine surface-of-revolution graph for the c = 0.5 cone.
  const double c = 0.5;
  RevolutionGraph graph(cone_revolution(c, 2.0, 400), 256);
  ConeSpace cone{c};

  const int q = 122;  // theta = 2 pi q / 256, close to (but not exactly) 3.0
  const double theta = 2.0 * kPi * q / 256.0;
  const int ring = 200;  // rho = 1.0 on the uniform 400-ring ladder to 2.0
  const double rho = graph.surface().rho[ring];

  const std::vector<double> d = graph.distances(graph.node(ring, 0));
  const double oracle = d[graph.node(ring, q)];
  const double closed = cone_distance(cone, {rho, 0.0}, {rho, theta});
  REQUIRE(std::abs(oracle - closed) < 0.02 * closed);

  const double from_vertex = graph.distances(graph.apex())[graph.node(ring, 37)];
  REQUIRE(std::abs(from_vertex - rho) < 0.015 * rho);
}

TEST_CASE("cone vertex ball area") {
  ConeSpace cone{0.5};
  REQUIRE(std::abs(cone.vertex_ball_area(2.0) - kPi * 0.5 * 4.0) < 1e-14);
}

TEST_CASE("flat grid shortest path (0,0) to (3,4) is 5 within 2%") {
  ConformalGrid g = make_plane_grid(101, 5.0);
  const int a = g.idx(0, 0);
  const int b = g.idx(60, 80);  // chart point (3, 4) at h = 0.05
  const double d = grid_distance(g, a, b);
  REQUIRE(d >= 5.0 - 1e-12);  // shortest path can't beat the straight line
  REQUIRE(std::abs(d - 5.0) < 0.02 * 5.0);
}

TEST_CASE("Poincare distance center to r = 0.5 is ln 3 within 3%") {
  ConformalGrid g = make_disc_grid(0.9, 0.01, u_poincare);
  const int mid = (g.width - 1) / 2;
  const int a = g.idx(mid, mid);
  const int b = g.idx(mid + 50, mid);  // chart point (0.5, 0)
  const double expected = std::log(3.0);
  REQUIRE(std::abs(grid_distance(g, a, b) - expected) < 0.03 * expected);
}

TEST_CASE("disconnected nodes raise no_path") {
  ConformalGrid g;
  g.width = 5;
  g.height = 5;
  g.h = 0.1;
  g.u.assign(25, 0.0);
  g.mask.assign(25, NodeState::boundary);
  for (int j = 0; j < 5; ++j) g.mask[g.idx(2, j)] = NodeState::outside;  // split the grid
  g.validate();
  REQUIRE_THROWS_AS(grid_distance(g, g.idx(0, 0), g.idx(4, 4)), no_path);
}

TEST_CASE("profile ray distance is symmetric and additive") {
  RadialProfile p = make_radial_profile(64, 0.1, 2.0, [](double r) { return -std::log(r); }, true);
  REQUIRE(std::abs(p.ray_distance(3, 40) - p.ray_distance(40, 3)) < 1e-15);
  const double direct = p.ray_distance(3, 40);
  const double via = p.ray_distance(3, 20) + p.ray_distance(20, 40);
  REQUIRE(std::abs(direct - via) < 1e-12 * std::max(1.0, direct));
}

TEST_CASE("make_model flat produces the zero factor") {
  Surface s = make_model({ModelKind::flat, Representation::grid});
  const auto& g = std::get<ConformalGrid>(s);
  for (int k = 0; k < g.n_nodes(); ++k)
    if (g.mask[k] != NodeState::outside) REQUIRE(g.u[k] == 0.0);
}

TEST_CASE("smoothed cone generator is C1 at the seam and nonnegatively curved") {
  const double c = 0.7, delta = 0.1;
  RevolutionSurface s = smoothed_cone_revolution(c, delta, 1.0, 800);
  s.validate();
  const double rho_seam = delta * std::acos(c);
  // C1 at the seam: one-sided slopes never jump by more than the curvature
  // bound |f''| <= 1/delta permits over one cell; a corner would jump O(1).
  for (size_t i = 1; i + 1 < s.rho.size(); ++i) {
    const double dl = s.rho[i] - s.rho[i - 1];
    const double dr = s.rho[i + 1] - s.rho[i];
    const double left = (s.f[i] - s.f[i - 1]) / dl;
    const double right = (s.f[i + 1] - s.f[i]) / dr;
    REQUIRE(std::abs(right - left) < 2.0 * std::max(dl, dr) / delta + 1e-12);
    REQUIRE(std::max(left, right) <= 1.0 + 1e-9);  // |f'| <= 1: K >= 0
  }
  // slope at the seam node itself matches the cone slope c
  size_t seam = 1;
  for (size_t i = 1; i + 1 < s.rho.size(); ++i)
    if (std::abs(s.rho[i] - rho_seam) < std::abs(s.rho[seam] - rho_seam)) seam = i;
  const double slope_seam =
      (s.f[seam + 1] - s.f[seam - 1]) / (s.rho[seam + 1] - s.rho[seam - 1]);
  REQUIRE(std::abs(slope_seam - c) < 0.02);
  // profile-chart curvature: spherical cap K = 1/delta^2, flat flank K = 0
  RadialProfile prof = make_smoothed_cone_profile(c, delta, 1.0, 4000, 1e-3);
  const std::vector<double> K = gauss_curvature(prof);
  int checked = 0;
  for (int i = 1; i + 1 < prof.n(); ++i) {
    if (!std::isfinite(K[i])) continue;
    REQUIRE(K[i] > -0.4);  // no negative curvature beyond seam discretization wiggle
    ++checked;
  }
  REQUIRE(checked > 100);
}

TEST_CASE("smoothed cone distances approach exact cone distances as delta shrinks") {
  const double c = 0.7;
  ConeSpace cone{c};
  const double rho = 0.8;
  const double exact = cone_distance(cone, {rho, 0.0}, {rho, kPi});
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {0.2, 0.1, 0.05}) {
    RevolutionGraph graph(smoothed_cone_revolution(c, delta, 1.0, 500), 256);
    const int ring = [&] {
      const auto& r = graph.surface().rho;
      int best = 0;
      for (size_t i = 0; i < r.size(); ++i)
        if (std::abs(r[i] - rho) < std::abs(r[best] - rho)) best = (int)i;
      return best;
    }();
    const std::vector<double> d = graph.distances(graph.node(ring, 0));
    const double got = d[graph.node(ring, 128)];
    const double err = std::abs(got - exact);
    REQUIRE(err < prev + 0.01);  // monotone up to graph metrication noise
    prev = err;
  }
  REQUIRE(prev < 0.05 * exact);
}

TEST_CASE("sample_fms basics") {
  ConformalGrid g = make_plane_grid(41, 2.0);
  const int center = g.idx(20, 20);

  SampleResult one = sample_fms(g, center, 0.5, 1);
  REQUIRE(one.fms.n == 1);
  REQUIRE(one.node_ids == std::vector<int>{center});

  SampleResult four = sample_fms(g, center, 1.0, 4);
  REQUIRE(four.fms.n == 4);
  four.fms.validate();  // symmetry + triangle inequality are hard checks
  REQUIRE(four.fms.basepoint == 0);

  // ball diameter bound: all pairwise distances <= 2 radius
  SampleResult fifty = sample_fms(g, center, 0.9, 50);
  for (int i = 0; i < fifty.fms.n; ++i)
    for (int j = 0; j < fifty.fms.n; ++j) REQUIRE(fifty.fms.dist(i, j) <= 2.0 * 0.9 + 1e-12);

  // short sample: tiny ball cannot hold 500 nodes
  SampleResult small = sample_fms(g, center, 0.11, 500);
  REQUIRE(small.short_sample);
  REQUIRE(small.fms.n < 500);
}

TEST_CASE("finite metric space validation rejects corrupt data") {
  ConformalGrid g = make_plane_grid(21, 1.0);
  SampleResult s = sample_fms(g, g.idx(10, 10), 0.45, 6);
  s.fms.validate();
  FiniteMetricSpace bad = s.fms;
  bad.at(1, 2) = bad.dist(1, 2) + 1.0;  // breaks symmetry
  REQUIRE_THROWS_AS(bad.validate(), invalid_input);
  FiniteMetricSpace bad2 = s.fms;
  bad2.at(0, 1) = 100.0;
  bad2.at(1, 0) = 100.0;  // symmetric but breaks the triangle inequality
  REQUIRE_THROWS_AS(bad2.validate(), invalid_input);
}

TEST_CASE("polar layout closed-form samplers agree with their spaces") {
  PolarLayout lay;
  FiniteMetricSpace flat = flat_disc_fms(1.0, lay);
  flat.validate();
  REQUIRE(flat.n == lay.points());

  FiniteMetricSpace cone = cone_vertex_fms(0.7, 1.0, lay);
  cone.validate();
  // basepoint row: ring radii are exact geodesic radii
  for (int ring = 1; ring <= lay.n_rings; ++ring) {
    const int node = 1 + (ring - 1) * lay.n_cols;
    REQUIRE(std::abs(cone.dist(0, node) - (double)ring / lay.n_rings) < 1e-12);
  }
}
