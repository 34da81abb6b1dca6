#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ricci/curvature.hpp"
#include "ricci/flow.hpp"
#include "ricci/models.hpp"
#include "ricci/surface_ops.hpp"

using namespace ricci;

namespace {

double max_u_error(const Surface& got, const Surface& want) {
  const auto& a = surface_u(got);
  const auto& b = surface_u(want);
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("flat metric is a fixed point of both schemes") {
  ConformalGrid g = make_plane_grid(21, 1.0);
  Surface s = g;

  SolverConfig cfg;
  cfg.scheme = Scheme::explicit_euler;
  flow_step(s, 0.0, 1e-4, cfg, BoundaryMode::neumann());
  for (double x : surface_u(s)) REQUIRE(x == 0.0);

  cfg.scheme = Scheme::implicit_euler;
  flow_step(s, 0.0, 1e-2, cfg, BoundaryMode::neumann());
  for (double x : surface_u(s)) REQUIRE(x == 0.0);
}

TEST_CASE("constant conformal factor with zero-flux rim is preserved exactly") {
  ConformalGrid g = make_plane_grid(17, 1.0, [](double, double) { return 0.7; });
  Surface s = g;
  SolverConfig cfg;
  cfg.scheme = Scheme::explicit_euler;
  flow_step(s, 0.0, 1e-4, cfg, BoundaryMode::neumann());
  cfg.scheme = Scheme::implicit_euler;
  flow_step(s, 0.0, 1e-2, cfg, BoundaryMode::neumann());
  for (int k = 0; k < g.n_nodes(); ++k)
    if (g.mask[k] != NodeState::outside) REQUIRE(std::get<ConformalGrid>(s).u[k] == 0.7);
}

TEST_CASE("explicit step above the CFL cap is refused") {
  ConformalGrid g = make_plane_grid(21, 2.0);  // h = 0.1, cap = 0.8 h^2 / 4 = 2e-3
  Surface s = g;
  SolverConfig cfg;
  cfg.scheme = Scheme::explicit_euler;
  REQUIRE_THROWS_AS(flow_step(s, 0.0, 0.1, cfg, BoundaryMode::neumann()), refuse_step);
  REQUIRE_NOTHROW(flow_step(s, 0.0, 1e-3, cfg, BoundaryMode::neumann()));
}

TEST_CASE("single implicit step tracks the shrinking round sphere at second order") {
  RadialProfile p = make_sphere_profile(1024);
  auto step_error = [&](double dt) {
    Surface s = p;
    SolverConfig cfg;
    cfg.scheme = Scheme::implicit_euler;
    flow_step(s, 0.0, dt, cfg);
    const double shift = 0.5 * std::log(1.0 - 2.0 * dt);
    const auto& u = std::get<RadialProfile>(s).u;
    double m = 0.0;
    for (int i = 0; i < p.n(); ++i) m = std::max(m, std::abs(u[i] - (p.u[i] + shift)));
    return m;
  };
  const double e1 = step_error(0.01);
  const double e2 = step_error(0.005);
  REQUIRE(e1 < 5e-4);
  REQUIRE(e1 / e2 > 3.0);
  REQUIRE(e1 / e2 < 5.5);
}

TEST_CASE("single implicit step tracks the expanding hyperbolic disc at second order") {
  ConformalGrid g = make_disc_grid(0.5, 0.02, u_poincare);
  auto closed = [](double t, double x, double y) {
    return u_poincare(x, y) + 0.5 * std::log1p(2.0 * t);
  };
  auto step_error = [&](double dt) {
    Surface s = g;
    SolverConfig cfg;
    cfg.scheme = Scheme::implicit_euler;
    flow_step(s, 0.0, dt, cfg, BoundaryMode::dirichlet(closed));
    const double shift = 0.5 * std::log1p(2.0 * dt);
    const auto& u = std::get<ConformalGrid>(s).u;
    double m = 0.0;
    for (int k = 0; k < g.n_nodes(); ++k)
      if (g.mask[k] != NodeState::outside) m = std::max(m, std::abs(u[k] - (g.u[k] + shift)));
    return m;
  };
  const double e1 = step_error(0.01);
  const double e2 = step_error(0.005);
  REQUIRE(e1 < 5e-4);
  REQUIRE(e1 / e2 > 3.0);
  REQUIRE(e1 / e2 < 5.5);
}

TEST_CASE("round sphere trajectory obeys the linear area law") {
  RadialProfile p = make_sphere_profile(512);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.3;
  FlowTrajectory traj = run_flow(p, cfg);

  REQUIRE(traj.termination == Termination::completed);
  REQUIRE(std::abs(traj.initial_area - 4.0 * kPi) < 0.01 * 4.0 * kPi);
  REQUIRE(traj.samples.front().t == 0.0);
  for (size_t i = 1; i < traj.samples.size(); ++i)
    REQUIRE(traj.samples[i].t > traj.samples[i - 1].t);
  for (const FlowSample& s : traj.samples) {
    const double expected = traj.initial_area - 8.0 * kPi * s.t;
    REQUIRE(std::abs(s.area - expected) < 0.01 * traj.initial_area);
    // recorded curvature range follows K = 1/(1-2t) for the round solution
    REQUIRE(s.max_K * (1.0 - 2.0 * s.t) > 0.8);
    REQUIRE(s.max_K * (1.0 - 2.0 * s.t) < 1.2);
    REQUIRE(s.min_K * (1.0 - 2.0 * s.t) > 0.8);
  }
  for (const FlowSnapshot& sn : traj.snapshots)
    REQUIRE((int)surface_u(sn.geom).size() == p.n());
}

TEST_CASE("sphere flow matches the closed form and converges at second order in h") {
  ModelSpec spec;
  spec.kind = ModelKind::round_sphere;
  spec.rep = Representation::profile;
  auto run_error = [&](int n) {
    spec.n = n;
    Surface s0 = make_model(spec);
    const int actual_n = (int)surface_u(s0).size();
    const double range = 7.2;  // s-span of the default sphere ladder, roughly
    const double ds = range / actual_n;
    SolverConfig cfg;
    cfg.dt = 2.0 * ds * ds;
    cfg.t_end = 0.1;
    FlowTrajectory traj = run_flow(s0, cfg);
    REQUIRE(traj.termination == Termination::completed);
    return max_u_error(traj.snapshots.back().geom, closed_form_state(spec, traj.t_final));
  };
  const double e1 = run_error(256);
  const double e2 = run_error(512);
  REQUIRE(e2 < 1e-3);
  REQUIRE(e1 / e2 > 3.0);
}

TEST_CASE("thin cylinder goes extinct at t close to its area over 8 pi") {
  const double eps = 0.01;
  const double circ = thin_cylinder_circumference(2.0, 8.0 * kPi * eps);
  RadialProfile p = make_thin_cylinder_profile(2.0, circ, 1024);
  SolverConfig cfg;
  // the cap front sweeps the grid; backward Euler needs a small dt to keep the
  // drain rate (exactly 8 pi in the continuum) first-order accurate
  cfg.dt = 1e-5;
  cfg.t_end = 0.02;
  cfg.area_step_fraction = 0.005;
  cfg.record_stride = 16;
  FlowTrajectory traj = run_flow(p, cfg);

  REQUIRE(traj.termination == Termination::extinction);
  REQUIRE(std::abs(traj.t_final - eps) < 0.05 * eps);
  // late-time curvature blows up like a shrinking round sphere
  REQUIRE(traj.samples.back().min_K > 1000.0);
}

TEST_CASE("maximum principle proxy: min u nondecreasing for a subharmonic seed") {
  // chart spans [0,1]^2, so center the paraboloid to keep its minimum interior
  ConformalGrid g = make_plane_grid(
      41, 1.0, [](double x, double y) { return sq(x - 0.5) + sq(y - 0.5); });
  SolverConfig cfg;
  cfg.scheme = Scheme::explicit_euler;
  cfg.dt = 1e-4;
  cfg.t_end = 0.01;
  FlowTrajectory traj = run_flow(g, cfg, BoundaryMode::frozen());
  REQUIRE(traj.termination == Termination::completed);
  REQUIRE(traj.samples.size() > 50);
  for (size_t i = 1; i < traj.samples.size(); ++i)
    REQUIRE(traj.samples[i].min_u >= traj.samples[i - 1].min_u - 1e-15);
  REQUIRE(traj.samples.back().min_u > traj.samples.front().min_u);
}

TEST_CASE("closed-form states: identity at t = 0 and exact conformal shifts") {
  ModelSpec spec;
  spec.kind = ModelKind::round_sphere;
  spec.rep = Representation::profile;
  spec.n = 128;

  const Surface base = make_model(spec);
  const Surface at0 = closed_form_state(spec, 0.0);
  const Surface at_quarter = closed_form_state(spec, 0.25);
  const auto& u0 = surface_u(base);
  const auto& same = surface_u(at0);
  for (size_t i = 0; i < u0.size(); ++i) REQUIRE(same[i] == u0[i]);

  const auto& quarter = surface_u(at_quarter);
  const double shift = 0.5 * std::log(0.5);
  for (size_t i = 0; i < u0.size(); ++i)
    REQUIRE(std::abs(quarter[i] - (u0[i] + shift)) < 1e-15);

  REQUIRE_THROWS_AS(closed_form_state(spec, 0.5), invalid_input);
  REQUIRE_THROWS_AS(closed_form_state(spec, 0.7), invalid_input);
}

TEST_CASE("cusp closed form at t = 1 triples the metric and divides K by three") {
  ModelSpec spec;
  spec.kind = ModelKind::hyperbolic_cusp;
  spec.rep = Representation::grid;
  spec.inner = 0.1;
  spec.extent = 0.6;
  spec.h_target = 0.005;

  ConformalGrid g0 = std::get<ConformalGrid>(make_model(spec));
  ConformalGrid g1 = std::get<ConformalGrid>(closed_form_state(spec, 1.0));
  const std::vector<double> K0 = gauss_curvature(g0);
  const std::vector<double> K1 = gauss_curvature(g1);
  for (int k = 0; k < g0.n_nodes(); ++k) {
    if (g0.mask[k] != NodeState::interior) continue;
    REQUIRE(std::abs(K1[k] - K0[k] / 3.0) < 5e-12 * std::max(1.0, std::abs(K0[k])));
    REQUIRE(std::abs(K1[k] + 1.0 / 3.0) < 0.05);
  }
}

TEST_CASE("rescaling composes and commutes with the flow algebra") {
  RadialProfile p = make_sphere_profile(256);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  FlowTrajectory traj = run_flow(p, cfg);

  // identity
  FlowTrajectory id = rescale_trajectory(traj, 1.0);
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    REQUIRE(id.samples[i].t == traj.samples[i].t);
    REQUIRE(id.samples[i].area == traj.samples[i].area);
    REQUIRE(id.samples[i].min_u == traj.samples[i].min_u);
  }

  // composition with power-of-two factors is bitwise associative
  FlowTrajectory twice = rescale_trajectory(rescale_trajectory(traj, 2.0), 2.0);
  FlowTrajectory four = rescale_trajectory(traj, 4.0);
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    REQUIRE(twice.samples[i].t == four.samples[i].t);
    REQUIRE(twice.samples[i].area == four.samples[i].area);
    REQUIRE(twice.samples[i].min_K == four.samples[i].min_K);
    REQUIRE(std::abs(twice.samples[i].min_u - four.samples[i].min_u) < 1e-14);
  }

  // t * K products are invariants of the rescaling
  FlowTrajectory r2 = rescale_trajectory(traj, 2.0);
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    REQUIRE(r2.samples[i].t * r2.samples[i].min_K == traj.samples[i].t * traj.samples[i].min_K);
    REQUIRE(r2.samples[i].t * r2.samples[i].max_K == traj.samples[i].t * traj.samples[i].max_K);
  }

  // doubling the sphere metric halves its curvature
  Surface big = rescale_surface(make_sphere_profile(512), 2.0);
  const std::vector<double> K = gauss_curvature(std::get<RadialProfile>(big));
  for (int i = 0; i < std::get<RadialProfile>(big).n(); ++i) {
    if (!std::isfinite(K[i])) continue;
    REQUIRE(std::abs(K[i] - 0.5) < 5e-3);
  }
}

TEST_CASE("disabling the area threshold exposes the blow-up floor instead") {
  RadialProfile p = make_sphere_profile(256);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.6;
  cfg.extinction_fraction = 0.0;
  cfg.area_step_fraction = 0.1;
  FlowTrajectory traj = run_flow(p, cfg);
  REQUIRE(traj.termination == Termination::blowup_floor);
  REQUIRE(traj.t_final > 0.45);
  REQUIRE(traj.t_final < 0.52);
}

TEST_CASE("dirichlet-tracked hyperbolic disc matches the closed form over a full run") {
  ConformalGrid g = make_disc_grid(0.5, 0.025, u_poincare);
  auto closed = [](double t, double x, double y) {
    return u_poincare(x, y) + 0.5 * std::log1p(2.0 * t);
  };
  SolverConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 0.2;
  cfg.snapshot_times = {0.1};
  FlowTrajectory traj = run_flow(g, cfg, BoundaryMode::dirichlet(closed));
  REQUIRE(traj.termination == Termination::completed);

  // compare only nodes the solver actually owns (outside nodes never move)
  const ConformalGrid& got = std::get<ConformalGrid>(traj.snapshots.back().geom);
  const double shift = 0.5 * std::log1p(2.0 * traj.t_final);
  double err = 0.0;
  for (int k = 0; k < got.n_nodes(); ++k)
    if (got.mask[k] != NodeState::outside)
      err = std::max(err, std::abs(got.u[k] - (g.u[k] + shift)));
  REQUIRE(err < 5e-3);

  // the mid-run snapshot sits at its requested time
  bool found = false;
  for (const FlowSnapshot& sn : traj.snapshots)
    if (std::abs(sn.t - 0.1) < cfg.dt + 1e-12) found = true;
  REQUIRE(found);
}

TEST_CASE("complete-barrier disc: rim expands while the center stays almost flat") {
  ConformalGrid g = make_disc_grid(1.0, 1.0 / 30.0, u_flat);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  cfg.snapshot_times = {0.01};
  FlowTrajectory traj = run_flow(g, cfg, BoundaryMode::barrier());
  REQUIRE(traj.termination == Termination::completed);

  // lower curvature barrier -(1+0.1)/(2t) after the burn-in layer
  for (const FlowSample& s : traj.samples) {
    if (s.t < 0.01) continue;
    REQUIRE(s.min_K * 2.0 * s.t >= -1.1);
  }
  // the rim really does blow up: max u grows past its initial value
  REQUIRE(traj.samples.back().max_u > 1.0);

  // near-flat center early on
  const ConformalGrid& snap = std::get<ConformalGrid>(traj.snapshots[1].geom);
  REQUIRE(std::abs(traj.snapshots[1].t - 0.01) < cfg.dt + 1e-12);
  const std::vector<double> K = gauss_curvature(snap);
  int best = -1;
  double best_r = 1e300;
  for (int j = 0; j < snap.height; ++j)
    for (int i = 0; i < snap.width; ++i) {
      if (snap.state(i, j) != NodeState::interior) continue;
      const double r = std::hypot(snap.x_of(i), snap.y_of(j));
      if (r < best_r) { best_r = r; best = snap.idx(i, j); }
    }
  REQUIRE(best >= 0);
  REQUIRE(std::abs(K[best]) < 0.05);
}

TEST_CASE("open profiles refuse to run without a boundary mode") {
  RadialProfile p = std::get<RadialProfile>(
      make_model([] { ModelSpec m; m.kind = ModelKind::poincare_disc; m.rep = Representation::profile; m.n = 64; m.extent = 0.5; return m; }()));
  SolverConfig cfg;
  cfg.t_end = 0.01;
  REQUIRE_THROWS_AS(run_flow(p, cfg, BoundaryMode::none()), invalid_input);
}
