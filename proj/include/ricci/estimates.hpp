#pragma once

// Quantitative checkers for flows and static spaces: volume-ratio
// monotonicity (Bishop-Gromov style), nonconcentric ball lower bounds,
// asymptotic volume ratio, metric equivalence under curvature bounds,
// 1/t curvature decay, distance sandwiches, Holder/Lipschitz distance
// comparisons, the sphere area law, and a Shi-type derivative statistic.
//
// Universal constants are always fitted from the data (minimal validating
// value), never baked in as ground truth. Every checker returns an
// EstimateReport with a signed worst-case margin; pass <=> margin >= -tol.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ricci/common.hpp"
#include "ricci/conformal_grid.hpp"
#include "ricci/curvature.hpp"
#include "ricci/flow.hpp"
#include "ricci/geodesic.hpp"
#include "ricci/radial_profile.hpp"
#include "ricci/revolution.hpp"
#include "ricci/surface_ops.hpp"

namespace ricci {

struct EstimateReport {
  std::string check;
  bool pass = false;
  double margin = 0.0;     // signed worst case; >= -tolerance means pass
  double tolerance = 0.0;
  std::map<std::string, double> fitted;  // ordered -> deterministic output
  std::string witness;                   // where the extremal case happened
  std::vector<std::pair<double, double>> series;  // e.g. (r, ratio) rows
  std::string note;
};

// ---------------------------------------------------------------------------
// Ball volumes

struct BallVolume {
  double volume = 0.0;
  bool truncated = false;  // ball reached the rim of the modeled chart
};

// Grid ball: sum of cell areas within metric distance r of x0. `dist` must be
// the Dijkstra field from x0 (reused across radii).
inline BallVolume grid_ball_volume(const ConformalGrid& g, const std::vector<double>& dist,
                                   double r) {
  BallVolume out;
  const double cell = g.h * g.h;
  for (int k = 0; k < g.n_nodes(); ++k) {
    if (g.mask[k] == NodeState::outside || !(dist[k] <= r)) continue;
    out.volume += std::exp(2.0 * g.u[k]) * cell;
    if (g.mask[k] == NodeState::boundary) out.truncated = true;
  }
  return out;
}

// Profile ball centered at the innermost node: cap plus full bands plus a
// linear fraction of the band the radius lands in (keeps ratios smooth).
// Sphere profiles wrap past the equator by mirror symmetry.
inline BallVolume profile_ball_volume(const RadialProfile& p, double r) {
  const bool sphere = p.topology == ProfileTopology::sphere_double_chart;
  const int last = sphere ? p.equator_index : p.n() - 1;

  double reach = 0.0;  // ray distance to the last usable node
  auto near_vol = [&](double rad) {
    double v = pole_cap_area(p), d = 0.0;
    for (int i = 0; i < last; ++i) {
      const double seg = p.ray_distance(i, i + 1);
      const double band = band_area(p, i);
      if (d + seg <= rad) v += band;
      else if (rad > d) v += band * (rad - d) / seg;
      d += seg;
    }
    reach = d;
    return v;
  };

  BallVolume out;
  if (!sphere) {
    out.volume = near_vol(r);
    out.truncated = r >= reach;
    return out;
  }
  const double eq_d = p.ray_distance(0, p.equator_index);
  const double half = near_vol(eq_d);
  if (r <= eq_d) {
    out.volume = near_vol(r);
  } else {
    // far-hemisphere points lie within r iff their own polar depth >= 2 eq_d - r
    const double spare = 2.0 * eq_d - r;
    out.volume = half + (half - (spare > 0.0 ? near_vol(spare) : 0.0));
  }
  return out;
}

// Surface-of-revolution ball volume: per-node area weights (ring band /
// n_theta) summed over nodes within distance r. `dist` from graph.distances.
inline BallVolume revolution_ball_volume(const RevolutionGraph& graph,
                                         const std::vector<double>& dist, double r) {
  const RevolutionSurface& s = graph.surface();
  const int nr = graph.n_rings(), fr = graph.first_ring(), nt = graph.n_theta();
  BallVolume out;
  auto midpoint = [&](int i) {  // outer edge of ring i's band
    return i + 1 < nr ? 0.5 * (s.rho[i] + s.rho[i + 1]) : s.rho[i];
  };
  auto f_at = [&](double rho) {  // linear interpolation of the circumference radius
    int lo = 0;
    while (lo + 2 < nr && s.rho[lo + 1] < rho) ++lo;
    const double t = (rho - s.rho[lo]) / (s.rho[lo + 1] - s.rho[lo]);
    return s.f[lo] + t * (s.f[lo + 1] - s.f[lo]);
  };
  auto band = [&](double a, double b) {  // area of the rho-slab [a,b]
    return 2.0 * kPi * 0.5 * (f_at(a) + f_at(b)) * (b - a);
  };
  if (graph.has_apex() && dist[graph.apex()] <= r)
    out.volume += band(s.rho[0], midpoint(0)) * 1.0;  // apex cap (f(0) = 0)
  for (int ring = fr; ring < nr; ++ring) {
    const double lo = ring == 0 ? s.rho[0] : midpoint(ring - 1);
    const double hi = midpoint(ring);
    const double w = band(lo, hi) / nt;
    for (int c = 0; c < nt; ++c) {
      if (dist[graph.node(ring, c)] <= r) {
        out.volume += w;
        if (ring == nr - 1) out.truncated = true;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bishop-Gromov: r -> VolB(x0,r)/r^2 nonincreasing (within 2 h/r relative)

namespace detail {

inline std::vector<BallVolume> surface_ball_volumes(const Surface& s, int x0,
                                                    const std::vector<double>& radii) {
  std::vector<BallVolume> out;
  if (std::holds_alternative<ConformalGrid>(s)) {
    const auto& g = std::get<ConformalGrid>(s);
    const std::vector<double> dist = grid_distances(g, {x0});
    for (double r : radii) out.push_back(grid_ball_volume(g, dist, r));
  } else {
    const auto& p = std::get<RadialProfile>(s);
    if (x0 != 0)
      throw invalid_input("ball volumes on a radial profile are only defined at the center node");
    for (double r : radii) out.push_back(profile_ball_volume(p, r));
  }
  return out;
}

}  // namespace detail

inline EstimateReport check_bishop_gromov(const Surface& s, int x0,
                                          const std::vector<double>& radii) {
  if (radii.size() < 2) throw invalid_input("check_bishop_gromov: need at least two radii");
  for (size_t j = 1; j < radii.size(); ++j)
    if (!(radii[j] > radii[j - 1]) || !(radii[0] > 0.0))
      throw invalid_input("check_bishop_gromov: radii must be positive and increasing");

  EstimateReport rep;
  rep.check = "bishop-gromov";
  const double h = surface_metric_spacing(s);
  const std::vector<BallVolume> vols = detail::surface_ball_volumes(s, x0, radii);

  bool truncated = false;
  for (size_t j = 0; j < radii.size(); ++j) {
    rep.series.emplace_back(radii[j], vols[j].volume / (radii[j] * radii[j]));
    truncated = truncated || vols[j].truncated;
  }
  double worst = std::numeric_limits<double>::infinity();
  double tol = 0.0;
  for (size_t j = 0; j + 1 < radii.size(); ++j) {
    const double a = rep.series[j].second, b = rep.series[j + 1].second;
    const double drop = (a - b) / std::max(a, 1e-300);  // negative = ratio increased
    const double step_tol = 2.0 * h / radii[j + 1];
    if (drop < worst) {
      worst = drop;
      rep.witness = "radii " + fmt17(radii[j]) + " -> " + fmt17(radii[j + 1]);
    }
    tol = std::max(tol, step_tol);
  }
  rep.margin = worst;
  rep.tolerance = tol;
  rep.pass = worst >= -tol;
  rep.fitted["ratio_at_min_r"] = rep.series.front().second;
  rep.fitted["ratio_at_max_r"] = rep.series.back().second;
  rep.fitted["flat_reference"] = kPi;
  if (truncated) rep.note = "truncated-ball: some balls reach the chart rim";
  return rep;
}

// Same monotonicity check on explicit (r, ratio) data; used for revolution
// graphs and closed-form oracles.
inline EstimateReport check_ratio_monotone(const std::vector<std::pair<double, double>>& series,
                                           double h) {
  if (series.size() < 2) throw invalid_input("check_ratio_monotone: need two rows");
  EstimateReport rep;
  rep.check = "bishop-gromov";
  rep.series = series;
  double worst = std::numeric_limits<double>::infinity(), tol = 0.0;
  for (size_t j = 0; j + 1 < series.size(); ++j) {
    const double drop =
        (series[j].second - series[j + 1].second) / std::max(series[j].second, 1e-300);
    if (drop < worst) {
      worst = drop;
      rep.witness = "radii " + fmt17(series[j].first) + " -> " + fmt17(series[j + 1].first);
    }
    tol = std::max(tol, 2.0 * h / series[j + 1].first);
  }
  rep.margin = worst;
  rep.tolerance = tol;
  rep.pass = worst >= -tol;
  rep.fitted["ratio_at_min_r"] = series.front().second;
  rep.fitted["ratio_at_max_r"] = series.back().second;
  return rep;
}

// ---------------------------------------------------------------------------
// Nonconcentric lower bound: VolB(x,r)/r^2 >= VolB(x0,1)/R^2, R = r + 1 + d(x0,x)

inline EstimateReport nonconcentric_lower_bound(const Surface& s, int x0, int x, double r) {
  if (!(r > 0.0)) throw invalid_input("nonconcentric_lower_bound: r must be positive");
  if (!std::holds_alternative<ConformalGrid>(s))
    throw invalid_input("nonconcentric_lower_bound: off-center balls need a 2D grid");
  const auto& g = std::get<ConformalGrid>(s);
  const std::vector<double> d0 = grid_distances(g, {x0});
  const std::vector<double> dx = grid_distances(g, {x});
  if (!std::isfinite(d0[x])) throw no_path("nonconcentric_lower_bound: x unreachable from x0");

  const BallVolume unit = grid_ball_volume(g, d0, 1.0);
  const BallVolume vb = grid_ball_volume(g, dx, r);
  const double R = r + 1.0 + d0[x];
  const double lhs = vb.volume / (r * r);
  const double rhs = unit.volume / (R * R);

  EstimateReport rep;
  rep.check = "nonconcentric-lower-bound";
  const double h = surface_metric_spacing(s);
  rep.tolerance = 2.0 * h / std::min(r, 1.0);
  rep.margin = (lhs - rhs) / std::max(rhs, 1e-300);
  rep.pass = rep.margin >= -rep.tolerance;
  rep.fitted["lhs_ratio"] = lhs;
  rep.fitted["rhs_bound"] = rhs;
  rep.fitted["R"] = R;
  rep.witness = "d(x0,x) = " + fmt17(d0[x]);
  if (unit.truncated || vb.truncated) rep.note = "truncated-ball: some balls reach the chart rim";
  return rep;
}

// Revolution-graph variant (used for exact cones where the chart grid would
// put the vertex singularity on a node).
inline EstimateReport nonconcentric_lower_bound(const RevolutionGraph& graph, int x0, int x,
                                                double r) {
  if (!(r > 0.0)) throw invalid_input("nonconcentric_lower_bound: r must be positive");
  const std::vector<double> d0 = graph.distances(x0);
  const std::vector<double> dx = graph.distances(x);
  const BallVolume unit = revolution_ball_volume(graph, d0, 1.0);
  const BallVolume vb = revolution_ball_volume(graph, dx, r);
  const double R = r + 1.0 + d0[x];
  const double lhs = vb.volume / (r * r);
  const double rhs = unit.volume / (R * R);
  EstimateReport rep;
  rep.check = "nonconcentric-lower-bound";
  const RevolutionSurface& srf = graph.surface();
  double h = 0.0;
  for (size_t i = 1; i < srf.rho.size(); ++i) h = std::max(h, srf.rho[i] - srf.rho[i - 1]);
  rep.tolerance = 2.0 * h / std::min(r, 1.0);
  rep.margin = (lhs - rhs) / std::max(rhs, 1e-300);
  rep.pass = rep.margin >= -rep.tolerance;
  rep.fitted["lhs_ratio"] = lhs;
  rep.fitted["rhs_bound"] = rhs;
  rep.fitted["R"] = R;
  rep.witness = "d(x0,x) = " + fmt17(d0[x]);
  if (unit.truncated || vb.truncated) rep.note = "truncated-ball: some balls reach the chart rim";
  return rep;
}

// ---------------------------------------------------------------------------
// Asymptotic volume ratio: VolB(x0,r)/r^2 trend and its extrapolated limit.
// Fit ratio = AVR + B/r + C/r^2: area = AVR r^2 + B r + C is exact for the
// flat plane (B = C = 0), exact cones (B = 0, C = tip correction) and
// cap-smoothed cones (the flank is a cone about a vertex displaced by the
// smoothing offset, which contributes the linear term).

inline EstimateReport compute_avr(const Surface& s, const std::vector<double>& radii) {
  if (radii.size() < 3) throw invalid_input("compute_avr: need at least three radii");
  if (std::holds_alternative<RadialProfile>(s)) {
    const auto& p = std::get<RadialProfile>(s);
    if (p.topology == ProfileTopology::sphere_double_chart)
      throw invalid_input("compute_avr: undefined-avr on a compact space");
  } else if (std::get<ConformalGrid>(s).chart == ChartKind::sphere_stereographic) {
    throw invalid_input("compute_avr: undefined-avr on a compact space");
  }
  EstimateReport rep;
  rep.check = "avr";
  const std::vector<BallVolume> vols = detail::surface_ball_volumes(s, 0, radii);
  // normal equations for least squares on the basis {1, 1/r, 1/r^2}
  const int n = (int)radii.size();
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}, rhs[3] = {0, 0, 0};
  for (int j = 0; j < n; ++j) {
    const double ratio = vols[j].volume / (radii[j] * radii[j]);
    rep.series.emplace_back(radii[j], ratio);
    const double b[3] = {1.0, 1.0 / radii[j], 1.0 / (radii[j] * radii[j])};
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) m[a][c] += b[a] * b[c];
      rhs[a] += b[a] * ratio;
    }
  }
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (std::abs(det) < 1e-300) throw invalid_input("compute_avr: degenerate radius list");
  auto solve = [&](int col) {  // Cramer
    double t[3][3];
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) t[a][c] = c == col ? rhs[a] : m[a][c];
    return (t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1]) -
            t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0]) +
            t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0])) / det;
  };
  rep.fitted["avr"] = solve(0);
  rep.fitted["excess_coeff"] = solve(1);
  rep.fitted["tip_coeff"] = solve(2);
  rep.fitted["ratio_at_max_r"] = rep.series.back().second;
  rep.margin = 0.0;
  rep.pass = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Metric equivalence: -M2 t <= u(t) - u(0) <= M1 t per node (conformal exact)

inline EstimateReport check_metric_equivalence(const FlowTrajectory& traj, double M1, double M2) {
  if (traj.snapshots.size() < 2)
    throw invalid_input("check_metric_equivalence: need at least two snapshots");
  EstimateReport rep;
  rep.check = "metric-equivalence";
  const std::vector<double>& u0 = surface_u(traj.snapshots.front().geom);
  double worst = std::numeric_limits<double>::infinity();
  double m1_min = 0.0, m2_min = 0.0;
  for (size_t q = 1; q < traj.snapshots.size(); ++q) {
    const double t = traj.snapshots[q].t;
    if (!(t > 0.0)) continue;
    const std::vector<double>& ut = surface_u(traj.snapshots[q].geom);
    for (size_t k = 0; k < ut.size(); ++k) {
      if (!std::isfinite(ut[k]) || !std::isfinite(u0[k])) continue;  // masked-out nodes
      const double delta = ut[k] - u0[k];
      m1_min = std::max(m1_min, delta / t);
      m2_min = std::max(m2_min, -delta / t);
      const double room = std::min(M1 * t - delta, delta + M2 * t);
      if (room < worst) {
        worst = room;
        rep.witness = "node " + std::to_string(k) + " at t " + fmt17(t);
      }
    }
  }
  rep.margin = worst;
  rep.tolerance = 1e-12;
  rep.pass = worst >= -rep.tolerance;
  rep.fitted["M1_min"] = m1_min;
  rep.fitted["M2_min"] = m2_min;
  return rep;
}

// ---------------------------------------------------------------------------
// Curvature decay: minimal c with sup|K(t)| <= c/t, plus K >= -(1+tol)/(2t)

inline EstimateReport fit_curvature_decay(const FlowTrajectory& traj, double lower_tol = 0.1) {
  EstimateReport rep;
  rep.check = "curvature-decay";
  double c_fit = 0.0, worst = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const FlowSample& s : traj.samples) {
    if (!(s.t > 0.0)) continue;
    any = true;
    const double supk = std::max(std::abs(s.min_K), std::abs(s.max_K));
    const double prod = s.t * supk;
    if (prod > c_fit) {
      c_fit = prod;
      rep.witness = "t " + fmt17(s.t);
    }
    // signed room in the lower bound K >= -(1+tol)/(2t), in curvature units
    const double room = s.min_K + (1.0 + lower_tol) / (2.0 * s.t);
    worst = std::min(worst, room * s.t);  // scale-invariant margin
  }
  if (!any) throw invalid_input("fit_curvature_decay: no positive-time samples");
  rep.fitted["c0"] = c_fit;
  rep.margin = worst;
  rep.tolerance = 0.0;
  rep.pass = worst >= 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Distance sandwich, one-time and two-time forms

struct PairList {
  std::vector<std::pair<int, int>> pairs;
};

inline EstimateReport check_distance_sandwich(const FlowTrajectory& traj, const PairList& pl,
                                              double alpha, double c0, double beta,
                                              double tol_abs = 1e-9) {
  if (traj.snapshots.size() < 2)
    throw invalid_input("check_distance_sandwich: need at least two snapshots");
  EstimateReport rep;
  rep.check = "distance-sandwich";
  const size_t np = pl.pairs.size();
  if (np == 0) throw invalid_input("check_distance_sandwich: empty pair list");

  // distance table: snapshot x pair
  std::vector<std::vector<double>> d(traj.snapshots.size(), std::vector<double>(np));
  for (size_t q = 0; q < traj.snapshots.size(); ++q)
    for (size_t p = 0; p < np; ++p)
      d[q][p] = surface_distance(traj.snapshots[q].geom, pl.pairs[p].first, pl.pairs[p].second);

  double worst = std::numeric_limits<double>::infinity();
  auto consider = [&](double room, const std::string& what) {
    if (room < worst) {
      worst = room;
      rep.witness = what;
    }
  };
  for (size_t q2 = 1; q2 < traj.snapshots.size(); ++q2) {
    const double t2 = traj.snapshots[q2].t;
    if (!(t2 > 0.0)) continue;
    for (size_t p = 0; p < np; ++p) {
      const double d0 = d[0][p], dt = d[q2][p];
      consider(std::exp(alpha * t2) * d0 - dt, "upper, pair " + std::to_string(p) + " t " + fmt17(t2));
      consider(dt - (d0 - beta * std::sqrt(c0 * t2)),
               "lower, pair " + std::to_string(p) + " t " + fmt17(t2));
      // two-time form against every earlier positive-time snapshot
      for (size_t q1 = 1; q1 < q2; ++q1) {
        const double t1 = traj.snapshots[q1].t;
        if (!(t1 > 0.0)) continue;
        const double d1 = d[q1][p];
        consider(std::exp(alpha * (t2 - t1)) * d1 - dt,
                 "two-time upper, pair " + std::to_string(p));
        consider(dt - (d1 - beta * std::sqrt(c0) * (std::sqrt(t2) - std::sqrt(t1))),
                 "two-time lower, pair " + std::to_string(p));
      }
    }
  }
  rep.margin = worst;
  rep.tolerance = tol_abs;
  rep.pass = worst >= -tol_abs;
  rep.fitted["alpha"] = alpha;
  rep.fitted["beta"] = beta;
  rep.fitted["c0"] = c0;
  return rep;
}

// ---------------------------------------------------------------------------
// Holder/Lipschitz distance comparison fits
//
//   gamma: minimal gamma with d_0 <= gamma * d_t^{1/(1+4 c0)}   (all pairs, t)
//   sigma: near-minimal sigma >= 1 with d_0 <= sigma * d_t^{1/sigma}
//   eta  : maximal eta with d_t >= eta * d_0^{1+2(n-1)c0}, n = 2

inline double holder_exponent(double c0, int n = 2) {
  (void)n;  // the 1/(1+4c0) exponent is dimension-free in the source estimate
  return 1.0 / (1.0 + 4.0 * c0);
}

inline double eta_exponent(double c0, int n = 2) { return 1.0 + 2.0 * (n - 1) * c0; }

inline EstimateReport fit_holder(const FlowTrajectory& traj, const PairList& pl) {
  if (traj.snapshots.size() < 2) throw invalid_input("fit_holder: need at least two snapshots");
  if (pl.pairs.empty()) throw invalid_input("fit_holder: empty pair list");
  EstimateReport rep;
  rep.check = "holder-fit";
  const double c0 = fit_curvature_decay(traj).fitted.at("c0");
  const double expo = holder_exponent(c0);

  std::vector<double> d0(pl.pairs.size());
  for (size_t p = 0; p < pl.pairs.size(); ++p)
    d0[p] = surface_distance(traj.snapshots.front().geom, pl.pairs[p].first, pl.pairs[p].second);

  std::vector<std::pair<double, double>> obs;  // (d0, dt) over all pairs/times
  for (size_t q = 1; q < traj.snapshots.size(); ++q) {
    if (!(traj.snapshots[q].t > 0.0)) continue;
    for (size_t p = 0; p < pl.pairs.size(); ++p) {
      const double dt =
          surface_distance(traj.snapshots[q].geom, pl.pairs[p].first, pl.pairs[p].second);
      if (d0[p] > 0.0 && dt > 0.0) obs.emplace_back(d0[p], dt);
    }
  }
  if (obs.empty()) throw invalid_input("fit_holder: no usable pairs");

  double gamma = 0.0, eta = std::numeric_limits<double>::infinity();
  const double eexp = eta_exponent(c0);
  for (auto& [a, b] : obs) {
    gamma = std::max(gamma, a / std::pow(b, expo));
    eta = std::min(eta, b / std::pow(a, eexp));
  }

  auto sigma_ok = [&](double sig) {
    for (auto& [a, b] : obs)
      if (a > sig * std::pow(b, 1.0 / sig)) return false;
    return true;
  };
  double sigma = std::numeric_limits<double>::infinity();
  if (sigma_ok(1.0)) {
    sigma = 1.0;
  } else {
    double hi = 2.0;
    while (hi < 1e9 && !sigma_ok(hi)) hi *= 2.0;
    if (sigma_ok(hi)) {
      double lo = hi * 0.5;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (sigma_ok(mid) ? hi : lo) = mid;
      }
      sigma = hi;
    }
  }

  rep.fitted["c0"] = c0;
  rep.fitted["exponent"] = expo;
  rep.fitted["gamma"] = gamma;
  rep.fitted["sigma"] = sigma;
  rep.fitted["eta"] = eta;
  rep.pass = std::isfinite(gamma) && std::isfinite(sigma);
  rep.margin = rep.pass ? 0.0 : -std::numeric_limits<double>::infinity();
  return rep;
}

// ---------------------------------------------------------------------------
// Area law: dA/dt = -8 pi for sphere-topology flows

inline EstimateReport check_area_law(const FlowTrajectory& traj, double tol_rel = 0.02,
                                     double area_floor_fraction = 0.2) {
  if (traj.samples.size() < 2) throw invalid_input("check_area_law: need at least two samples");
  const bool sphere =
      std::holds_alternative<RadialProfile>(traj.snapshots.front().geom) &&
      std::get<RadialProfile>(traj.snapshots.front().geom).topology ==
          ProfileTopology::sphere_double_chart;
  EstimateReport rep;
  rep.check = "area-law";
  const double target = -8.0 * kPi;
  double worst = std::numeric_limits<double>::infinity(), slope_sum = 0.0;
  int used = 0;
  for (size_t k = 0; k + 1 < traj.samples.size(); ++k) {
    const FlowSample& a = traj.samples[k];
    const FlowSample& b = traj.samples[k + 1];
    if (b.t <= a.t) continue;
    if (a.area < area_floor_fraction * traj.initial_area) break;  // extinction end-game excluded
    const double slope = (b.area - a.area) / (b.t - a.t);
    slope_sum += slope;
    ++used;
    const double room = tol_rel - std::abs(slope - target) / std::abs(target);
    if (room < worst) {
      worst = room;
      rep.witness = "t in [" + fmt17(a.t) + ", " + fmt17(b.t) + "]";
    }
  }
  if (used == 0) throw invalid_input("check_area_law: no usable sample intervals");
  rep.fitted["mean_slope"] = slope_sum / used;
  rep.fitted["target_slope"] = target;
  rep.tolerance = 0.0;  // tol_rel is folded into the margin
  if (sphere) {
    rep.margin = worst;
    rep.pass = worst >= 0.0;
  } else {
    rep.margin = 0.0;
    rep.pass = true;
    rep.note = "non-sphere topology: slope reported, not asserted";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Shi-type statistic: sup over snapshots of t^{3/2} sup_interior |grad K|_g

inline double shi_statistic(const FlowTrajectory& traj, double interior_chart_radius) {
  double stat = 0.0;
  for (const FlowSnapshot& sn : traj.snapshots) {
    if (!(sn.t > 0.0)) continue;
    double supg = 0.0;
    if (std::holds_alternative<ConformalGrid>(sn.geom)) {
      const auto& g = std::get<ConformalGrid>(sn.geom);
      const std::vector<double> K = gauss_curvature(g);
      for (int j = 1; j + 1 < g.height; ++j) {
        for (int i = 1; i + 1 < g.width; ++i) {
          const int k = g.idx(i, j);
          const double r = std::hypot(g.x_of(i), g.y_of(j));
          if (r > interior_chart_radius) continue;
          const int xm = g.idx(i - 1, j), xp = g.idx(i + 1, j);
          const int ym = g.idx(i, j - 1), yp = g.idx(i, j + 1);
          if (!std::isfinite(K[k]) || !std::isfinite(K[xm]) || !std::isfinite(K[xp]) ||
              !std::isfinite(K[ym]) || !std::isfinite(K[yp]))
            continue;
          const double gx = (K[xp] - K[xm]) / (2.0 * g.h);
          const double gy = (K[yp] - K[ym]) / (2.0 * g.h);
          supg = std::max(supg, std::exp(-g.u[k]) * std::hypot(gx, gy));
        }
      }
    } else {
      const auto& p = std::get<RadialProfile>(sn.geom);
      const std::vector<double> K = gauss_curvature(p);
      for (int i = 1; i + 1 < p.n(); ++i) {
        if (p.r[i] > interior_chart_radius) continue;
        if (!std::isfinite(K[i - 1]) || !std::isfinite(K[i + 1])) continue;
        const double gr = (K[i + 1] - K[i - 1]) / (p.r[i + 1] - p.r[i - 1]);
        supg = std::max(supg, std::exp(-p.u[i]) * std::abs(gr));
      }
    }
    stat = std::max(stat, std::pow(sn.t, 1.5) * supg);
  }
  return stat;
}

inline EstimateReport check_shi_decay(const std::vector<double>& stats_by_refinement,
                                      double growth_tol = 1.2) {
  if (stats_by_refinement.size() < 2)
    throw invalid_input("check_shi_decay: need statistics from at least two refinements");
  EstimateReport rep;
  rep.check = "shi-decay";
  double worst = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j + 1 < stats_by_refinement.size(); ++j) {
    const double a = std::max(stats_by_refinement[j], 1e-300);
    const double ratio = stats_by_refinement[j + 1] / a;
    const double room = growth_tol - ratio;
    if (room < worst) {
      worst = room;
      rep.witness = "refinement step " + std::to_string(j);
    }
    rep.series.emplace_back((double)j, stats_by_refinement[j]);
  }
  rep.series.emplace_back((double)(stats_by_refinement.size() - 1), stats_by_refinement.back());
  rep.fitted["final_statistic"] = stats_by_refinement.back();
  rep.margin = worst;
  rep.pass = worst >= 0.0;
  return rep;
}

}  // namespace ricci
