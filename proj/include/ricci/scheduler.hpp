#pragma once

// Existence-time bookkeeping: the doubling-horizon geometric sum, constant
// wiring (c0 = 4 gamma C0, delta0 = 1/(100 c0), tau = min(T^, S^)), the
// extension iteration ell -> ell (1 + 1/(4 c0)), r -> r - 6 sqrt(ell'/tau)
// with its radius budget, pyramid spacetime domains, and the conformal
// completion that blows a metric up near a region's rim (smooth max with a
// log barrier of constant curvature -1/rho^2).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ricci/common.hpp"
#include "ricci/conformal_grid.hpp"
#include "ricci/curvature.hpp"
#include "ricci/geodesic.hpp"

namespace ricci {

// ---------------------------------------------------------------------------
// Horizon arithmetic

// Doubling-horizon: 1/(16K) for a single stage; the iterated geometric sum
// 1/(16K) + 1/(32K) + ... converges to 1/(8K).
inline double shi_horizon(double K, bool iterated) {
  if (!(K > 0.0)) throw invalid_input("shi_horizon: K must be positive");
  return iterated ? 1.0 / (8.0 * K) : 1.0 / (16.0 * K);
}

// Partial sum of the first N stages: (1/(8K)) (1 - 2^{-N}), closed form.
inline double shi_partial_sum(double K, int N) {
  if (!(K > 0.0)) throw invalid_input("shi_partial_sum: K must be positive");
  if (N < 0) throw invalid_input("shi_partial_sum: N must be nonnegative");
  return (1.0 - std::ldexp(1.0, -N)) / (8.0 * K);
}

// ---------------------------------------------------------------------------
// Constant wiring

struct ConstantPack {
  double v0 = 1.0;      // volume hypothesis constant
  double alpha0 = 1.0;  // Ricci lower-bound magnitude
  double C0 = 2.0;      // local-estimate constant (supplied, >= 1)
  double That = 1.0;    // local existence horizon (supplied)
  double Shat = 1.0;    // bootstrap horizon (supplied)
  double gamma = 2.0;   // completion curvature factor (supplied, >= 1)

  // Derived quantities are recomputed on demand, never cached.
  double c0() const { return 4.0 * gamma * C0; }
  double delta0() const { return 1.0 / (100.0 * c0()); }
  double tau() const { return std::min(That, Shat); }
  double gate() const { return tau() / (200.0 * alpha0 * c0()); }
  double growth() const { return 1.0 + 1.0 / (4.0 * c0()); }
};

inline ConstantPack wire_constants(double v0, double alpha0, double C0, double That, double Shat,
                                   double gamma) {
  if (!(v0 > 0.0) || !(alpha0 > 0.0) || !(C0 > 0.0) || !(That > 0.0) || !(Shat > 0.0) ||
      !(gamma > 0.0))
    throw invalid_input("wire_constants: all inputs must be positive");
  if (gamma < 1.0) throw invalid_input("wire_constants: gamma must be >= 1");
  ConstantPack p{v0, alpha0, C0, That, Shat, gamma};
  if (p.c0() < 1.0) throw invalid_input("wire_constants: c0 = 4 gamma C0 must be >= 1");
  return p;
}

// ---------------------------------------------------------------------------
// Extension iteration

struct ExtensionStep {
  double ell = 0.0;
  double r = 0.0;
};

enum class ScheduleOutcome { time_threshold_reached, radius_exhausted };

struct ExtensionSchedule {
  std::vector<ExtensionStep> steps;  // starts with the initial (ell1, r1)
  ScheduleOutcome outcome = ScheduleOutcome::time_threshold_reached;
  double total_radius_loss = 0.0;
};

namespace detail {
inline ExtensionStep extension_formula(double ell1, double r1, const ConstantPack& p) {
  const double ell2 = ell1 * p.growth();
  return {ell2, r1 - 6.0 * std::sqrt(ell2 / p.tau())};
}
}  // namespace detail

// One extension: ell2 = ell1 (1 + 1/(4 c0)), r2 = r1 - 6 sqrt(ell2/tau).
// Requires the smallness gate ell1 <= tau/(200 alpha0 c0) and r1 >= 2;
// refuses (radius_exhausted) if the new radius would drop below 1.
inline ExtensionStep extend_once(double ell1, double r1, const ConstantPack& p) {
  if (!(ell1 > 0.0)) throw invalid_input("extend_once: ell1 must be positive");
  if (ell1 > p.gate())
    throw invalid_input("extend_once: hypothesis gate violated (ell1 > tau/(200 alpha0 c0))");
  if (r1 < 2.0) throw invalid_input("extend_once: need r1 >= 2");
  const ExtensionStep s = detail::extension_formula(ell1, r1, p);
  if (s.r < 1.0)
    throw radius_exhausted("extend_once: new radius " + fmt17(s.r) + " dropped below 1");
  return s;
}

// Geometric-sum cap on the total radius ever lost before the gate is cleared.
inline double radius_budget(const ConstantPack& p) {
  const double ell_max = p.gate() * p.growth();
  return 6.0 * std::sqrt(ell_max / p.tau()) / (1.0 - 1.0 / std::sqrt(p.growth()));
}

// Iterate until ell clears the gate (success) or the next radius would fall
// below r_target (failure). Records the full (ell, r) staircase.
inline ExtensionSchedule run_schedule(double ell1, double r1, double r_target,
                                      const ConstantPack& p) {
  if (!(ell1 > 0.0)) throw invalid_input("run_schedule: ell1 must be positive");
  if (!(r1 > r_target) || !(r_target >= 1.0))
    throw invalid_input("run_schedule: need r1 > r_target >= 1");
  ExtensionSchedule sched;
  sched.steps.push_back({ell1, r1});
  double ell = ell1, r = r1;
  while (ell <= p.gate()) {
    const ExtensionStep next = detail::extension_formula(ell, r, p);
    if (next.r < r_target) {
      sched.outcome = ScheduleOutcome::radius_exhausted;
      sched.total_radius_loss = r1 - r;
      return sched;
    }
    sched.steps.push_back(next);
    ell = next.ell;
    r = next.r;
  }
  sched.outcome = ScheduleOutcome::time_threshold_reached;
  sched.total_radius_loss = r1 - r;
  return sched;
}

// ---------------------------------------------------------------------------
// Pyramid spacetime domain: union over k of (ball of radius k) x [0, T_k]

struct PyramidLevelInput {
  double ell1 = 0.0;
  ConstantPack pack;
};

struct PyramidDomain {
  std::vector<double> T;  // T[k-1] for ball radius k; nonincreasing
  bool truncated = false;
  int truncated_at = 0;  // first k that failed to schedule (0 = none)
};

// T_k := the schedule's cleared existence time, starting from radius
// k + 1 + B (B the level's radius budget) and targeting radius k, then
// clamped to be nonincreasing in k.
inline PyramidDomain pyramid_build(const std::vector<PyramidLevelInput>& levels) {
  if (levels.empty()) throw invalid_input("pyramid_build: need k_max >= 1");
  PyramidDomain dom;
  for (size_t q = 0; q < levels.size(); ++q) {
    const int k = (int)q + 1;
    const ConstantPack& p = levels[q].pack;
    const double r1 = k + 1.0 + radius_budget(p);
    ExtensionSchedule s = run_schedule(levels[q].ell1, r1, (double)k, p);
    if (s.outcome != ScheduleOutcome::time_threshold_reached) {
      dom.truncated = true;
      dom.truncated_at = k;
      break;
    }
    double Tk = s.steps.back().ell;
    if (!dom.T.empty()) Tk = std::min(Tk, dom.T.back());
    dom.T.push_back(Tk);
  }
  if (dom.T.empty()) throw invalid_input("pyramid_build: no level scheduled successfully");
  return dom;
}

inline bool pyramid_member(const PyramidDomain& dom, double dist_from_base, double t) {
  if (!(t >= 0.0) || !(dist_from_base >= 0.0)) return false;
  for (size_t q = 0; q < dom.T.size(); ++q)
    if (dist_from_base < (double)q + 1.0 && t <= dom.T[q]) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Conformal completion near the rim of a region

// C^2 smooth max with transition half-width delta: exact branches outside
// |a - b| < delta, quintic Hermite blend inside.
inline double smooth_max(double a, double b, double delta) {
  if (a >= b + delta) return a;
  if (b >= a + delta) return b;
  const double s = (a - b + delta) / (2.0 * delta);  // in (0,1)
  const double w = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  return w * a + (1.0 - w) * b;
}

struct HochardResult {
  ConformalGrid grid;
  double gamma_fit = 0.0;  // rho^2 * max |K| of the completed factor
  double rho = 0.0;
};

// Distance (under the grid metric) from every node to the region's rim.
inline std::vector<double> rim_distances(const ConformalGrid& g) {
  std::vector<int> rim;
  for (int k = 0; k < g.n_nodes(); ++k)
    if (g.mask[k] == NodeState::boundary) rim.push_back(k);
  if (rim.empty()) throw invalid_input("rim_distances: region has no rim nodes");
  return grid_distances(g, rim);
}

// Blow the factor up near the rim: u~ = smooth-max(u, ln(rho / d_rim)) with
// transition half-width (ln 2)/2, so u~ == u wherever u >= ln(rho/d) + width
// -- in particular on the deep interior d >= 2 rho when u >= -(ln 2)/2.
// Requires sup |K| <= 1/rho^2 on the input region.
inline HochardResult hochard_complete(const ConformalGrid& g, double rho) {
  if (!(rho > 0.0) || rho > 1.0) throw invalid_input("hochard_complete: need 0 < rho <= 1");
  g.validate();
  {
    const std::vector<double> K = gauss_curvature(g);
    double supk = 0.0;
    for (double k : K)
      if (std::isfinite(k)) supk = std::max(supk, std::abs(k));
    if (supk > (1.0 + 1e-9) / (rho * rho))
      throw invalid_input("hochard_complete: curvature precondition sup|K| <= 1/rho^2 fails");
  }

  HochardResult out;
  out.rho = rho;
  out.grid = g;
  std::vector<double> d = rim_distances(g);
  const double delta = 0.5 * std::log(2.0);
  for (int k = 0; k < g.n_nodes(); ++k) {
    if (g.mask[k] == NodeState::outside) continue;
    double dk = d[k];
    if (!(dk > 0.0)) dk = 0.5 * g.h * std::exp(g.u[k]);  // rim nodes: half a cell
    out.grid.u[k] = smooth_max(g.u[k], std::log(rho / dk), delta);
  }

  const std::vector<double> K = gauss_curvature(out.grid);
  double supk = 0.0;
  for (double k : K)
    if (std::isfinite(k)) supk = std::max(supk, std::abs(k));
  out.gamma_fit = rho * rho * supk;
  return out;
}

// Completeness proxy: metric distance from a node to the rim under the
// completed factor (diverges like rho ln(1/h) under refinement).
inline double completed_rim_distance(const HochardResult& res, int node) {
  const std::vector<double> d = rim_distances(res.grid);
  if (!std::isfinite(d[node])) throw no_path("completed_rim_distance: node disconnected");
  return d[node];
}

}  // namespace ricci
