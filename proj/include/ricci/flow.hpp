#pragma once

// Conformal Ricci flow integrator: du/dt = e^{-2u} lap(u), so the Gauss
// curvature obeys K = -du/dt pointwise. Two spatial representations share one
// time loop:
//
//   * ConformalGrid  -- 2D lattice, 5-point Laplacian, explicit or implicit
//                       Euler (implicit uses Newton + Gauss-Seidel sweeps).
//   * RadialProfile  -- rotationally symmetric. Plane charts integrate u(r)
//                       with the polar Laplacian u_rr + u_r/r; double-chart
//                       spheres switch to the cylinder gauge s = ln r,
//                       v = u + s, where v_t = e^{-2v} v_ss on the half
//                       domain [s_min, 0] with a smooth-cap Neumann condition
//                       v_s = +1 at the pole cut and even symmetry at the
//                       equator. Implicit steps solve the tridiagonal Newton
//                       system exactly (Thomas algorithm).
//
// Boundary handling, extinction/blow-up detection, and trajectory recording
// live here as well.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ricci/common.hpp"
#include "ricci/conformal_grid.hpp"
#include "ricci/curvature.hpp"
#include "ricci/models.hpp"
#include "ricci/radial_profile.hpp"
#include "ricci/surface_ops.hpp"

namespace ricci {

// ---------------------------------------------------------------------------
// Boundary conditions

struct BoundaryMode {
  enum class Kind {
    none,              // closed surface, no boundary rows
    dirichlet_frozen,  // boundary pinned at its initial values
    dirichlet_fn,      // boundary follows fn(t, x, y) (profiles pass (t, r, 0))
    neumann_zero,      // zero-flux: mirror ghost nodes
    complete_barrier,  // exact expanding complete metric on the rim:
                       //   disc rim   u = 0.5 ln(2t) + ln(2R/(R^2-r^2))
                       //   inner rim  u = 0.5 ln(2t) - ln(r ln(1/r))
                       // with the t=0 value seeded at t = dt/2.
  };
  Kind kind = Kind::none;
  std::function<double(double, double, double)> fn;

  static BoundaryMode none() { return {Kind::none, {}}; }
  static BoundaryMode frozen() { return {Kind::dirichlet_frozen, {}}; }
  static BoundaryMode dirichlet(std::function<double(double, double, double)> f) {
    return {Kind::dirichlet_fn, std::move(f)};
  }
  static BoundaryMode neumann() { return {Kind::neumann_zero, {}}; }
  static BoundaryMode barrier() { return {Kind::complete_barrier, {}}; }
};

// ---------------------------------------------------------------------------
// Solver configuration

enum class Scheme { explicit_euler, implicit_euler };

struct SolverConfig {
  Scheme scheme = Scheme::implicit_euler;
  double dt = 1e-3;            // nominal (maximum) step
  double t_end = 1.0;
  bool cfl_adaptive = false;   // explicit: shrink dt to the CFL cap instead of refusing
  double cfl_safety = 0.8;     // explicit cap: dt <= safety * min(dx^2 e^{2u}) / 4
  double newton_tol = 1e-10;   // max-norm of the implicit residual
  int newton_max = 50;
  double extinction_fraction = 1e-3;  // stop once area < fraction * initial area
  double blowup_floor = 1e-12;        // stop once min e^{2u} dips below this
  double area_step_fraction = 0.0;    // >0: cap dt <= fraction * area / (8 pi)
  int record_stride = 1;
  std::vector<double> snapshot_times;
  std::int64_t max_steps = 4000000;
};

struct FlowSample {
  double t = 0.0;
  double area = 0.0;
  double min_K = 0.0, max_K = 0.0;
  double min_u = 0.0, max_u = 0.0;
};

enum class Termination { completed, extinction, blowup_floor, solver_failed };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::completed:   return "completed";
    case Termination::extinction:  return "extinction";
    case Termination::blowup_floor: return "blowup-floor";
    case Termination::solver_failed: return "solver-failed";
  }
  return "?";
}

struct FlowSnapshot {
  double t = 0.0;
  Surface geom;
};

struct FlowTrajectory {
  std::vector<FlowSample> samples;
  std::vector<FlowSnapshot> snapshots;
  Termination termination = Termination::completed;
  std::string note;
  double t_final = 0.0;
  double initial_area = 0.0;
  std::int64_t steps_taken = 0;
};

namespace detail {

// Tridiagonal affine operator (L w)_i = cm_i w_{i-1} + c0_i w_i + cp_i w_{i+1} + g_i.
struct TriRow {
  double cm = 0.0, c0 = 0.0, cp = 0.0, g = 0.0;
  bool pinned = false;  // Dirichlet row: value imposed, not evolved
};

inline double tri_apply(const std::vector<TriRow>& rows, const std::vector<double>& w, int i) {
  const TriRow& r = rows[i];
  double s = r.c0 * w[i] + r.g;
  if (i > 0) s += r.cm * w[i - 1];
  if (i + 1 < (int)w.size()) s += r.cp * w[i + 1];
  return s;
}

// Backward-Euler step for w_t = e^{-2w} (L w) with Newton iteration and an
// exact tridiagonal Jacobian solve. Pinned rows must already hold their
// boundary values in `w`. Convergence is judged against the tolerance plus a
// per-row floating-point floor: where e^{-2w} is enormous (deep cylinder-gauge
// pole rows) the residual cannot be evaluated below roundoff of its own
// terms, and demanding more would stall the iteration forever. On failure the
// input state is restored so the caller can retry with a smaller dt.
inline void implicit_tridiag_step(std::vector<double>& w, const std::vector<TriRow>& rows,
                                  double dt, double tol, int max_iter) {
  const int n = (int)w.size();
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  std::vector<double> w_old = w, F(n), dl(n), dd(n), du(n), delta(n), trial(n);

  double adj = 0.0;  // residual max-norm with the roundoff floor subtracted
  auto residual = [&](const std::vector<double>& v, std::vector<double>& out, double& adj_out) {
    double nrm = 0.0;
    adj_out = 0.0;
    for (int i = 0; i < n; ++i) {
      if (rows[i].pinned) { out[i] = 0.0; continue; }
      const double E = std::exp(-2.0 * v[i]);
      double mag = std::abs(rows[i].c0 * v[i]) + std::abs(rows[i].g);
      if (i > 0) mag += std::abs(rows[i].cm * v[i - 1]);
      if (i + 1 < n) mag += std::abs(rows[i].cp * v[i + 1]);
      out[i] = v[i] - w_old[i] - dt * E * tri_apply(rows, v, i);
      const double fp_floor = 8.0 * kEps * (std::abs(v[i]) + std::abs(w_old[i]) + dt * E * mag);
      nrm = std::max(nrm, std::abs(out[i]));
      adj_out = std::max(adj_out, std::abs(out[i]) - fp_floor);
    }
    return nrm;
  };

  double fn = residual(w, F, adj);
  for (int it = 0; it < max_iter; ++it) {
    if (adj <= tol) return;
    for (int i = 0; i < n; ++i) {
      if (rows[i].pinned) { dl[i] = 0; du[i] = 0; dd[i] = 1; continue; }
      const double E = std::exp(-2.0 * w[i]);
      dd[i] = 1.0 + 2.0 * dt * E * tri_apply(rows, w, i) - dt * E * rows[i].c0;
      dl[i] = -dt * E * rows[i].cm;
      du[i] = -dt * E * rows[i].cp;
    }
    // Thomas elimination for J delta = -F.
    std::vector<double>& cp = delta;  // reuse storage for the modified rhs
    std::vector<double> cprime(n);
    double beta = dd[0];
    if (std::abs(beta) < 1e-300) throw solver_failure("implicit step: singular Jacobian", fn);
    cprime[0] = du[0] / beta;
    cp[0] = -F[0] / beta;
    for (int i = 1; i < n; ++i) {
      beta = dd[i] - dl[i] * cprime[i - 1];
      if (std::abs(beta) < 1e-300) throw solver_failure("implicit step: singular Jacobian", fn);
      cprime[i] = du[i] / beta;
      cp[i] = (-F[i] - dl[i] * cp[i - 1]) / beta;
    }
    for (int i = n - 2; i >= 0; --i) cp[i] -= cprime[i] * cp[i + 1];

    // Damped update: halve until the floor-adjusted residual decreases. The
    // raw norm is useless as a merit function here: at the stiffest rows a
    // one-ulp move in w changes F by O(J_ii * ulp), so the raw value is pure
    // cancellation noise and "strict decrease" would stall on a lucky draw.
    double lam = 1.0, fn_new = 0.0, adj_new = 0.0;
    bool ok = false;
    std::vector<double> Ft(n);
    for (int back = 0; back < 12; ++back) {
      for (int i = 0; i < n; ++i) trial[i] = rows[i].pinned ? w[i] : w[i] + lam * delta[i];
      fn_new = residual(trial, Ft, adj_new);
      if (std::isfinite(fn_new) && adj_new <= tol) { w.swap(trial); return; }
      if (std::isfinite(fn_new) && adj_new < adj) { ok = true; break; }
      lam *= 0.5;
    }
    if (!ok) {
      w = w_old;
      throw solver_failure("implicit step: Newton stalled", adj);
    }
    w.swap(trial);
    F.swap(Ft);
    fn = fn_new;
    adj = adj_new;
  }
  if (adj > tol) {
    const double reached = adj;
    w = w_old;
    throw solver_failure("implicit step: Newton did not converge", reached);
  }
}

// ---------------------------------------------------------------------------
// Stepper interface: one per spatial representation.

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual double cfl_dt(double safety) const = 0;
  virtual void set_boundary(double t_eff) = 0;
  virtual void explicit_step(double dt) = 0;
  virtual void implicit_step(double dt, double tol, int max_iter) = 0;
  virtual double area() const = 0;
  virtual double min_factor() const = 0;  // min over modeled nodes of e^{2u}
  virtual void ranges(FlowSample& out) const = 0;  // fills K and u extrema
  virtual Surface materialize() const = 0;
};

// ------------------------------- 2D lattice --------------------------------

class GridStepper final : public Stepper {
 public:
  GridStepper(ConformalGrid g, const BoundaryMode& mode) : g_(std::move(g)), mode_(mode) {
    g_.validate();
    const int n = g_.n_nodes();
    for (int k = 0; k < n; ++k) {
      if (g_.mask[k] == NodeState::interior) upd_.push_back(k);
      else if (g_.mask[k] == NodeState::boundary) bnd_.push_back(k);
    }
    if (mode_.kind == BoundaryMode::Kind::neumann_zero) {
      // Zero-flux: boundary nodes evolve with mirrored ghosts.
      for (int k : bnd_) upd_.push_back(k);
      bnd_.clear();
      std::sort(upd_.begin(), upd_.end());
    }
    init_bc_ = g_.u;
    if (mode_.kind == BoundaryMode::Kind::complete_barrier) prepare_barrier();
    if (!bnd_.empty() && mode_.kind == BoundaryMode::Kind::none)
      throw invalid_input("flow: grid has boundary nodes but BoundaryMode::none");
  }

  double cfl_dt(double safety) const override {
    // Stability of explicit Euler for the 5-point operator: restrict the
    // scan to evolved nodes; frozen rim values never enter the update.
    double cap = std::numeric_limits<double>::infinity();
    for (int k : upd_) cap = std::min(cap, safety * g_.h * g_.h * std::exp(2.0 * g_.u[k]) / 4.0);
    return cap;
  }

  void set_boundary(double t_eff) override {
    switch (mode_.kind) {
      case BoundaryMode::Kind::none:
      case BoundaryMode::Kind::neumann_zero:
      case BoundaryMode::Kind::dirichlet_frozen:
        return;
      case BoundaryMode::Kind::dirichlet_fn:
        for (int k : bnd_) g_.u[k] = mode_.fn(t_eff, g_.x_of(k % g_.width), g_.y_of(k / g_.width));
        return;
      case BoundaryMode::Kind::complete_barrier:
        for (size_t q = 0; q < bnd_.size(); ++q) {
          if (std::isnan(barrier_offset_[q])) continue;  // frozen outer annulus rim
          g_.u[bnd_[q]] = 0.5 * std::log(2.0 * t_eff) + barrier_offset_[q];
        }
        return;
    }
  }

  void explicit_step(double dt) override {
    lap_.assign(g_.n_nodes(), 0.0);
    for (int k : upd_) lap_[k] = local_lap(k);
    for (int k : upd_) g_.u[k] += dt * std::exp(-2.0 * g_.u[k]) * lap_[k];
  }

  void implicit_step(double dt, double tol, int max_iter) override {
    // Newton outer loop; inner tridiagonal-free solve via Gauss-Seidel sweeps
    // on the sparse Jacobian (diagonally dominant for the relevant dt range).
    const int m = (int)upd_.size();
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    std::vector<double> u_old(m), F(m), delta(m);
    for (int q = 0; q < m; ++q) u_old[q] = g_.u[upd_[q]];

    double adj = 0.0;  // residual with the per-node roundoff floor subtracted
    auto compute_residual = [&]() {
      double nrm = 0.0;
      adj = 0.0;
      const double inv_h2_abs = 1.0 / (g_.h * g_.h);
      for (int q = 0; q < m; ++q) {
        const int k = upd_[q];
        const double E = std::exp(-2.0 * g_.u[k]);
        F[q] = g_.u[k] - u_old[q] - dt * E * local_lap(k);
        const double fp_floor =
            8.0 * kEps * (std::abs(g_.u[k]) + std::abs(u_old[q]) +
                          dt * E * 8.0 * inv_h2_abs * std::abs(g_.u[k]));
        nrm = std::max(nrm, std::abs(F[q]));
        adj = std::max(adj, std::abs(F[q]) - fp_floor);
      }
      return nrm;
    };

    double fn = compute_residual();
    for (int it = 0; it < max_iter; ++it) {
      if (adj <= tol) return;
      // Linearize: J = I - dt E (L - 2 diag(Lu)) with E = e^{-2u}. Solve
      // J delta = -F by damped Jacobi/GS sweeps in index order (deterministic).
      delta.assign(m, 0.0);
      slot_.assign(g_.n_nodes(), -1);
      for (int q = 0; q < m; ++q) slot_[upd_[q]] = q;
      const double inv_h2 = 1.0 / (g_.h * g_.h);
      for (int sweep = 0; sweep < 400; ++sweep) {
        double change = 0.0;
        for (int q = 0; q < m; ++q) {
          const int k = upd_[q];
          const double E = std::exp(-2.0 * g_.u[k]);
          const double diag = 1.0 + 4.0 * dt * E * inv_h2 + 2.0 * dt * E * local_lap(k);
          double off = 0.0;
          const int i = k % g_.width, j = k / g_.width;
          const int nb[4] = {g_.idx(i - 1, j), g_.idx(i + 1, j), g_.idx(i, j - 1), g_.idx(i, j + 1)};
          for (int t4 = 0; t4 < 4; ++t4) {
            int s = neighbor_slot(i, j, t4, nb);
            if (s >= 0) off += -dt * E * inv_h2 * delta[s];
          }
          const double next = (-F[q] - off) / diag;
          change = std::max(change, std::abs(next - delta[q]));
          delta[q] = next;
        }
        if (change <= 1e-4 * std::max(fn, 1e-30)) break;
      }
      // Backtrack on the floor-adjusted norm: the raw one is cancellation
      // noise wherever dt * e^{-2u} / h^2 is enormous.
      double lam = 1.0;
      const double adj_prev = adj;
      bool ok = false;
      std::vector<double> save(m);
      for (int q = 0; q < m; ++q) save[q] = g_.u[upd_[q]];
      for (int back = 0; back < 12; ++back) {
        for (int q = 0; q < m; ++q) g_.u[upd_[q]] = save[q] + lam * delta[q];
        const double fn_new = compute_residual();
        if (std::isfinite(fn_new) && adj <= tol) return;
        if (std::isfinite(fn_new) && adj < adj_prev) { fn = fn_new; ok = true; break; }
        lam *= 0.5;
      }
      if (!ok) {
        for (int q = 0; q < m; ++q) g_.u[upd_[q]] = u_old[q];
        throw solver_failure("implicit 2D step: Newton stalled", adj_prev);
      }
    }
    if (adj > tol) {
      const double reached = adj;
      for (int q = 0; q < m; ++q) g_.u[upd_[q]] = u_old[q];
      throw solver_failure("implicit 2D step: Newton did not converge", reached);
    }
  }

  double area() const override { return ricci::area(g_); }

  double min_factor() const override {
    double m = std::numeric_limits<double>::infinity();
    for (int k : upd_) m = std::min(m, std::exp(2.0 * g_.u[k]));
    return m;
  }

  void ranges(FlowSample& out) const override {
    double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
    double umin = kmin, umax = -kmin;
    for (int k : upd_) {
      if (g_.mask[k] == NodeState::interior) {
        const double K = -std::exp(-2.0 * g_.u[k]) * local_lap(k);
        kmin = std::min(kmin, K);
        kmax = std::max(kmax, K);
      }
    }
    for (int k = 0; k < g_.n_nodes(); ++k) {
      if (g_.mask[k] == NodeState::outside) continue;
      umin = std::min(umin, g_.u[k]);
      umax = std::max(umax, g_.u[k]);
    }
    out.min_K = kmin; out.max_K = kmax; out.min_u = umin; out.max_u = umax;
  }

  Surface materialize() const override { return g_; }

 private:
  int neighbor_slot(int i, int j, int which, const int nb[4]) const {
    static const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
    int k = nb[which];
    if (g_.state(i + di[which], j + dj[which]) == NodeState::outside) {
      // mirror ghost for zero-flux rims
      k = g_.idx(i - di[which], j - dj[which]);
      if (g_.state(i - di[which], j - dj[which]) == NodeState::outside) return -1;
    }
    return slot_.empty() ? -1 : slot_[k];
  }

  // 5-point Laplacian with mirror ghosts where a neighbor is missing (only
  // reachable when the node evolves under neumann_zero).
  double local_lap(int k) const {
    const int i = k % g_.width, j = k / g_.width;
    auto val = [&](int di, int dj) {
      if (g_.state(i + di, j + dj) != NodeState::outside) return g_.u[g_.idx(i + di, j + dj)];
      if (g_.state(i - di, j - dj) != NodeState::outside) return g_.u[g_.idx(i - di, j - dj)];
      return g_.u[k];
    };
    return (val(-1, 0) + val(1, 0) + val(0, -1) + val(0, 1) - 4.0 * g_.u[k]) / (g_.h * g_.h);
  }

  void prepare_barrier() {
    // Disc rims take the expanding hyperbolic factor of a disc half a spacing
    // wider than the chart, so lattice nodes sitting exactly on the chart
    // radius still get finite values; the widening vanishes under refinement.
    // Annulus charts get the expanding cusp on the inner rim only; the outer
    // rim stays frozen (NaN offset) to emulate the surrounding plane.
    barrier_offset_.resize(bnd_.size());
    const bool annulus = g_.chart == ChartKind::annulus;
    const double split = annulus ? 0.5 * (g_.inner_radius + g_.outer_radius) : 0.0;
    const double R = g_.outer_radius + 0.5 * g_.h;
    for (size_t q = 0; q < bnd_.size(); ++q) {
      const int k = bnd_[q];
      const double x = g_.x_of(k % g_.width), y = g_.y_of(k / g_.width);
      const double r = std::hypot(x, y);
      if (annulus) {
        barrier_offset_[q] = r < split ? u_cusp(r, 0.0)  // expanding cusp, inner rim
                                       : std::numeric_limits<double>::quiet_NaN();
      } else {
        if (r >= R) throw invalid_input("barrier: rim node outside the widened chart disc");
        barrier_offset_[q] = std::log(2.0 * R / (R * R - r * r));
      }
    }
  }

  ConformalGrid g_;
  BoundaryMode mode_;
  std::vector<int> upd_, bnd_;
  std::vector<double> init_bc_, lap_;
  std::vector<double> barrier_offset_;
  std::vector<int> slot_;
};

// --------------------------- radial plane chart ----------------------------

class ProfilePlaneStepper final : public Stepper {
 public:
  ProfilePlaneStepper(RadialProfile p, const BoundaryMode& mode) : p_(std::move(p)), mode_(mode) {
    p_.validate();
    if (p_.topology != ProfileTopology::plane_chart)
      throw invalid_input("ProfilePlaneStepper: plane-chart profile required");
    const int n = p_.n();
    rows_.resize(n);
    axis_ = p_.r[0] < 1e-12;
    for (int i = 1; i + 1 < n; ++i) {
      const double a = p_.r[i] - p_.r[i - 1], b = p_.r[i + 1] - p_.r[i];
      // u_rr + u_r / r on a nonuniform mesh
      const double w = 2.0 / (a * b * (a + b)), fr = 1.0 / (p_.r[i] * (a + b));
      rows_[i].cm = w * b - fr;
      rows_[i].cp = w * a + fr;
      rows_[i].c0 = -w * (a + b);
    }
    if (axis_) {
      const double r1 = p_.r[1];
      rows_[0].cp = 4.0 / (r1 * r1);
      rows_[0].c0 = -4.0 / (r1 * r1);
    } else {
      rows_[0].pinned = true;
    }
    rows_[n - 1].pinned = true;
    if (mode_.kind == BoundaryMode::Kind::neumann_zero) {
      // one-sided zero-slope ghosts at both ends
      if (!axis_) {
        const double b = p_.r[1] - p_.r[0];
        rows_[0].pinned = false;
        rows_[0].cp = 2.0 / (b * b);
        rows_[0].c0 = -2.0 / (b * b);
      }
      const double a = p_.r[n - 1] - p_.r[n - 2];
      rows_[n - 1].pinned = false;
      rows_[n - 1].cm = 2.0 / (a * a);
      rows_[n - 1].c0 = -2.0 / (a * a);
    }
    if (mode_.kind == BoundaryMode::Kind::complete_barrier) {
      if (!axis_) {
        const double r0 = p_.r[0];
        if (!(r0 > 0.0 && r0 < 1.0))
          throw invalid_input("barrier: inner rim radius must sit in (0,1) for the cusp factor");
        inner_offset_ = u_cusp(r0, 0.0);
      }
      // Outer rim: expanding hyperbolic factor of a slightly larger chart
      // disc so the rim value stays finite (collar of three spacings).
      const double rl = p_.r[n - 1];
      barrier_R_ = rl + 3.0 * (rl - p_.r[n - 2]);
      outer_offset_ = std::log(2.0 * barrier_R_ / (barrier_R_ * barrier_R_ - rl * rl));
      outer_is_barrier_ = axis_;  // annulus profiles freeze the outer rim instead
    }
    init0_ = p_.u[0];
    init1_ = p_.u[p_.n() - 1];
  }

  double cfl_dt(double safety) const override {
    double cap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p_.n(); ++i) {
      if (rows_[i].pinned) continue;
      const double denom = std::abs(rows_[i].c0);
      if (denom > 0)
        cap = std::min(cap, safety * 2.0 * std::exp(2.0 * p_.u[i]) / denom / 2.0);
    }
    return cap;
  }

  void set_boundary(double t_eff) override {
    const int n = p_.n();
    switch (mode_.kind) {
      case BoundaryMode::Kind::none:
        if (!axis_ || rows_[n - 1].pinned)
          throw invalid_input("flow: open profile needs a boundary mode");
        return;
      case BoundaryMode::Kind::neumann_zero:
      case BoundaryMode::Kind::dirichlet_frozen:
        return;
      case BoundaryMode::Kind::dirichlet_fn:
        if (!axis_) p_.u[0] = mode_.fn(t_eff, p_.r[0], 0.0);
        p_.u[n - 1] = mode_.fn(t_eff, p_.r[n - 1], 0.0);
        return;
      case BoundaryMode::Kind::complete_barrier: {
        const double lift = 0.5 * std::log(2.0 * t_eff);
        if (!axis_) {
          p_.u[0] = lift + inner_offset_;
          // annulus: outer rim frozen at the initial profile
        } else {
          p_.u[n - 1] = lift + outer_offset_;
        }
        return;
      }
    }
  }

  void explicit_step(double dt) override {
    scratch_ = p_.u;
    for (int i = 0; i < p_.n(); ++i) {
      if (rows_[i].pinned) continue;
      p_.u[i] = scratch_[i] + dt * std::exp(-2.0 * scratch_[i]) * tri_apply(rows_, scratch_, i);
    }
  }

  void implicit_step(double dt, double tol, int max_iter) override {
    implicit_tridiag_step(p_.u, rows_, dt, tol, max_iter);
  }

  double area() const override { return total_area(p_); }

  double min_factor() const override {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p_.n(); ++i)
      if (!rows_[i].pinned) m = std::min(m, std::exp(2.0 * p_.u[i]));
    return m;
  }

  void ranges(FlowSample& out) const override {
    double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
    for (int i = 0; i < p_.n(); ++i) {
      if (rows_[i].pinned) continue;
      const double K = -std::exp(-2.0 * p_.u[i]) * tri_apply(rows_, p_.u, i);
      kmin = std::min(kmin, K);
      kmax = std::max(kmax, K);
    }
    out.min_K = kmin; out.max_K = kmax;
    out.min_u = min_u(p_); out.max_u = max_u(p_);
  }

  Surface materialize() const override { return p_; }

 private:
  RadialProfile p_;
  BoundaryMode mode_;
  std::vector<TriRow> rows_;
  std::vector<double> scratch_;
  bool axis_ = false, outer_is_barrier_ = false;
  double inner_offset_ = 0.0, outer_offset_ = 0.0, barrier_R_ = 0.0;
  double init0_ = 0.0, init1_ = 0.0;
};

// ------------------------- double-chart sphere gauge -----------------------

class ProfileSphereStepper final : public Stepper {
 public:
  explicit ProfileSphereStepper(RadialProfile p) : ref_(std::move(p)) {
    ref_.validate();
    if (ref_.topology != ProfileTopology::sphere_double_chart)
      throw invalid_input("ProfileSphereStepper: sphere profile required");
    eq_ = ref_.equator_index;
    const int m = eq_ + 1;
    s_.resize(ref_.n());
    for (int i = 0; i < ref_.n(); ++i) s_[i] = std::log(ref_.r[i]);
    ds_ = s_[1] - s_[0];
    for (int i = 1; i < ref_.n(); ++i)
      if (std::abs((s_[i] - s_[i - 1]) - ds_) > 1e-9 * std::abs(ds_))
        throw invalid_input("sphere flow: profile must be uniform in s = ln r");
    v_.resize(m);
    for (int i = 0; i < m; ++i) v_[i] = ref_.u[i] + s_[i];
    rows_.resize(m);
    const double inv = 1.0 / (ds_ * ds_);
    for (int i = 1; i < m - 1; ++i) { rows_[i] = {inv, -2.0 * inv, inv, 0.0, false}; }
    // Pole cut: the smooth cap forces v_s -> +1 as s -> -inf; impose it with a
    // second-order ghost. Error is O(pole-cap radius^2), far below grid error.
    rows_[0] = {0.0, -2.0 * inv, 2.0 * inv, -2.0 / ds_, false};
    // Equator: even symmetry, ghost v_{eq+1} = v_{eq-1}.
    rows_[m - 1] = {2.0 * inv, -2.0 * inv, 0.0, 0.0, false};
  }

  double cfl_dt(double safety) const override {
    double vmin = v_[0];
    for (double x : v_) vmin = std::min(vmin, x);
    return safety * ds_ * ds_ * std::exp(2.0 * vmin) / 4.0;
  }

  void set_boundary(double) override {}

  void explicit_step(double dt) override {
    scratch_ = v_;
    for (size_t i = 0; i < v_.size(); ++i)
      v_[i] = scratch_[i] + dt * std::exp(-2.0 * scratch_[i]) * tri_apply(rows_, scratch_, (int)i);
  }

  void implicit_step(double dt, double tol, int max_iter) override {
    implicit_tridiag_step(v_, rows_, dt, tol, max_iter);
  }

  double area() const override {
    // Cylinder-gauge area element is 2 pi e^{2v} ds; both hemispheres plus the
    // two flat caps closing the pole cuts.
    double half = 0.0;
    for (size_t i = 0; i + 1 < v_.size(); ++i)
      half += 0.5 * (std::exp(2.0 * v_[i]) + std::exp(2.0 * v_[i + 1])) * ds_;
    return 2.0 * (2.0 * kPi * half) + 2.0 * kPi * std::exp(2.0 * v_[0]);
  }

  double min_factor() const override {
    // Blow-up is judged on the chart factor e^{2u}; e^{2v} = e^{2u} r^2 goes
    // tiny near the pole cut on any healthy surface with a deep s-ladder.
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < v_.size(); ++i)
      m = std::min(m, std::exp(2.0 * (v_[i] - s_[i])));
    return m;
  }

  void ranges(FlowSample& out) const override {
    // Rows 0-1 belong to the pole closure: row 0 is the ghost-slope condition
    // itself and row 1's stencil touches it, so the curvature scan starts at
    // the first row with a genuine interior stencil. Rows whose second
    // difference sits below its own cancellation roundoff are mute: with v
    // linear in s to machine precision, e^{-2v} (which can reach e^{100+} on
    // a deep ladder) amplifies pure noise, so they are skipped.
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    const double inv = 1.0 / (ds_ * ds_);
    double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
    for (int i = 2; i < (int)v_.size(); ++i) {
      const double d2 = tri_apply(rows_, v_, i);
      const double mute = 8.0 * kEps * inv *
          (std::abs(v_[i - 1]) + 2.0 * std::abs(v_[i]) +
           (i + 1 < (int)v_.size() ? std::abs(v_[i + 1]) : 0.0));
      if (std::abs(d2) <= mute) continue;
      const double K = -std::exp(-2.0 * v_[i]) * d2;
      kmin = std::min(kmin, K);
      kmax = std::max(kmax, K);
    }
    if (kmin > kmax) { kmin = 0.0; kmax = 0.0; }  // everything flat to roundoff
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    for (int i = 0; i < (int)v_.size(); ++i) {
      const double u = v_[i] - s_[i];
      umin = std::min(umin, u);
      umax = std::max(umax, u);
    }
    out.min_K = kmin; out.max_K = kmax; out.min_u = umin; out.max_u = umax;
  }

  Surface materialize() const override {
    RadialProfile p = ref_;
    for (int i = 0; i < p.n(); ++i) {
      const int half = i <= eq_ ? i : 2 * eq_ - i;  // overlap mirrors the flow data
      p.u[i] = v_[half] - s_[i];
    }
    return p;
  }

 private:
  RadialProfile ref_;
  int eq_ = 0;
  double ds_ = 0.0;
  std::vector<double> s_, v_, scratch_;
  std::vector<TriRow> rows_;
};

inline std::unique_ptr<Stepper> make_stepper(const Surface& s, const BoundaryMode& mode) {
  if (std::holds_alternative<ConformalGrid>(s))
    return std::make_unique<GridStepper>(std::get<ConformalGrid>(s), mode);
  const RadialProfile& p = std::get<RadialProfile>(s);
  if (p.topology == ProfileTopology::sphere_double_chart)
    return std::make_unique<ProfileSphereStepper>(p);
  return std::make_unique<ProfilePlaneStepper>(p, mode);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single step (unit-test hook): advances `s` in place from time t by dt.

inline void flow_step(Surface& s, double t, double dt, const SolverConfig& cfg,
                      const BoundaryMode& mode = BoundaryMode::none()) {
  auto st = detail::make_stepper(s, mode);
  if (cfg.scheme == Scheme::explicit_euler) {
    const double cap = st->cfl_dt(cfg.cfl_safety);
    if (dt > cap)
      throw refuse_step("explicit step rejected: dt " + fmt17(dt) + " exceeds CFL cap " + fmt17(cap));
    st->set_boundary(t <= 0.0 ? 0.5 * dt : t);
    st->explicit_step(dt);
  } else {
    st->set_boundary(t + dt);
    st->implicit_step(dt, cfg.newton_tol, cfg.newton_max);
  }
  s = st->materialize();
}

// ---------------------------------------------------------------------------
// Full trajectory

inline FlowTrajectory run_flow(const Surface& initial, const SolverConfig& cfg,
                               const BoundaryMode& mode = BoundaryMode::none()) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) throw invalid_input("run_flow: dt and t_end must be positive");
  auto st = detail::make_stepper(initial, mode);

  FlowTrajectory traj;
  std::vector<double> snap_req = cfg.snapshot_times;
  std::sort(snap_req.begin(), snap_req.end());
  size_t next_snap = 0;

  auto record = [&](double t) {
    FlowSample s;
    s.t = t;
    s.area = st->area();
    st->ranges(s);
    traj.samples.push_back(s);
  };

  st->set_boundary(0.5 * cfg.dt);  // barrier rims need a strictly positive seed time
  traj.initial_area = st->area();
  record(0.0);
  traj.snapshots.push_back({0.0, st->materialize()});
  while (next_snap < snap_req.size() && snap_req[next_snap] <= 0.0) ++next_snap;

  double t = 0.0;
  const double t_eps = 1e-12 * std::max(1.0, cfg.t_end);
  std::int64_t step_no = 0;

  while (t < cfg.t_end - t_eps) {
    if (st->area() < cfg.extinction_fraction * traj.initial_area) {
      traj.termination = Termination::extinction;
      break;
    }
    if (st->min_factor() < cfg.blowup_floor) {
      traj.termination = Termination::blowup_floor;
      break;
    }
    if (step_no >= cfg.max_steps) {
      traj.termination = Termination::solver_failed;
      traj.note = "step budget exhausted";
      break;
    }

    double dt = std::min(cfg.dt, cfg.t_end - t);
    if (cfg.area_step_fraction > 0.0)
      dt = std::min(dt, cfg.area_step_fraction * st->area() / (8.0 * kPi));

    bool advanced = false;
    if (cfg.scheme == Scheme::explicit_euler) {
      const double cap = st->cfl_dt(cfg.cfl_safety);
      if (dt > cap) {
        if (!cfg.cfl_adaptive)
          throw refuse_step("explicit flow: dt " + fmt17(dt) + " exceeds CFL cap " + fmt17(cap) +
                            " at t " + fmt17(t));
        dt = cap;
      }
      if (!(dt > 0.0) || !std::isfinite(dt)) {
        traj.termination = Termination::solver_failed;
        traj.note = "CFL cap collapsed";
        break;
      }
      st->set_boundary(t <= 0.0 ? 0.5 * dt : t);
      st->explicit_step(dt);
      st->set_boundary(t + dt);  // recorded state sees the rim at the new time
      advanced = true;
    } else {
      double try_dt = dt;
      for (int attempt = 0; attempt < 13; ++attempt) {
        try {
          st->set_boundary(t + try_dt);
          st->implicit_step(try_dt, cfg.newton_tol, cfg.newton_max);
          dt = try_dt;
          advanced = true;
          break;
        } catch (const solver_failure&) {
          try_dt *= 0.5;
          if (attempt == 12) {
            traj.termination = Termination::solver_failed;
            traj.note = "Newton failed after 12 dt halvings at t " + fmt17(t);
          }
        }
      }
      if (!advanced) break;
    }

    t += dt;
    ++step_no;
    if (step_no % std::max(1, cfg.record_stride) == 0 || t >= cfg.t_end - t_eps) record(t);
    while (next_snap < snap_req.size() && t >= snap_req[next_snap] - t_eps) {
      traj.snapshots.push_back({t, st->materialize()});
      ++next_snap;
    }
  }

  if (traj.samples.empty() || traj.samples.back().t < t - t_eps) record(t);
  if (traj.snapshots.empty() || traj.snapshots.back().t < t - t_eps)
    traj.snapshots.push_back({t, st->materialize()});
  traj.t_final = t;
  traj.steps_taken = step_no;
  return traj;
}

// ---------------------------------------------------------------------------
// Closed-form comparison states and parabolic rescaling

// Exact constant-curvature evolutions: round sphere shrinks as (1-2t) g0
// (gone at t = 1/2), hyperbolic models expand as (1+2t) g0, flat is static.
inline Surface closed_form_state(const ModelSpec& spec, double t) {
  double shift = 0.0;
  switch (spec.kind) {
    case ModelKind::flat:
      shift = 0.0;
      break;
    case ModelKind::round_sphere:
      if (t >= 0.5) throw invalid_input("closed_form_state: round sphere is extinct at t >= 1/2");
      shift = 0.5 * std::log(1.0 - 2.0 * t);
      break;
    case ModelKind::poincare_disc:
    case ModelKind::hyperbolic_cusp:
      shift = 0.5 * std::log(1.0 + 2.0 * t);
      break;
    default:
      throw invalid_input("closed_form_state: no closed form for this model");
  }
  Surface s = make_model(spec);
  std::visit([&](auto& g) { for (double& x : g.u) x += shift; }, s);
  return s;
}

inline Surface rescale_surface(Surface s, double lambda) {
  if (!(lambda > 0.0)) throw invalid_input("rescale: lambda must be positive");
  const double shift = 0.5 * std::log(lambda);
  std::visit([&](auto& g) { for (double& x : g.u) x += shift; }, s);
  return s;
}

// g -> lambda g, t -> lambda t. Summary rows transform arithmetically; stored
// snapshots get the conformal shift so curvature can be recomputed from them.
inline FlowTrajectory rescale_trajectory(const FlowTrajectory& in, double lambda) {
  if (!(lambda > 0.0)) throw invalid_input("rescale: lambda must be positive");
  FlowTrajectory out = in;
  const double shift = 0.5 * std::log(lambda);
  for (FlowSample& s : out.samples) {
    s.t *= lambda;
    s.area *= lambda;
    s.min_K /= lambda;
    s.max_K /= lambda;
    s.min_u += shift;
    s.max_u += shift;
  }
  for (FlowSnapshot& sn : out.snapshots) {
    sn.t *= lambda;
    sn.geom = rescale_surface(std::move(sn.geom), lambda);
  }
  out.t_final *= lambda;
  out.initial_area *= lambda;
  return out;
}

}  // namespace ricci
