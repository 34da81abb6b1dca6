#pragma once

// Epsilon-net construction, pointed approximation checking between finite
// metric spaces, certified GH-closeness upper bounds, and tangent-rescaling
// based singular/regular classification.
//
// Conventions ("the net contract"):
//  * maximal_net uses greedy farthest-point selection seeded at the
//    basepoint, ties broken by lowest index; candidates are the points within
//    r - eps/9 of the basepoint; selection stops once every remaining
//    candidate is within 2 eps/9 of the net (so packing balls of radius
//    eps/9 are pairwise disjoint and maximality holds).
//  * a map's eps* is max(distortion over net pairs, the bisected smallest
//    eps whose eps-neighborhood of the image covers the target ball of
//    radius r - eps); bisection runs 80 halvings on [0, 2r].
//  * gh_upper_estimate reports min over net levels of
//    max(best map eps*, net covering radii); the exhaustive branch
//    enumerates every basepoint-preserving total map when that count is
//    affordable, and is then provably minimal over net maps.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ricci/common.hpp"
#include "ricci/finite_metric_space.hpp"

namespace ricci {

struct PointMap {
  std::vector<int> f;  // f[i] = target index for source point i
};

struct NetResult {
  std::vector<int> points;       // indices into the source space
  double packing_radius = 0.0;   // eps/9
  double covering_radius = 0.0;  // measured over the candidate ball
  double required_covering = 0.0;  // eps/3 (the guarantee being checked)
  bool covering_ok = false;
  int cardinality = 0;
};

inline NetResult maximal_net(const FiniteMetricSpace& X, int x0, double r, double eps) {
  if (!(eps > 0.0) || !(eps < r)) throw invalid_input("maximal_net: need 0 < eps < r");
  if (x0 < 0 || x0 >= X.n) throw invalid_input("maximal_net: basepoint out of range");

  std::vector<int> cand;
  for (int i = 0; i < X.n; ++i)
    if (X.dist(x0, i) <= r - eps / 9.0) cand.push_back(i);
  if (cand.empty()) throw invalid_input("maximal_net: empty ball");

  NetResult out;
  out.packing_radius = eps / 9.0;
  out.required_covering = eps / 3.0;

  const double sep = 2.0 * eps / 9.0;
  std::vector<double> min_d(cand.size(), std::numeric_limits<double>::infinity());
  out.points.push_back(x0);
  for (size_t c = 0; c < cand.size(); ++c) min_d[c] = X.dist(x0, cand[c]);
  for (;;) {
    int best = -1;
    double best_d = sep;
    for (size_t c = 0; c < cand.size(); ++c) {
      if (min_d[c] > best_d) {  // strict: ties keep the earlier (lower) index
        best_d = min_d[c];
        best = (int)c;
      }
    }
    if (best < 0) break;  // maximality: everything within sep of the net
    out.points.push_back(cand[best]);
    for (size_t c = 0; c < cand.size(); ++c) min_d[c] = std::min(min_d[c], X.dist(cand[best], cand[c]));
  }
  out.cardinality = (int)out.points.size();
  out.covering_radius = 0.0;
  for (size_t c = 0; c < cand.size(); ++c) out.covering_radius = std::max(out.covering_radius, min_d[c]);
  out.covering_ok = out.covering_radius <= out.required_covering;
  return out;
}

inline double distortion(const PointMap& m, const FiniteMetricSpace& X, const FiniteMetricSpace& Y) {
  if ((int)m.f.size() != X.n) throw invalid_input("distortion: map not total on X");
  double worst = 0.0;
  for (int i = 0; i < X.n; ++i) {
    if (m.f[i] < 0 || m.f[i] >= Y.n) throw invalid_input("distortion: target index out of range");
    for (int j = i + 1; j < X.n; ++j)
      worst = std::max(worst, std::abs(Y.dist(m.f[i], m.f[j]) - X.dist(i, j)));
  }
  return worst;
}

struct GhApproxCheck {
  bool pass = false;
  bool basepoint_ok = false;
  double distortion_value = 0.0;   // condition 2: must be <= eps
  double coverage_defect = 0.0;    // condition 3: must be <= eps
  std::string witness;
};

// The three pointed-approximation conditions, evaluated exactly on the data:
// basepoint preserved; distortion over B_X(x0, r) pairs <= eps; the
// eps-neighborhood of the image covers B_Y(y0, r - eps).
inline GhApproxCheck check_pointed_gh_approx(const PointMap& m, const FiniteMetricSpace& X,
                                             const FiniteMetricSpace& Y, double r, double eps) {
  if ((int)m.f.size() != X.n) throw invalid_input("check_pointed_gh_approx: map not total on X");
  GhApproxCheck out;
  out.basepoint_ok = m.f[X.basepoint] == Y.basepoint;

  std::vector<int> ball;
  for (int i = 0; i < X.n; ++i)
    if (X.dist(X.basepoint, i) <= r) ball.push_back(i);
  for (size_t a = 0; a < ball.size(); ++a)
    for (size_t b = a + 1; b < ball.size(); ++b) {
      const double d = std::abs(Y.dist(m.f[ball[a]], m.f[ball[b]]) - X.dist(ball[a], ball[b]));
      if (d > out.distortion_value) {
        out.distortion_value = d;
        out.witness = "pair " + std::to_string(ball[a]) + "," + std::to_string(ball[b]);
      }
    }

  for (int y = 0; y < Y.n; ++y) {
    if (Y.dist(Y.basepoint, y) > r - eps) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (int i : ball) nearest = std::min(nearest, Y.dist(m.f[i], y));
    if (nearest > out.coverage_defect) {
      out.coverage_defect = nearest;
      if (nearest > eps) out.witness = "uncovered target " + std::to_string(y);
    }
  }
  out.pass = out.basepoint_ok && out.distortion_value <= eps && out.coverage_defect <= eps;
  return out;
}

namespace detail {

// Smallest eps with coverage-defect(eps) <= eps, for a fixed map on net
// spaces. The defect is nonincreasing in eps (the target ball shrinks), so
// the predicate is monotone and bisection applies.
inline double coverage_eps(const PointMap& m, const FiniteMetricSpace& X,
                           const FiniteMetricSpace& Y, double r) {
  auto defect_ok = [&](double eps) {
    for (int y = 0; y < Y.n; ++y) {
      if (Y.dist(Y.basepoint, y) > r - eps) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (int i = 0; i < X.n; ++i) nearest = std::min(nearest, Y.dist(m.f[i], y));
      if (nearest > eps) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 2.0 * r;
  if (defect_ok(lo)) return lo;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (defect_ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

inline double map_eps_star(const PointMap& m, const FiniteMetricSpace& X,
                           const FiniteMetricSpace& Y, double r) {
  return std::max(distortion(m, X, Y), coverage_eps(m, X, Y, r));
}

}  // namespace detail

struct GhEstimate {
  double eps_star = 0.0;
  bool exhaustive = false;  // true when the winning level enumerated all maps
  int level = 0;            // net ladder level j (eps_net = r / 2^j)
  int net_x = 0, net_y = 0;
  double granularity = 0.0;  // max net covering radius folded into eps_star
};

// Certified upper bound on pointed-GH closeness of two finite pointed spaces,
// via a ladder of matched nets. Exhaustive over all basepoint-preserving
// total maps when |netY|^(|netX|-1) is affordable; greedy distance-profile
// matching otherwise (still an upper bound, flagged non-exhaustive).
inline GhEstimate gh_upper_estimate(const FiniteMetricSpace& X, const FiniteMetricSpace& Y,
                                    double r, int levels = 6,
                                    std::int64_t exhaustive_budget = 2000000) {
  if (X.n < 1 || Y.n < 1) throw invalid_input("gh_upper_estimate: empty space");
  GhEstimate best;
  best.eps_star = std::numeric_limits<double>::infinity();

  for (int j = 1; j <= levels; ++j) {
    const double eps_net = r / std::pow(2.0, j);
    if (!(eps_net < r)) continue;
    NetResult nx, ny;
    try {
      nx = maximal_net(X, X.basepoint, r, eps_net);
      ny = maximal_net(Y, Y.basepoint, r, eps_net);
    } catch (const invalid_input&) {
      continue;  // empty ball at this level
    }
    FiniteMetricSpace sx = sub_space(X, nx.points);
    FiniteMetricSpace sy = sub_space(Y, ny.points);

    // count basepoint-preserving total maps sx -> sy
    double count = 1.0;
    for (int q = 1; q < sx.n; ++q) {
      count *= sy.n;
      if (count > (double)exhaustive_budget) break;
    }
    const bool exhaustive = count <= (double)exhaustive_budget;

    double level_eps = std::numeric_limits<double>::infinity();
    if (exhaustive) {
      PointMap m;
      m.f.assign(sx.n, 0);
      m.f[sx.basepoint] = sy.basepoint;
      // odometer over all non-basepoint slots
      std::vector<int> slots;
      for (int q = 0; q < sx.n; ++q)
        if (q != sx.basepoint) slots.push_back(q);
      for (;;) {
        level_eps = std::min(level_eps, detail::map_eps_star(m, sx, sy, r));
        int pos = (int)slots.size() - 1;
        while (pos >= 0) {
          if (++m.f[slots[pos]] < sy.n) break;
          m.f[slots[pos]] = 0;
          --pos;
        }
        if (pos < 0) break;
      }
    } else {
      // Incremental profile matching: place net points in their farthest-first
      // order, each to the target minimizing the worst distance mismatch
      // against everything already placed. Matching on the base distance alone
      // would collapse whole symmetry orbits onto one target.
      PointMap m;
      m.f.assign(sx.n, sy.basepoint);
      std::vector<int> placed{sx.basepoint};
      for (int q = 0; q < sx.n; ++q) {
        if (q == sx.basepoint) continue;
        double bestd = std::numeric_limits<double>::infinity();
        int pick = 0;
        for (int y = 0; y < sy.n; ++y) {
          double mis = 0.0;
          for (int p : placed)
            mis = std::max(mis, std::abs(sy.dist(y, m.f[p]) - sx.dist(q, p)));
          if (mis < bestd) { bestd = mis; pick = y; }
        }
        m.f[q] = pick;
        placed.push_back(q);
      }
      level_eps = detail::map_eps_star(m, sx, sy, r);
    }

    const double gran = std::max(nx.covering_radius, ny.covering_radius);
    const double total = std::max(level_eps, gran);
    if (total < best.eps_star) {
      best.eps_star = total;
      best.exhaustive = exhaustive;
      best.level = j;
      best.net_x = sx.n;
      best.net_y = sy.n;
      best.granularity = gran;
    }
  }
  if (!std::isfinite(best.eps_star))
    throw invalid_input("gh_upper_estimate: no usable net level");
  return best;
}

// Volume-comparison packing bound: any maximal net in a ball of radius r with
// the given area bounds has at most floor(upper/lower) points (never < 1).
inline int packing_cardinality_bound(double r, double eps, double ball_area_upper,
                                     double small_ball_area_lower) {
  if (!(r > 0.0) || !(eps > 0.0) || !(ball_area_upper > 0.0) || !(small_ball_area_lower > 0.0))
    throw invalid_input("packing_cardinality_bound: positive inputs required");
  return std::max(1, (int)std::floor(ball_area_upper / small_ball_area_lower));
}

inline FiniteMetricSpace tangent_rescale(const FiniteMetricSpace& X, int p, double lambda) {
  if (!(lambda > 0.0)) throw invalid_input("tangent_rescale: lambda must be positive");
  if (p < 0 || p >= X.n) throw invalid_input("tangent_rescale: basepoint out of range");
  FiniteMetricSpace out = X;
  out.basepoint = p;
  for (double& v : out.d) v *= lambda;
  return out;
}

// ---------------------------------------------------------------------------
// Tangent-cone classifier

enum class Verdict { regular, singular, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::regular: return "regular";
    case Verdict::singular: return "singular";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

// Callback: sample the ball of the given radius around the probe point in the
// original space (basepoint = probe point, layout consistent across radii).
using BallSampler = std::function<FiniteMetricSpace(double radius)>;

struct SingularReport {
  Verdict verdict = Verdict::inconclusive;
  std::vector<double> lambdas;
  std::vector<double> eps_by_lambda;  // gh estimate vs the flat reference per ball rescaling
  double threshold = 0.0;
};

// Compare lambda-rescaled balls around the probe point against a flat disc of
// the same radius: singular iff the discrepancy stays >= threshold for every
// lambda; regular iff < threshold for every lambda; mixed -> inconclusive.
inline SingularReport detect_singular(const BallSampler& sample_ball,
                                      const FiniteMetricSpace& flat_reference,
                                      const std::vector<double>& lambdas, double ball_radius,
                                      double threshold = -1.0) {
  if (lambdas.empty()) throw invalid_input("detect_singular: empty lambda list");
  for (size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1]))
      throw invalid_input("detect_singular: lambda list must increase");
  SingularReport rep;
  rep.lambdas = lambdas;
  rep.threshold = threshold > 0.0 ? threshold : 0.05 * ball_radius;
  int above = 0, below = 0;
  for (double lam : lambdas) {
    FiniteMetricSpace ball = sample_ball(ball_radius / lam);
    FiniteMetricSpace scaled = tangent_rescale(ball, ball.basepoint, lam);
    const double e = gh_upper_estimate(scaled, flat_reference, ball_radius).eps_star;
    rep.eps_by_lambda.push_back(e);
    (e >= rep.threshold ? above : below) += 1;
  }
  if (above == (int)lambdas.size()) rep.verdict = Verdict::singular;
  else if (below == (int)lambdas.size()) rep.verdict = Verdict::regular;
  else rep.verdict = Verdict::inconclusive;
  return rep;
}

}  // namespace ricci
