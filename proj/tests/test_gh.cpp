#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "ricci/gh.hpp"
#include "ricci/sampling.hpp"

using namespace ricci;

namespace {

FiniteMetricSpace uniform_space(int n, double d) {
  FiniteMetricSpace f;
  f.n = n;
  f.basepoint = 0;
  f.d.assign((size_t)n * n, d);
  for (int i = 0; i < n; ++i) f.at(i, i) = 0.0;
  f.validate();
  return f;
}

FiniteMetricSpace line_space(const std::vector<double>& xs) {
  FiniteMetricSpace f;
  f.n = (int)xs.size();
  f.basepoint = 0;
  f.d.assign((size_t)f.n * f.n, 0.0);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) f.at(i, j) = std::abs(xs[i] - xs[j]);
  f.validate();
  return f;
}

FiniteMetricSpace planar_space(const std::vector<std::pair<double, double>>& pts) {
  FiniteMetricSpace f;
  f.n = (int)pts.size();
  f.basepoint = 0;
  f.d.assign((size_t)f.n * f.n, 0.0);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j)
      f.at(i, j) = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
  f.validate();
  return f;
}

// Independent recomputation of the net-ladder upper bound: recursive map
// enumeration instead of the odometer, ordered-pair distortion scan, own
// coverage bisection with the library's constants (eps in [0, 2r], 80 halvings).
double oracle_map_eps(const std::vector<int>& f, const FiniteMetricSpace& X,
                      const FiniteMetricSpace& Y, double r) {
  double dist = 0.0;
  for (int i = 0; i < X.n; ++i)
    for (int j = 0; j < X.n; ++j)
      if (i != j) dist = std::max(dist, std::abs(Y.dist(f[i], f[j]) - X.dist(i, j)));
  auto defect_ok = [&](double eps) {
    for (int y = 0; y < Y.n; ++y) {
      if (Y.dist(Y.basepoint, y) > r - eps) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (int i = 0; i < X.n; ++i) nearest = std::min(nearest, Y.dist(f[i], y));
      if (nearest > eps) return false;
    }
    return true;
  };
  double cov = 0.0;
  if (!defect_ok(0.0)) {
    double lo = 0.0, hi = 2.0 * r;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (defect_ok(mid) ? hi : lo) = mid;
    }
    cov = hi;
  }
  return std::max(dist, cov);
}

void enumerate_maps(std::vector<int>& f, int slot, const FiniteMetricSpace& X,
                    const FiniteMetricSpace& Y, double r, double& best) {
  if (slot == X.n) {
    best = std::min(best, oracle_map_eps(f, X, Y, r));
    return;
  }
  if (slot == X.basepoint) {
    f[slot] = Y.basepoint;
    enumerate_maps(f, slot + 1, X, Y, r, best);
    return;
  }
  for (int y = 0; y < Y.n; ++y) {
    f[slot] = y;
    enumerate_maps(f, slot + 1, X, Y, r, best);
  }
}

struct OracleEstimate {
  double eps_star = std::numeric_limits<double>::infinity();
  int level = 0;
};

OracleEstimate oracle_gh(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, double r) {
  OracleEstimate out;
  for (int j = 1; j <= 6; ++j) {
    const double eps_net = r / std::pow(2.0, j);
    NetResult nx, ny;
    try {
      nx = maximal_net(X, X.basepoint, r, eps_net);
      ny = maximal_net(Y, Y.basepoint, r, eps_net);
    } catch (const invalid_input&) {
      continue;
    }
    FiniteMetricSpace sx = sub_space(X, nx.points);
    FiniteMetricSpace sy = sub_space(Y, ny.points);
    std::vector<int> f(sx.n, 0);
    double level_eps = std::numeric_limits<double>::infinity();
    enumerate_maps(f, 0, sx, sy, r, level_eps);
    const double total = std::max(level_eps, std::max(nx.covering_radius, ny.covering_radius));
    if (total < out.eps_star) {
      out.eps_star = total;
      out.level = j;
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Nets

TEST_CASE("maximal net takes all points of a uniform space") {
  FiniteMetricSpace X = uniform_space(5, 1.0);
  NetResult net = maximal_net(X, 0, 2.0, 0.5);
  REQUIRE(net.cardinality == 5);
  REQUIRE(net.points == std::vector<int>{0, 1, 2, 3, 4});
  REQUIRE(net.packing_radius == 0.5 / 9.0);
  REQUIRE(net.covering_radius == 0.0);
  REQUIRE(net.covering_ok);
}

TEST_CASE("maximal net on a dyadic interval is the dyadic refinement") {
  std::vector<double> xs(129);
  for (int i = 0; i < 129; ++i) xs[i] = i / 128.0;
  FiniteMetricSpace X = line_space(xs);
  const double eps = 0.3;
  NetResult net = maximal_net(X, 0, 1.1, eps);
  // farthest-first from 0 halves the interval until 1/16 < 2 eps/9
  REQUIRE(net.points ==
          std::vector<int>{0, 128, 64, 32, 96, 16, 48, 80, 112});
  REQUIRE(net.covering_radius == 0.0625);
  REQUIRE(net.covering_ok);  // 1/16 <= eps/3

  const double sep = 2.0 * eps / 9.0;
  for (size_t a = 0; a < net.points.size(); ++a)
    for (size_t b = a + 1; b < net.points.size(); ++b)
      REQUIRE(X.dist(net.points[a], net.points[b]) > sep);  // packing
  for (int i = 0; i < X.n; ++i) {  // maximality: everything is within sep
    double nearest = std::numeric_limits<double>::infinity();
    for (int p : net.points) nearest = std::min(nearest, X.dist(i, p));
    REQUIRE(nearest <= sep);
  }
}

TEST_CASE("maximal net rejects bad parameters") {
  FiniteMetricSpace X = uniform_space(3, 1.0);
  REQUIRE_THROWS_AS(maximal_net(X, 0, 1.0, 1.5), invalid_input);
  REQUIRE_THROWS_AS(maximal_net(X, 5, 1.0, 0.5), invalid_input);
}

// ---------------------------------------------------------------------------
// Distortion and the pointed approximation conditions

TEST_CASE("distortion of identity and of a stretched pair") {
  FiniteMetricSpace X = line_space({0.0, 1.0});
  FiniteMetricSpace Y = line_space({0.0, 1.05});
  PointMap id{{0, 1}};
  REQUIRE(distortion(id, X, X) == 0.0);
  REQUIRE(distortion(id, X, Y) == Catch::Approx(0.05).margin(1e-15));
  PointMap bad{{0, 7}};
  REQUIRE_THROWS_AS(distortion(bad, X, Y), invalid_input);
}

TEST_CASE("pointed approximation check distinguishes eps above and below") {
  FiniteMetricSpace X = line_space({0.0, 1.0});
  FiniteMetricSpace Y = line_space({0.0, 1.05});
  PointMap id{{0, 1}};
  GhApproxCheck loose = check_pointed_gh_approx(id, X, Y, 2.0, 0.06);
  REQUIRE(loose.pass);
  REQUIRE(loose.basepoint_ok);
  REQUIRE(loose.distortion_value == Catch::Approx(0.05).margin(1e-15));
  REQUIRE(loose.coverage_defect == 0.0);

  GhApproxCheck tight = check_pointed_gh_approx(id, X, Y, 2.0, 0.04);
  REQUIRE_FALSE(tight.pass);

  PointMap swapped{{1, 0}};
  GhApproxCheck wrongbase = check_pointed_gh_approx(swapped, X, X, 2.0, 0.5);
  REQUIRE_FALSE(wrongbase.basepoint_ok);
  REQUIRE_FALSE(wrongbase.pass);
}

// ---------------------------------------------------------------------------
// Net-ladder upper estimate

TEST_CASE("gh estimate of a space against itself is zero") {
  FiniteMetricSpace flat = flat_disc_fms(1.0);
  GhEstimate e = gh_upper_estimate(flat, flat, 1.0);
  REQUIRE(e.eps_star == 0.0);
  REQUIRE_FALSE(e.exhaustive);  // saturated nets exceed the odometer budget
}

TEST_CASE("gh estimate on two-point spaces finds the stretch exactly") {
  FiniteMetricSpace X = line_space({0.0, 1.0});
  FiniteMetricSpace Y = line_space({0.0, 1.05});
  GhEstimate e = gh_upper_estimate(X, Y, 2.0);
  REQUIRE(e.exhaustive);
  REQUIRE(e.net_x == 2);
  REQUIRE(e.net_y == 2);
  REQUIRE(e.eps_star == Catch::Approx(0.05).margin(1e-15));
}

TEST_CASE("exhaustive estimate equals the brute-force oracle on small spaces") {
  using Case = std::tuple<FiniteMetricSpace, FiniteMetricSpace, double>;
  std::vector<Case> cases;
  cases.emplace_back(line_space({0.0, 1.0}), line_space({0.0, 1.05}), 2.0);
  cases.emplace_back(uniform_space(5, 1.0), uniform_space(5, 1.2), 2.0);
  cases.emplace_back(line_space({0.0, 0.2, 0.4, 0.6, 0.8, 1.0}),
                     line_space({0.0, 0.25, 0.5, 0.75, 1.0}), 1.1);
  cases.emplace_back(planar_space({{0, 0}, {0.6, 0}, {0, 0.8}}),
                     planar_space({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 2.5);
  cases.emplace_back(line_space({0.0, 0.25, 0.5, 0.75, 1.0}), uniform_space(5, 1.0), 1.5);
  cases.emplace_back(planar_space({{0, 0}, {1, 0}, {1, 1}, {0, 1}}),
                     planar_space({{0, 0}, {0.6, 0}, {0, 0.8}}), 2.0);

  for (const auto& [X, Y, r] : cases) {
    GhEstimate lib = gh_upper_estimate(X, Y, r);
    OracleEstimate want = oracle_gh(X, Y, r);
    REQUIRE(lib.exhaustive);
    REQUIRE(lib.eps_star == want.eps_star);  // bitwise: same candidate set, same scoring
    REQUIRE(lib.level == want.level);
  }
}

// ---------------------------------------------------------------------------
// Packing bound and rescaling

TEST_CASE("packing cardinality bound is the area quotient") {
  REQUIRE(packing_cardinality_bound(1.0, 0.3, 900.0, 1.0) == 900);
  REQUIRE(packing_cardinality_bound(5.0, 0.01, 900.0, 1.0) == 900);  // radii only gate positivity
  REQUIRE(packing_cardinality_bound(1.0, 0.3, 1.0, 1.0 / 1024.0) == 1024);
  REQUIRE(packing_cardinality_bound(1.0, 0.3, 1.0, 2.0) == 1);  // never below one
  REQUIRE_THROWS_AS(packing_cardinality_bound(0.0, 0.3, 1.0, 1.0), invalid_input);
  REQUIRE_THROWS_AS(packing_cardinality_bound(1.0, 0.3, -1.0, 1.0), invalid_input);
}

TEST_CASE("tangent rescale scales distances and re-points the basepoint") {
  FiniteMetricSpace X = line_space({0.0, 0.25, 1.0});
  FiniteMetricSpace same = tangent_rescale(X, 2, 1.0);
  REQUIRE(same.basepoint == 2);
  REQUIRE(same.d == X.d);

  FiniteMetricSpace twice = tangent_rescale(tangent_rescale(X, 0, 2.0), 0, 0.5);
  REQUIRE(twice.d == X.d);  // dyadic round trip is exact

  REQUIRE_THROWS_AS(tangent_rescale(X, 0, 0.0), invalid_input);
  REQUIRE_THROWS_AS(tangent_rescale(X, 9, 2.0), invalid_input);
}

TEST_CASE("cone vertex samples are exactly scale covariant") {
  FiniteMetricSpace big = cone_vertex_fms(0.7, 1.0);
  FiniteMetricSpace quarter = cone_vertex_fms(0.7, 0.25);
  FiniteMetricSpace blown = tangent_rescale(quarter, 0, 4.0);
  REQUIRE(blown.d == big.d);  // power-of-two layout radii make this bitwise
}

// ---------------------------------------------------------------------------
// Tangent-cone classification

TEST_CASE("flat balls read as regular at every rescaling") {
  SingularReport rep = detect_singular([](double rad) { return flat_disc_fms(rad); },
                                       flat_disc_fms(1.0), {1.0, 2.0, 4.0, 8.0}, 1.0);
  REQUIRE(rep.verdict == Verdict::regular);
  for (double e : rep.eps_by_lambda) REQUIRE(e == 0.0);
  REQUIRE(rep.threshold == Catch::Approx(0.05).margin(1e-15));
}

TEST_CASE("cone vertex reads as singular, off-vertex as regular") {
  SingularReport vertex =
      detect_singular([](double rad) { return cone_vertex_fms(0.7, rad); }, flat_disc_fms(1.0),
                      {1.0, 2.0, 4.0, 8.0}, 1.0);
  REQUIRE(vertex.verdict == Verdict::singular);
  REQUIRE(vertex.eps_by_lambda.front() > 0.2);
  REQUIRE(vertex.eps_by_lambda.front() < 0.45);
  for (double e : vertex.eps_by_lambda)
    REQUIRE(e == vertex.eps_by_lambda.front());  // rescalings are exact here

  SingularReport milder =
      detect_singular([](double rad) { return cone_vertex_fms(0.9, rad); }, flat_disc_fms(1.0),
                      {1.0, 2.0, 4.0}, 1.0);
  REQUIRE(milder.verdict == Verdict::singular);

  SingularReport off =
      detect_singular([](double rad) { return cone_offset_fms(0.7, 2.0, rad); },
                      flat_disc_fms(0.5), {1.0, 2.0, 4.0, 8.0}, 0.5);
  REQUIRE(off.verdict == Verdict::regular);
  for (double e : off.eps_by_lambda) REQUIRE(e < 1e-9);  // developed chart is isometric
}

TEST_CASE("detect_singular validates the lambda ladder") {
  auto sampler = [](double rad) { return flat_disc_fms(rad); };
  REQUIRE_THROWS_AS(detect_singular(sampler, flat_disc_fms(1.0), {}, 1.0), invalid_input);
  REQUIRE_THROWS_AS(detect_singular(sampler, flat_disc_fms(1.0), {2.0, 1.0}, 1.0), invalid_input);
}

TEST_CASE("offset cone samples refuse balls containing the vertex") {
  REQUIRE_THROWS_AS(cone_offset_fms(0.7, 1.0, 1.5), invalid_input);
}
