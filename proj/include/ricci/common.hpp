#pragma once

// Shared error taxonomy and small numeric helpers.

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace ricci {

// Bad arguments, malformed data, violated preconditions.
struct invalid_input : std::runtime_error {
  explicit invalid_input(const std::string& what) : std::runtime_error(what) {}
};

// Two nodes not connected in the discrete metric graph.
struct no_path : std::runtime_error {
  explicit no_path(const std::string& what) : std::runtime_error(what) {}
};

// Explicit step rejected because dt exceeds the stability limit.
struct refuse_step : std::runtime_error {
  explicit refuse_step(const std::string& what) : std::runtime_error(what) {}
};

// Newton (or inner linear solver) divergence; carries the last residual.
struct solver_failure : std::runtime_error {
  double residual;
  solver_failure(const std::string& what, double res)
      : std::runtime_error(what + " (residual " + std::to_string(res) + ")"), residual(res) {}
};

// Extension step would drop the working radius below the floor.
struct radius_exhausted : std::runtime_error {
  explicit radius_exhausted(const std::string& what) : std::runtime_error(what) {}
};

inline double sq(double x) { return x * x; }

// Shortest-distance print format that round-trips doubles exactly.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline bool finite(double x) { return std::isfinite(x); }

// max/min ignoring NaN entries (used for curvature fields with masked nodes).
inline double nanmax(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (double x : v)
    if (std::isfinite(x)) { m = std::max(m, x); any = true; }
  if (!any) throw invalid_input("nanmax: no finite entries");
  return m;
}

inline double nanmin(const std::vector<double>& v) {
  double m = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double x : v)
    if (std::isfinite(x)) { m = std::min(m, x); any = true; }
  if (!any) throw invalid_input("nanmin: no finite entries");
  return m;
}

inline double nanmax_abs(const std::vector<double>& v) {
  double m = 0.0;
  bool any = false;
  for (double x : v)
    if (std::isfinite(x)) { m = std::max(m, std::fabs(x)); any = true; }
  if (!any) throw invalid_input("nanmax_abs: no finite entries");
  return m;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace ricci
