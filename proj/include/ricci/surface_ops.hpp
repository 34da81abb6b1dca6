#pragma once

// Uniform operations over Surface = variant<ConformalGrid, RadialProfile>.

#include "ricci/conformal_grid.hpp"
#include "ricci/curvature.hpp"
#include "ricci/geodesic.hpp"
#include "ricci/models.hpp"
#include "ricci/radial_profile.hpp"

namespace ricci {

inline double surface_area(const Surface& s) {
  return std::visit([](const auto& g) {
    using T = std::decay_t<decltype(g)>;
    if constexpr (std::is_same_v<T, ConformalGrid>) return area(g);
    else return total_area(g);
  }, s);
}

inline std::vector<double> surface_curvature(const Surface& s) {
  return std::visit([](const auto& g) { return gauss_curvature(g); }, s);
}

inline double surface_distance(const Surface& s, int a, int b) {
  return std::visit([&](const auto& g) {
    using T = std::decay_t<decltype(g)>;
    if constexpr (std::is_same_v<T, ConformalGrid>) return grid_distance(g, a, b);
    else return g.ray_distance(a, b);
  }, s);
}

inline double surface_min_u(const Surface& s) {
  return std::visit([](const auto& g) { return min_u(g); }, s);
}

inline double surface_max_u(const Surface& s) {
  return std::visit([](const auto& g) { return max_u(g); }, s);
}

// Discretization scale in metric units (tolerance formulas key off this).
inline double surface_metric_spacing(const Surface& s) {
  return std::visit([](const auto& g) {
    using T = std::decay_t<decltype(g)>;
    if constexpr (std::is_same_v<T, ConformalGrid>) {
      double m = 0.0;
      for (int k = 0; k < g.n_nodes(); ++k)
        if (g.mask[k] != NodeState::outside) m = std::max(m, std::exp(g.u[k]) * g.h);
      return m;
    } else {
      return max_metric_spacing(g);
    }
  }, s);
}

inline const std::vector<double>& surface_u(const Surface& s) {
  return std::visit([](const auto& g) -> const std::vector<double>& { return g.u; }, s);
}

inline int surface_nodes(const Surface& s) {
  return std::visit([](const auto& g) {
    using T = std::decay_t<decltype(g)>;
    if constexpr (std::is_same_v<T, ConformalGrid>) return g.n_nodes();
    else return g.n();
  }, s);
}

}  // namespace ricci
