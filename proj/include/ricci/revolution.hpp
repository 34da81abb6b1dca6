#pragma once

// Geodesic distances on a surface of revolution given by its generator
// profile: rho = arclength along the meridian, f(rho) = circumference radius.
// A polar graph (rings x columns, theta periodic) with axis/diagonal/knight
// moves supplies Dijkstra distances; an apex node handles rho[0] == 0.
// This is the production engine behind smoothed-cone sampling and doubles as
// an independent cross-check for the closed-form cone distance.

#include <algorithm>
#include <queue>
#include <vector>

#include "ricci/common.hpp"

namespace ricci {

struct RevolutionSurface {
  std::vector<double> rho;  // strictly increasing arclength nodes
  std::vector<double> f;    // circumference radius at each node; f > 0 off-axis

  void validate() const {
    if (rho.size() < 2 || rho.size() != f.size())
      throw invalid_input("RevolutionSurface: bad profile");
    for (size_t i = 0; i < rho.size(); ++i) {
      if (i > 0 && !(rho[i] > rho[i - 1]))
        throw invalid_input("RevolutionSurface: rho must increase");
      if (f[i] < 0.0 || (f[i] == 0.0 && rho[i] != 0.0))
        throw invalid_input("RevolutionSurface: f must be positive off-axis");
    }
  }
};

class RevolutionGraph {
 public:
  RevolutionGraph(RevolutionSurface surf, int n_theta)
      : surf_(std::move(surf)), n_theta_(n_theta) {
    surf_.validate();
    if (n_theta_ < 8) throw invalid_input("RevolutionGraph: need at least 8 columns");
    has_apex_ = (surf_.rho[0] == 0.0);
    first_ring_ = has_apex_ ? 1 : 0;
    n_rings_ = (int)surf_.rho.size();
  }

  int n_theta() const { return n_theta_; }
  bool has_apex() const { return has_apex_; }
  int first_ring() const { return first_ring_; }
  int n_rings() const { return n_rings_; }
  int node_count() const {
    return (has_apex_ ? 1 : 0) + (n_rings_ - first_ring_) * n_theta_;
  }
  int apex() const {
    if (!has_apex_) throw invalid_input("RevolutionGraph: no apex node");
    return 0;
  }
  int node(int ring, int col) const {
    if (ring < first_ring_ || ring >= n_rings_)
      throw invalid_input("RevolutionGraph: ring out of range");
    col = ((col % n_theta_) + n_theta_) % n_theta_;
    return (has_apex_ ? 1 : 0) + (ring - first_ring_) * n_theta_ + col;
  }

  std::vector<double> distances(int source) const {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(node_count(), inf);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    dist[source] = 0.0;
    pq.push({0.0, source});
    const double dtheta = 2.0 * kPi / n_theta_;
    auto relax = [&](int from, int to, double w) {
      if (dist[from] + w < dist[to]) {
        dist[to] = dist[from] + w;
        pq.push({dist[to], to});
      }
    };
    // Edge between (ra, col) and (rb, col + dc): develop the band between the
    // two rings into a flat annulus sector (exact for conical and cylindrical
    // bands) and take the chord. rho is meridian arclength, so the local cone
    // slope is df/drho with |slope| <= 1.
    auto seg = [&](int ra, int rb, int dc) -> double {
      const double fa = surf_.f[ra], fb = surf_.f[rb];
      const double drho = surf_.rho[rb] - surf_.rho[ra];
      const double ang = std::fabs((double)dc) * dtheta;
      const double m = (ra == rb) ? 0.0 : std::fabs(fb - fa) / std::fabs(drho);
      if (m < 1e-9) {
        if (ra == rb) return fa * ang;  // parallel arc; geodesic on a cylinder band
        return std::sqrt(sq(drho) + sq(0.5 * (fa + fb) * ang));
      }
      const double Ra = fa / m, Rb = fb / m;
      const double psi = std::min(m * ang, kPi);
      return std::sqrt(sq(Ra - Rb) + 4.0 * Ra * Rb * sq(std::sin(0.5 * psi)));
    };
    // Ladder depths per ring, adapted to the local cell aspect ratio so that
    // oblique directions are covered even when angular steps dwarf radial ones
    // (or vice versa near the apex).
    std::vector<int> kr(n_rings_, 2), kc(n_rings_, 2);
    for (int i = first_ring_; i < n_rings_; ++i) {
      const double dloc = (i + 1 < n_rings_) ? surf_.rho[i + 1] - surf_.rho[i]
                                             : surf_.rho[i] - surf_.rho[i - 1];
      const double astep = surf_.f[i] * dtheta;
      if (astep > 0.0 && dloc > 0.0) {
        kr[i] = std::clamp((int)std::ceil(4.0 * astep / dloc), 2, 48);
        kc[i] = std::clamp((int)std::ceil(4.0 * dloc / astep), 2, 48);
      }
    }
    while (!pq.empty()) {
      auto [dcur, k] = pq.top();
      pq.pop();
      if (dcur > dist[k]) continue;
      if (has_apex_ && k == 0) {
        for (int c = 0; c < n_theta_; ++c) relax(k, node(first_ring_, c), surf_.rho[first_ring_]);
        continue;
      }
      int flat = k - (has_apex_ ? 1 : 0);
      int ring = first_ring_ + flat / n_theta_;
      int col = flat % n_theta_;
      for (int dc : {-1, 1}) relax(k, node(ring, col + dc), seg(ring, ring, dc));
      for (int sr : {-2, -1, 1, 2}) {
        int rb = ring + sr;
        if (rb < first_ring_ || rb >= n_rings_) continue;
        const int span = (std::abs(sr) == 1) ? 2 : 1;
        for (int dc = -span; dc <= span; ++dc) relax(k, node(rb, col + dc), seg(ring, rb, dc));
      }
      for (int sr : {-1, 1}) {  // radial ladders: (k rings, 1 col)
        for (int st = 3; st <= kr[ring]; ++st) {
          int rb = ring + sr * st;
          if (rb < first_ring_ || rb >= n_rings_) continue;
          for (int dc : {-1, 1}) relax(k, node(rb, col + dc), seg(ring, rb, dc));
        }
      }
      for (int sr : {-1, 1}) {  // angular ladders: (1 ring, k cols)
        int rb = ring + sr;
        if (rb < first_ring_ || rb >= n_rings_) continue;
        for (int st = 3; st <= kc[ring]; ++st)
          for (int dc : {-st, st}) relax(k, node(rb, col + dc), seg(ring, rb, dc));
      }
      if (has_apex_ && ring == first_ring_) relax(k, 0, surf_.rho[ring]);
    }
    return dist;
  }

  const RevolutionSurface& surface() const { return surf_; }

 private:
  RevolutionSurface surf_;
  int n_theta_ = 0, n_rings_ = 0, first_ring_ = 0;
  bool has_apex_ = false;
};

}  // namespace ricci
