#pragma once

// Artifact serialization: CSV and JSON emitters for trajectories, snapshots,
// metric spaces, schedules, and estimate reports, plus the atomic file
// writer used by the scenario runner.
//
// Determinism contract: every number is printed with %.17g (round-trip
// exact), JSON objects keep insertion order, and nothing depends on locale
// or pointer order — identical inputs give byte-identical files.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ricci/estimates.hpp"
#include "ricci/finite_metric_space.hpp"
#include "ricci/flow.hpp"
#include "ricci/gh.hpp"
#include "ricci/scheduler.hpp"

namespace ricci {

using ordered_json = nlohmann::ordered_json;

// Write through a sibling temp file and rename into place, so readers never
// observe a torn artifact and a crash leaves the old version intact.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& body) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw invalid_input("atomic_write_text: cannot open " + tmp.string());
    out << body;
    out.flush();
    if (!out) throw invalid_input("atomic_write_text: write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// CSV bodies

inline std::string trajectory_csv(const FlowTrajectory& traj) {
  std::string s = "t,total_area,min_K,max_K,min_u,max_u\n";
  for (const FlowSample& p : traj.samples) {
    s += fmt17(p.t);
    s += ',';
    s += fmt17(p.area);
    s += ',';
    s += fmt17(p.min_K);
    s += ',';
    s += fmt17(p.max_K);
    s += ',';
    s += fmt17(p.min_u);
    s += ',';
    s += fmt17(p.max_u);
    s += '\n';
  }
  return s;
}

// Grid snapshots list every active node; nodes outside the chart are skipped
// because their factor values are meaningless.
inline std::string snapshot_csv(const Surface& geom) {
  std::string s;
  if (std::holds_alternative<ConformalGrid>(geom)) {
    const ConformalGrid& g = std::get<ConformalGrid>(geom);
    s = "i,j,x,y,u,state\n";
    for (int j = 0; j < g.height; ++j)
      for (int i = 0; i < g.width; ++i) {
        const NodeState st = g.state(i, j);
        if (st == NodeState::outside) continue;
        s += std::to_string(i);
        s += ',';
        s += std::to_string(j);
        s += ',';
        s += fmt17(g.x_of(i));
        s += ',';
        s += fmt17(g.y_of(j));
        s += ',';
        s += fmt17(g.u[g.idx(i, j)]);
        s += ',';
        s += (st == NodeState::interior ? "interior" : "boundary");
        s += '\n';
      }
  } else {
    const RadialProfile& p = std::get<RadialProfile>(geom);
    s = "i,r,u\n";
    for (int i = 0; i < p.n(); ++i) {
      s += std::to_string(i);
      s += ',';
      s += fmt17(p.r[i]);
      s += ',';
      s += fmt17(p.u[i]);
      s += '\n';
    }
  }
  return s;
}

// Pointed metric space: metadata header line, then the row-major matrix.
inline std::string fms_csv(const FiniteMetricSpace& f) {
  std::string s = "n,basepoint\n";
  s += std::to_string(f.n);
  s += ',';
  s += std::to_string(f.basepoint);
  s += '\n';
  for (int i = 0; i < f.n; ++i) {
    for (int j = 0; j < f.n; ++j) {
      if (j) s += ',';
      s += fmt17(f.dist(i, j));
    }
    s += '\n';
  }
  return s;
}

inline std::string schedule_csv(const ExtensionSchedule& sched) {
  std::string s = "k,ell_k,r_k\n";
  for (size_t k = 0; k < sched.steps.size(); ++k) {
    s += std::to_string(k + 1);
    s += ',';
    s += fmt17(sched.steps[k].ell);
    s += ',';
    s += fmt17(sched.steps[k].r);
    s += '\n';
  }
  return s;
}

// Pyramid table: one row per ball radius k with its time ceiling and the
// starting radius the schedule launched from.
inline std::string pyramid_csv(const PyramidDomain& dom,
                               const std::vector<PyramidLevelInput>& levels) {
  std::string s = "k,T_k,r_k\n";
  for (size_t q = 0; q < dom.T.size(); ++q) {
    const double r1 = (double)(q + 1) + 1.0 + radius_budget(levels[q].pack);
    s += std::to_string(q + 1);
    s += ',';
    s += fmt17(dom.T[q]);
    s += ',';
    s += fmt17(r1);
    s += '\n';
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON fragments

inline ordered_json report_json(const EstimateReport& rep) {
  ordered_json j;
  j["check"] = rep.check;
  j["pass"] = rep.pass;
  j["margin"] = rep.margin;
  j["tolerance"] = rep.tolerance;
  ordered_json fit = ordered_json::object();
  for (const auto& [k, v] : rep.fitted) fit[k] = v;
  j["fitted"] = fit;
  if (!rep.witness.empty()) j["witness"] = rep.witness;
  if (!rep.series.empty()) {
    ordered_json rows = ordered_json::array();
    for (const auto& [a, b] : rep.series) rows.push_back({a, b});
    j["series"] = rows;
  }
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

inline ordered_json net_json(const NetResult& net) {
  ordered_json j;
  j["cardinality"] = net.cardinality;
  j["packing_radius"] = net.packing_radius;
  j["covering_radius"] = net.covering_radius;
  j["required_covering"] = net.required_covering;
  j["covering_ok"] = net.covering_ok;
  j["points"] = net.points;
  return j;
}

inline ordered_json gh_json(const GhEstimate& e) {
  ordered_json j;
  j["eps_star"] = e.eps_star;
  j["exhaustive"] = e.exhaustive;
  j["level"] = e.level;
  j["granularity"] = e.granularity;
  j["net_x"] = e.net_x;
  j["net_y"] = e.net_y;
  return j;
}

inline ordered_json singular_json(const SingularReport& rep) {
  ordered_json j;
  j["verdict"] = verdict_name(rep.verdict);
  j["threshold"] = rep.threshold;
  j["lambdas"] = rep.lambdas;
  j["eps_by_lambda"] = rep.eps_by_lambda;
  return j;
}

inline ordered_json pack_json(const ConstantPack& p) {
  ordered_json j;
  j["v0"] = p.v0;
  j["alpha0"] = p.alpha0;
  j["C0"] = p.C0;
  j["That"] = p.That;
  j["Shat"] = p.Shat;
  j["gamma"] = p.gamma;
  ordered_json d;
  d["c0"] = p.c0();
  d["delta0"] = p.delta0();
  d["tau"] = p.tau();
  d["gate"] = p.gate();
  d["growth"] = p.growth();
  j["derived"] = d;
  return j;
}

// ---------------------------------------------------------------------------
// MANIFEST: per-artifact column documentation, one block per file.

struct ManifestEntry {
  std::string file;
  std::string description;
};

inline std::string manifest_text(const std::vector<ManifestEntry>& entries) {
  std::string s;
  for (const ManifestEntry& e : entries) {
    s += e.file;
    s += '\n';
    std::string rest = e.description;
    size_t pos = 0;
    while (pos < rest.size()) {
      size_t nl = rest.find('\n', pos);
      if (nl == std::string::npos) nl = rest.size();
      s += "  ";
      s.append(rest, pos, nl - pos);
      s += '\n';
      pos = nl + 1;
    }
    s += '\n';
  }
  return s;
}

}  // namespace ricci
