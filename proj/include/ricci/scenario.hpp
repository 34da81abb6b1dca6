#pragma once

// Scenario layer: plain-text configs, the runner behind the CLI verbs, and
// the closed-form convergence study.
//
// Config format: one `key = value` per line, `#` starts a comment, blank
// lines ignored. Every key must belong to the named scenario's schema and
// every name in `checks` to its check set; violations are rejected before
// anything runs, with file:line positions. All tolerances live in the
// config with defaults chosen so the shipped configs pass.

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <climits>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ricci/estimates.hpp"
#include "ricci/flow.hpp"
#include "ricci/gh.hpp"
#include "ricci/io.hpp"
#include "ricci/models.hpp"
#include "ricci/revolution.hpp"
#include "ricci/sampling.hpp"
#include "ricci/scheduler.hpp"

namespace ricci {

// User-facing configuration mistake: maps to exit code 1.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigEntry {
  std::string key, value;
  int line = 0;
};

struct ScenarioConfig {
  std::string path;  // display name used in diagnostics
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(const std::string& key) const {
    for (const ConfigEntry& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace((unsigned char)s[a])) ++a;
  while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
  return s.substr(a, b - a);
}

inline bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum((unsigned char)c) || c == '_' || c == '-')) return false;
  return true;
}

inline std::vector<std::string> split_tokens(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (std::isspace((unsigned char)c) || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

inline ScenarioConfig parse_config_text(const std::string& text, const std::string& display) {
  ScenarioConfig cfg;
  cfg.path = display;
  int line_no = 0;
  size_t pos = 0;
  auto fail = [&](const std::string& msg) {
    throw config_error(display + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, (nl == std::string::npos ? text.size() : nl) - pos);
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (!line.empty()) {
      const size_t eq = line.find('=');
      if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
      ConfigEntry e;
      e.key = detail::trim(line.substr(0, eq));
      e.value = detail::trim(line.substr(eq + 1));
      e.line = line_no;
      if (!detail::valid_key(e.key)) fail("malformed key '" + e.key + "'");
      if (e.value.empty()) fail("key '" + e.key + "' has an empty value");
      if (cfg.find(e.key))
        fail("duplicate key '" + e.key + "' (first at line " +
             std::to_string(cfg.find(e.key)->line) + ")");
      cfg.entries.push_back(std::move(e));
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error(path + ": cannot open config file");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text, path);
}

// Typed access with schema validation. Construction checks that every entry
// belongs to the scenario's key set, so typos surface before any solve.
class ConfigReader {
 public:
  ConfigReader(const ScenarioConfig& cfg, const std::string& scenario,
               std::vector<std::string> legal)
      : cfg_(cfg) {
    legal.push_back("scenario");
    for (const ConfigEntry& e : cfg.entries)
      if (std::find(legal.begin(), legal.end(), e.key) == legal.end())
        throw config_error(cfg.path + ":" + std::to_string(e.line) + ": unknown parameter '" +
                           e.key + "' for scenario '" + scenario + "'");
  }

  bool has(const std::string& key) const { return cfg_.find(key) != nullptr; }

  double num(const std::string& key, double def) const {
    const ConfigEntry* e = cfg_.find(key);
    return e ? to_double(*e, e->value) : def;
  }

  int integer(const std::string& key, int def) const {
    const ConfigEntry* e = cfg_.find(key);
    if (!e) return def;
    const char* s = e->value.c_str();
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || errno == ERANGE || v < INT_MIN || v > INT_MAX)
      fail(*e, "value '" + e->value + "' is not an integer");
    return (int)v;
  }

  std::vector<double> num_list(const std::string& key, std::vector<double> def) const {
    const ConfigEntry* e = cfg_.find(key);
    if (!e) return def;
    std::vector<double> out;
    for (const std::string& tok : detail::split_tokens(e->value)) out.push_back(to_double(*e, tok));
    if (out.empty()) fail(*e, "empty list");
    return out;
  }

  std::vector<std::string> name_list(const std::string& key, std::vector<std::string> def) const {
    const ConfigEntry* e = cfg_.find(key);
    if (!e) return def;
    std::vector<std::string> out = detail::split_tokens(e->value);
    if (out.size() == 1 && out[0] == "none") out.clear();
    return out;
  }

  // "a:b" index pairs, e.g. for distance endpoints.
  std::vector<std::pair<int, int>> pair_list(const std::string& key,
                                             std::vector<std::pair<int, int>> def) const {
    const ConfigEntry* e = cfg_.find(key);
    if (!e) return def;
    std::vector<std::pair<int, int>> out;
    for (const std::string& tok : detail::split_tokens(e->value)) {
      const size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        fail(*e, "pair '" + tok + "' must look like a:b");
      out.push_back({(int)to_double(*e, tok.substr(0, colon)),
                     (int)to_double(*e, tok.substr(colon + 1))});
    }
    if (out.empty()) fail(*e, "empty pair list");
    return out;
  }

  [[noreturn]] void fail(const ConfigEntry& e, const std::string& msg) const {
    throw config_error(cfg_.path + ":" + std::to_string(e.line) + ": " + msg);
  }

  const ConfigEntry& entry(const std::string& key) const { return *cfg_.find(key); }

 private:
  double to_double(const ConfigEntry& e, const std::string& tok) const {
    const char* s = tok.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(v))
      fail(e, "value '" + tok + "' for key '" + e.key + "' is not a finite number");
    return v;
  }

  const ScenarioConfig& cfg_;
};

// ---------------------------------------------------------------------------
// Results

struct CheckOutcome {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string note;
};

struct ScenarioResult {
  int exit_code = 0;  // 0 all checks pass, 1 a check failed, 2 solver failure
  std::string scenario;
  std::vector<CheckOutcome> outcomes;
  std::vector<std::string> artifacts;  // file names relative to the out dir
  std::string summary;                 // also written as summary.txt
};

namespace detail {

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "flat",           "sphere",        "hyperbolic",      "flat-disc-complete",
      "punctured-plane", "thin-cylinder", "cone-sequence",   "extension-schedule",
      "pyramid",        "gh-report"};
  return names;
}

inline std::vector<std::string> scenario_keys(const std::string& name) {
  if (name == "flat")
    return {"n", "dt", "t_end", "record_stride", "snapshots", "checks",
            "eq_m1", "eq_m2", "area_law_tol", "base_n", "study_t_end"};
  if (name == "sphere")
    return {"n", "dt", "t_end", "record_stride", "snapshots", "checks",
            "area_law_tol", "base_n", "dt_factor", "study_t_end"};
  if (name == "hyperbolic")
    return {"n", "outer", "dt", "t_end", "record_stride", "snapshots", "checks",
            "eq_m1", "eq_m2", "sandwich_alpha", "sandwich_c0", "sandwich_beta",
            "pairs", "base_n", "dt_factor", "study_t_end"};
  if (name == "flat-disc-complete")
    return {"radius", "h", "dt", "t_end", "record_stride", "snapshots", "checks",
            "burn_in", "barrier_tol", "center_flat_tol"};
  if (name == "punctured-plane")
    return {"n", "inner", "outer", "dt", "t_end", "record_stride", "snapshots",
            "checks", "cusp_track_tol", "track_rows"};
  if (name == "thin-cylinder")
    return {"eps", "length", "n", "dt", "t_end", "record_stride", "checks",
            "area_step_fraction", "extinction_tol_rel", "curvature_growth_min"};
  if (name == "cone-sequence")
    return {"cone_angle", "deltas", "rho_max", "rings", "wedges", "radius"};
  if (name == "extension-schedule")
    return {"v0", "alpha0", "C0", "That", "Shat", "gamma", "ell1", "r1", "r_target"};
  if (name == "pyramid")
    return {"v0", "alpha0", "C0", "That", "Shat", "gamma", "ell_list"};
  if (name == "gh-report")
    return {"cone_angle", "offset", "ball_radius", "lambdas", "threshold"};
  return {};
}

// Named checks a scenario may list under `checks`; each maps to exactly one
// estimate operation on the recorded trajectory.
inline std::vector<std::string> scenario_checks(const std::string& name) {
  if (name == "flat") return {"area-law", "metric-equivalence", "curvature-decay"};
  if (name == "sphere") return {"area-law", "curvature-decay"};
  if (name == "hyperbolic")
    return {"metric-equivalence", "distance-sandwich", "holder-fit", "curvature-decay"};
  if (name == "flat-disc-complete") return {"curvature-decay"};
  if (name == "punctured-plane") return {"curvature-decay"};
  return {};
}

inline std::string scenario_name(const ScenarioConfig& cfg) {
  const ConfigEntry* e = cfg.find("scenario");
  if (!e) throw config_error(cfg.path + ":1: missing required key 'scenario'");
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), e->value) == names.end()) {
    std::string known;
    for (const std::string& n : names) {
      if (!known.empty()) known += ", ";
      known += n;
    }
    throw config_error(cfg.path + ":" + std::to_string(e->line) + ": unknown scenario '" +
                       e->value + "' (known: " + known + ")");
  }
  return e->value;
}

inline std::vector<std::string> validated_checks(const ScenarioConfig& cfg, const ConfigReader& r,
                                                 const std::string& scenario,
                                                 std::vector<std::string> defaults) {
  std::vector<std::string> req = r.name_list("checks", std::move(defaults));
  const std::vector<std::string> legal = scenario_checks(scenario);
  for (const std::string& name : req) {
    if (std::find(legal.begin(), legal.end(), name) != legal.end()) continue;
    const ConfigEntry* e = cfg.find("checks");
    const int line = e ? e->line : 1;
    throw config_error(cfg.path + ":" + std::to_string(line) + ": unknown check '" + name +
                       "' for scenario '" + scenario + "'");
  }
  return req;
}

inline CheckOutcome outcome_of(const EstimateReport& rep) {
  CheckOutcome o;
  o.name = rep.check;
  o.pass = rep.pass;
  o.margin = rep.margin;
  o.note = rep.note;
  return o;
}

inline ordered_json config_echo(const ScenarioConfig& cfg) {
  ordered_json arr = ordered_json::array();
  for (const ConfigEntry& e : cfg.entries) arr.push_back({e.key, e.value});
  return arr;
}

inline std::string render_summary(const std::string& scenario, const std::string& status_line,
                                  const std::vector<CheckOutcome>& outcomes, int exit_code) {
  std::string s = "scenario: " + scenario + "\n";
  if (!status_line.empty()) s += status_line + "\n";
  for (const CheckOutcome& o : outcomes) {
    std::string name = o.name;
    if (name.size() < 22) name.resize(22, ' ');
    s += "check " + name + (o.pass ? "  PASS" : "  FAIL") + "  margin " + fmt17(o.margin);
    if (!o.note.empty()) s += "  (" + o.note + ")";
    s += "\n";
  }
  const char* verdict = exit_code == 0 ? "PASS" : exit_code == 2 ? "SOLVER FAILURE" : "FAIL";
  s += "result: " + std::string(verdict) + " (exit " + std::to_string(exit_code) + ")\n";
  return s;
}

// Trajectory restricted to samples at t >= cutoff (snapshots kept): used to
// exclude the barrier burn-in layer from decay fits.
inline FlowTrajectory trim_samples(const FlowTrajectory& traj, double cutoff) {
  FlowTrajectory out = traj;
  out.samples.clear();
  for (const FlowSample& s : traj.samples)
    if (s.t >= cutoff - 1e-12) out.samples.push_back(s);
  if (out.samples.size() < 2) throw invalid_input("trim_samples: fewer than two samples survive");
  return out;
}

// Nearest interior node to the chart origin.
inline int center_node(const ConformalGrid& g) {
  int best = -1;
  double best_r = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.height; ++j)
    for (int i = 0; i < g.width; ++i) {
      if (g.state(i, j) != NodeState::interior) continue;
      const double r = std::hypot(g.x_of(i), g.y_of(j));
      if (r < best_r) {
        best_r = r;
        best = g.idx(i, j);
      }
    }
  if (best < 0) throw invalid_input("center_node: no interior nodes");
  return best;
}

struct FlowPlan {
  Surface initial = RadialProfile{};
  BoundaryMode boundary = BoundaryMode::none();
  SolverConfig solver;
  // Post-run evaluation: built-in assertions first, then the named checks.
  std::function<std::vector<EstimateReport>(const FlowTrajectory&)> evaluate;
};

inline const char* scheme_name(Scheme s) {
  return s == Scheme::explicit_euler ? "explicit-euler" : "implicit-euler";
}

// Shared execution path for every flow-backed scenario: run, write artifact
// set (trajectory, snapshots, reports, run manifest, summary, MANIFEST),
// map the termination to an exit code.
inline ScenarioResult execute_flow_scenario(const std::string& scenario,
                                            const ScenarioConfig& cfg, const FlowPlan& plan,
                                            const std::string& out_dir, long long seed) {
  namespace fs = std::filesystem;
  ScenarioResult res;
  res.scenario = scenario;

  FlowTrajectory traj = run_flow(plan.initial, plan.solver, plan.boundary);
  const bool solver_ok = traj.termination != Termination::solver_failed;

  std::vector<EstimateReport> reports;
  if (solver_ok) {
    reports = plan.evaluate(traj);
    for (const EstimateReport& rep : reports) res.outcomes.push_back(outcome_of(rep));
    bool all = true;
    for (const CheckOutcome& o : res.outcomes) all = all && o.pass;
    res.exit_code = all ? 0 : 1;
  } else {
    res.exit_code = 2;
  }

  const fs::path dir(out_dir);
  std::vector<ManifestEntry> manifest;
  auto emit = [&](const std::string& name, const std::string& body, const std::string& doc) {
    atomic_write_text(dir / name, body);
    res.artifacts.push_back(name);
    manifest.push_back({name, doc});
  };

  emit("trajectory.csv", trajectory_csv(traj),
       "flow samples, one row per recorded step\n"
       "columns: t, total_area, min_K, max_K, min_u, max_u\n"
       "K extrema over evolved nodes; u extrema over the factor field");

  ordered_json snaps = ordered_json::array();
  for (size_t k = 0; k < traj.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
    const bool grid = std::holds_alternative<ConformalGrid>(traj.snapshots[k].geom);
    emit(name, snapshot_csv(traj.snapshots[k].geom),
         std::string("factor field at t = ") + fmt17(traj.snapshots[k].t) + "\n" +
             (grid ? "columns: i, j, x, y, u, state (active lattice nodes only)"
                   : "columns: i, r, u (radial profile nodes)"));
    snaps.push_back({{"t", traj.snapshots[k].t}, {"file", name}});
  }

  ordered_json reps = ordered_json::array();
  for (const EstimateReport& rep : reports) reps.push_back(report_json(rep));
  emit("reports.json", reps.dump(2) + "\n",
       "estimate reports for every executed check (built-in and requested)");

  ordered_json run;
  run["scenario"] = scenario;
  run["seed"] = seed;
  run["solver"] = {{"scheme", scheme_name(plan.solver.scheme)},
                   {"dt", plan.solver.dt},
                   {"t_end", plan.solver.t_end},
                   {"newton_tol", plan.solver.newton_tol},
                   {"newton_max", plan.solver.newton_max},
                   {"record_stride", plan.solver.record_stride},
                   {"area_step_fraction", plan.solver.area_step_fraction}};
  run["nodes"] = (int)surface_u(plan.initial).size();
  run["termination"] = termination_name(traj.termination);
  if (!traj.note.empty()) run["termination_note"] = traj.note;
  run["t_final"] = traj.t_final;
  run["steps"] = traj.steps_taken;
  run["initial_area"] = traj.initial_area;
  run["samples"] = (int)traj.samples.size();
  run["snapshots"] = snaps;
  ordered_json checks = ordered_json::array();
  for (const CheckOutcome& o : res.outcomes)
    checks.push_back({{"name", o.name}, {"pass", o.pass}, {"margin", o.margin}});
  run["checks"] = checks;
  run["exit_code"] = res.exit_code;
  run["config"] = config_echo(cfg);
  emit("run.json", run.dump(2) + "\n", "run manifest: solver settings, termination, check table");

  std::string status = std::string("termination: ") + termination_name(traj.termination) +
                       " (t_final " + fmt17(traj.t_final) + ")";
  if (!traj.note.empty()) status += " -- " + traj.note;
  res.summary = render_summary(scenario, status, res.outcomes, res.exit_code);
  emit("summary.txt", res.summary, "human-readable check table and verdict");
  atomic_write_text(dir / "MANIFEST", manifest_text(manifest));
  res.artifacts.push_back("MANIFEST");
  return res;
}

// Writer shared by the arithmetic scenarios (no flow, no trajectory).
inline ScenarioResult finish_table_scenario(const std::string& scenario,
                                            const ScenarioConfig& cfg,
                                            const std::vector<EstimateReport>& reports,
                                            std::vector<std::pair<std::string, std::string>> files,
                                            std::vector<ManifestEntry> docs,
                                            const std::string& out_dir, long long seed) {
  namespace fs = std::filesystem;
  ScenarioResult res;
  res.scenario = scenario;
  for (const EstimateReport& rep : reports) res.outcomes.push_back(outcome_of(rep));
  bool all = true;
  for (const CheckOutcome& o : res.outcomes) all = all && o.pass;
  res.exit_code = all ? 0 : 1;

  const fs::path dir(out_dir);
  std::vector<ManifestEntry> manifest;
  for (size_t i = 0; i < files.size(); ++i) {
    atomic_write_text(dir / files[i].first, files[i].second);
    res.artifacts.push_back(files[i].first);
    manifest.push_back(docs[i]);
  }

  ordered_json reps = ordered_json::array();
  for (const EstimateReport& rep : reports) reps.push_back(report_json(rep));
  atomic_write_text(dir / "reports.json", reps.dump(2) + "\n");
  res.artifacts.push_back("reports.json");
  manifest.push_back({"reports.json", "estimate reports for every executed check"});

  ordered_json run;
  run["scenario"] = scenario;
  run["seed"] = seed;
  ordered_json checks = ordered_json::array();
  for (const CheckOutcome& o : res.outcomes)
    checks.push_back({{"name", o.name}, {"pass", o.pass}, {"margin", o.margin}});
  run["checks"] = checks;
  run["exit_code"] = res.exit_code;
  run["config"] = config_echo(cfg);
  atomic_write_text(dir / "run.json", run.dump(2) + "\n");
  res.artifacts.push_back("run.json");
  manifest.push_back({"run.json", "run manifest: check table and config echo"});

  res.summary = render_summary(scenario, "", res.outcomes, res.exit_code);
  atomic_write_text(dir / "summary.txt", res.summary);
  res.artifacts.push_back("summary.txt");
  manifest.push_back({"summary.txt", "human-readable check table and verdict"});
  atomic_write_text(dir / "MANIFEST", manifest_text(manifest));
  res.artifacts.push_back("MANIFEST");
  return res;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario builders

namespace detail {

inline ScenarioResult run_flat(const ScenarioConfig& cfg, const std::string& out, long long seed) {
  ConfigReader r(cfg, "flat", scenario_keys("flat"));
  const int n = r.integer("n", 257);
  FlowPlan plan;
  plan.initial = make_radial_profile(n, 0.0, 1.0, [](double) { return 0.0; });
  plan.boundary = BoundaryMode::frozen();
  plan.solver.dt = r.num("dt", 1e-3);
  plan.solver.t_end = r.num("t_end", 0.1);
  plan.solver.record_stride = r.integer("record_stride", 1);
  plan.solver.snapshot_times = r.num_list("snapshots", {0.5 * plan.solver.t_end});
  const double m1 = r.num("eq_m1", 0.0), m2 = r.num("eq_m2", 0.0);
  const double area_tol = r.num("area_law_tol", 0.02);
  const std::vector<std::string> req =
      validated_checks(cfg, r, "flat", {"area-law", "metric-equivalence", "curvature-decay"});
  plan.evaluate = [=](const FlowTrajectory& traj) {
    std::vector<EstimateReport> out_reps;
    for (const std::string& name : req) {
      if (name == "area-law") out_reps.push_back(check_area_law(traj, area_tol));
      if (name == "metric-equivalence")
        out_reps.push_back(check_metric_equivalence(traj, m1, m2));
      if (name == "curvature-decay") out_reps.push_back(fit_curvature_decay(traj));
    }
    return out_reps;
  };
  return execute_flow_scenario("flat", cfg, plan, out, seed);
}

inline ScenarioResult run_sphere(const ScenarioConfig& cfg, const std::string& out,
                                 long long seed) {
  ConfigReader r(cfg, "sphere", scenario_keys("sphere"));
  const int n = r.integer("n", 2049);
  FlowPlan plan;
  plan.initial = make_sphere_profile(n);
  plan.solver.dt = r.num("dt", 2e-3);
  plan.solver.t_end = r.num("t_end", 0.4);
  plan.solver.record_stride = r.integer("record_stride", 1);
  plan.solver.snapshot_times = r.num_list("snapshots", {});
  const double area_tol = r.num("area_law_tol", 0.02);
  const std::vector<std::string> req =
      validated_checks(cfg, r, "sphere", {"area-law", "curvature-decay"});
  plan.evaluate = [=](const FlowTrajectory& traj) {
    std::vector<EstimateReport> out_reps;
    for (const std::string& name : req) {
      if (name == "area-law") out_reps.push_back(check_area_law(traj, area_tol));
      if (name == "curvature-decay") out_reps.push_back(fit_curvature_decay(traj));
    }
    return out_reps;
  };
  return execute_flow_scenario("sphere", cfg, plan, out, seed);
}

inline ScenarioResult run_hyperbolic(const ScenarioConfig& cfg, const std::string& out,
                                     long long seed) {
  ConfigReader r(cfg, "hyperbolic", scenario_keys("hyperbolic"));
  const int n = r.integer("n", 1025);
  const double outer = r.num("outer", 0.95);
  if (!(outer > 0.0 && outer < 1.0)) {
    if (r.has("outer")) r.fail(r.entry("outer"), "outer must sit in (0,1)");
    throw config_error(cfg.path + ": outer must sit in (0,1)");
  }
  FlowPlan plan;
  plan.initial = make_radial_profile(n, 0.0, outer, [](double rr) { return u_poincare(rr, 0.0); });
  plan.boundary = BoundaryMode::dirichlet([](double t, double rr, double) {
    return u_poincare(rr, 0.0) + 0.5 * std::log1p(2.0 * t);
  });
  plan.solver.dt = r.num("dt", 1e-3);
  plan.solver.t_end = r.num("t_end", 0.2);
  plan.solver.record_stride = r.integer("record_stride", 1);
  plan.solver.snapshot_times = r.num_list("snapshots", {0.5 * plan.solver.t_end});
  const double m1 = r.num("eq_m1", 1.0), m2 = r.num("eq_m2", 1.0);
  const double alpha = r.num("sandwich_alpha", 1.0);
  const double c0 = r.num("sandwich_c0", 1.0 / 3.0);
  const double beta = r.num("sandwich_beta", 2.0);
  PairList pl;
  pl.pairs = r.pair_list(
      "pairs", {{0, n - 1}, {0, (n - 1) / 2}, {(n - 1) / 4, 3 * (n - 1) / 4}});
  for (auto [a, b] : pl.pairs)
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw config_error(cfg.path + ": pair index out of range for n = " + std::to_string(n));
  const std::vector<std::string> req = validated_checks(
      cfg, r, "hyperbolic",
      {"metric-equivalence", "distance-sandwich", "holder-fit", "curvature-decay"});
  plan.evaluate = [=](const FlowTrajectory& traj) {
    std::vector<EstimateReport> out_reps;
    for (const std::string& name : req) {
      if (name == "metric-equivalence")
        out_reps.push_back(check_metric_equivalence(traj, m1, m2));
      if (name == "distance-sandwich")
        out_reps.push_back(check_distance_sandwich(traj, pl, alpha, c0, beta));
      if (name == "holder-fit") out_reps.push_back(fit_holder(traj, pl));
      if (name == "curvature-decay") out_reps.push_back(fit_curvature_decay(traj));
    }
    return out_reps;
  };
  return execute_flow_scenario("hyperbolic", cfg, plan, out, seed);
}

inline ScenarioResult run_flat_disc_complete(const ScenarioConfig& cfg, const std::string& out,
                                             long long seed) {
  ConfigReader r(cfg, "flat-disc-complete", scenario_keys("flat-disc-complete"));
  const double radius = r.num("radius", 1.0);
  const double h = r.num("h", 0.02);
  FlowPlan plan;
  plan.initial = make_disc_grid(radius, h, u_flat);
  plan.boundary = BoundaryMode::barrier();
  plan.solver.dt = r.num("dt", 1e-3);
  plan.solver.t_end = r.num("t_end", 0.1);
  plan.solver.record_stride = r.integer("record_stride", 1);
  const double burn_in = r.num("burn_in", 0.1 * plan.solver.t_end);
  plan.solver.snapshot_times = r.num_list("snapshots", {burn_in});
  const double barrier_tol = r.num("barrier_tol", 0.1);
  const double center_tol = r.num("center_flat_tol", 0.05);
  const std::vector<std::string> req =
      validated_checks(cfg, r, "flat-disc-complete", {"curvature-decay"});
  const double t_end = plan.solver.t_end;
  plan.evaluate = [=](const FlowTrajectory& traj) {
    std::vector<EstimateReport> out_reps;

    // Rim-driven lower bound: 2t min K >= -(1 + tol) once the burn-in layer
    // (the rim's initial adjustment) has passed.
    EstimateReport barrier;
    barrier.check = "barrier-lower-bound";
    double worst = std::numeric_limits<double>::infinity();
    for (const FlowSample& s : traj.samples) {
      if (s.t < burn_in) continue;
      const double v = s.min_K * 2.0 * s.t;
      if (v < worst) {
        worst = v;
        barrier.witness = "t " + fmt17(s.t);
      }
    }
    barrier.margin = worst + (1.0 + barrier_tol);
    barrier.tolerance = 0.0;
    barrier.pass = barrier.margin >= 0.0;
    barrier.fitted["min_2t_minK"] = worst;
    out_reps.push_back(barrier);

    // The interior stays almost flat early: |K| at the center node for every
    // snapshot in the first tenth of the run.
    EstimateReport center;
    center.check = "center-flat";
    double worst_k = 0.0;
    for (const FlowSnapshot& sn : traj.snapshots) {
      if (sn.t > 0.1 * t_end + 1e-12) continue;
      const ConformalGrid& g = std::get<ConformalGrid>(sn.geom);
      const std::vector<double> K = gauss_curvature(g);
      const double v = std::abs(K[center_node(g)]);
      if (v > worst_k) {
        worst_k = v;
        center.witness = "t " + fmt17(sn.t);
      }
    }
    center.margin = center_tol - worst_k;
    center.tolerance = 0.0;
    center.pass = center.margin >= 0.0;
    center.fitted["max_center_absK"] = worst_k;
    out_reps.push_back(center);

    for (const std::string& name : req) {
      if (name == "curvature-decay") {
        EstimateReport rep = fit_curvature_decay(trim_samples(traj, burn_in));
        rep.note = "samples before burn-in t = " + fmt17(burn_in) + " excluded";
        out_reps.push_back(rep);
      }
    }
    return out_reps;
  };
  return execute_flow_scenario("flat-disc-complete", cfg, plan, out, seed);
}

inline ScenarioResult run_punctured_plane(const ScenarioConfig& cfg, const std::string& out,
                                          long long seed) {
  ConfigReader r(cfg, "punctured-plane", scenario_keys("punctured-plane"));
  const int n = r.integer("n", 513);
  const double inner = r.num("inner", 0.05);
  const double outer = r.num("outer", 0.5);
  FlowPlan plan;
  plan.initial = make_radial_profile(n, inner, outer, [](double) { return 0.0; });
  plan.boundary = BoundaryMode::barrier();
  plan.solver.dt = r.num("dt", 1e-5);
  plan.solver.t_end = r.num("t_end", 0.105);
  plan.solver.record_stride = r.integer("record_stride", 50);
  plan.solver.snapshot_times =
      r.num_list("snapshots", {0.01, 0.017783, 0.031623, 0.056234, 0.1});
  const double track_tol = r.num("cusp_track_tol", 0.2);
  const int track_rows = r.integer("track_rows", 8);
  if (track_rows < 1 || track_rows >= n - 1)
    throw config_error(cfg.path + ": track_rows must sit in [1, n-2]");
  const std::vector<std::string> req =
      validated_checks(cfg, r, "punctured-plane", {"curvature-decay"});
  plan.evaluate = [=](const FlowTrajectory& traj) {
    std::vector<EstimateReport> out_reps;

    // The expanding cusp pinned at the inner rim forces K -> -1/(2t) there;
    // track the relative mismatch on the first few evolved rows.
    EstimateReport track;
    track.check = "cusp-tracking";
    double worst = 0.0;
    for (const FlowSnapshot& sn : traj.snapshots) {
      if (!(sn.t > 0.0)) continue;
      const RadialProfile& q = std::get<RadialProfile>(sn.geom);
      const std::vector<double> K = gauss_curvature(q);
      const double target = -1.0 / (2.0 * sn.t);
      double band = 0.0;
      for (int i = 1; i <= track_rows; ++i) {
        const double miss = std::abs(K[i] / target - 1.0);
        band = std::max(band, miss);
        if (miss > worst) {
          worst = miss;
          track.witness = "row " + std::to_string(i) + " at t " + fmt17(sn.t);
        }
      }
      track.series.push_back({sn.t, band});
    }
    if (track.series.empty()) throw invalid_input("punctured-plane: no positive-time snapshots");
    track.margin = track_tol - worst;
    track.tolerance = 0.0;
    track.pass = track.margin >= 0.0;
    track.fitted["max_rel_miss"] = worst;
    track.note = "series rows: (t, max relative mismatch vs -1/(2t) on rows 1.." +
                 std::to_string(track_rows) + ")";
    out_reps.push_back(track);

    for (const std::string& name : req)
      if (name == "curvature-decay") out_reps.push_back(fit_curvature_decay(traj));
    return out_reps;
  };
  return execute_flow_scenario("punctured-plane", cfg, plan, out, seed);
}

inline ScenarioResult run_thin_cylinder(const ScenarioConfig& cfg, const std::string& out,
                                        long long seed) {
  ConfigReader r(cfg, "thin-cylinder", scenario_keys("thin-cylinder"));
  const double eps = r.num("eps", 0.01);
  const double length = r.num("length", 2.0);
  const int n = r.integer("n", 1025);
  if (!(eps > 0.0)) throw config_error(cfg.path + ": eps must be positive");
  FlowPlan plan;
  const double circ = thin_cylinder_circumference(length, 8.0 * kPi * eps);
  plan.initial = make_thin_cylinder_profile(length, circ, n);
  plan.solver.dt = r.num("dt", 1e-5);
  plan.solver.t_end = r.num("t_end", 0.02);
  plan.solver.area_step_fraction = r.num("area_step_fraction", 0.005);
  plan.solver.record_stride = r.integer("record_stride", 16);
  const double ext_tol = r.num("extinction_tol_rel", 0.05);
  const double growth_min = r.num("curvature_growth_min", 100.0);
  validated_checks(cfg, r, "thin-cylinder", {});
  plan.evaluate = [=](const FlowTrajectory& traj) {
    std::vector<EstimateReport> out_reps;

    EstimateReport ext;
    ext.check = "extinction-time";
    const double rel = std::abs(traj.t_final - eps) / eps;
    ext.margin = ext_tol - rel;
    ext.tolerance = 0.0;
    ext.pass = traj.termination == Termination::extinction && ext.margin >= 0.0;
    ext.fitted["t_extinct"] = traj.t_final;
    ext.fitted["expected"] = eps;
    ext.fitted["rel_miss"] = rel;
    ext.witness = std::string("termination ") + termination_name(traj.termination);
    if (traj.termination != Termination::extinction)
      ext.note = "flow did not reach the extinction detector";
    out_reps.push_back(ext);

    EstimateReport blow;
    blow.check = "curvature-blowup";
    const double k0 = traj.samples.front().min_K;
    const double k1 = traj.samples.back().min_K;
    blow.fitted["initial_min_K"] = k0;
    blow.fitted["final_min_K"] = k1;
    if (k0 > 0.0) {
      blow.fitted["ratio"] = k1 / k0;
      blow.margin = k1 / (growth_min * k0) - 1.0;
      blow.pass = blow.margin >= 0.0;
    } else {
      blow.margin = -1.0;
      blow.pass = false;
      blow.note = "initial min K not positive; growth ratio undefined";
    }
    blow.tolerance = 0.0;
    out_reps.push_back(blow);
    return out_reps;
  };
  return execute_flow_scenario("thin-cylinder", cfg, plan, out, seed);
}

inline ScenarioResult run_cone_sequence(const ScenarioConfig& cfg, const std::string& out,
                                        long long seed) {
  ConfigReader r(cfg, "cone-sequence", scenario_keys("cone-sequence"));
  const double angle = r.num("cone_angle", 0.5);
  const std::vector<double> deltas = r.num_list("deltas", {0.2, 0.1, 0.05});
  const double rho_max = r.num("rho_max", 3.0);
  const int rings = r.integer("rings", 241);
  const int wedges = r.integer("wedges", 96);
  const double radius = r.num("radius", 1.0);
  if (deltas.size() < 2) throw config_error(cfg.path + ": deltas needs at least two entries");
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw config_error(cfg.path + ": deltas must be positive");
    if (i && !(deltas[i] < deltas[i - 1]))
      throw config_error(cfg.path + ": deltas must be strictly decreasing");
  }

  RevolutionGraph exact(cone_revolution(angle, rho_max, rings), wedges);
  const FiniteMetricSpace fx = revolution_apex_fms(exact, radius);

  std::vector<GhEstimate> ladder;
  std::vector<FiniteMetricSpace> smoothed;
  for (double d : deltas) {
    RevolutionGraph sm(smoothed_cone_revolution(angle, d, rho_max, rings), wedges);
    smoothed.push_back(revolution_apex_fms(sm, radius));
    ladder.push_back(gh_upper_estimate(fx, smoothed.back(), radius));
  }

  EstimateReport rep;
  rep.check = "gh-ladder";
  double min_drop = std::numeric_limits<double>::infinity(), C = 0.0;
  for (size_t i = 0; i < ladder.size(); ++i) {
    rep.series.push_back({deltas[i], ladder[i].eps_star});
    C = std::max(C, ladder[i].eps_star / deltas[i]);
    if (i) {
      const double drop = ladder[i - 1].eps_star - ladder[i].eps_star;
      if (drop < min_drop) {
        min_drop = drop;
        rep.witness = "delta " + fmt17(deltas[i - 1]) + " -> " + fmt17(deltas[i]);
      }
    }
  }
  rep.margin = min_drop;
  rep.tolerance = 0.0;
  rep.pass = min_drop > 0.0;
  rep.fitted["C"] = C;  // single recorded constant: eps*(delta) <= C delta over the sweep
  rep.note = "series rows: (delta, eps_star)";

  std::vector<std::pair<std::string, std::string>> files;
  std::vector<ManifestEntry> docs;
  std::string ladder_csv = "delta,eps_star,eps_over_delta\n";
  for (size_t i = 0; i < ladder.size(); ++i)
    ladder_csv += fmt17(deltas[i]) + "," + fmt17(ladder[i].eps_star) + "," +
                  fmt17(ladder[i].eps_star / deltas[i]) + "\n";
  files.push_back({"ladder.csv", ladder_csv});
  docs.push_back({"ladder.csv",
                  "smoothing sweep\ncolumns: delta (smoothing scale), eps_star (certified "
                  "closeness bound), eps_over_delta"});
  files.push_back({"fms_exact.csv", fms_csv(fx)});
  docs.push_back({"fms_exact.csv",
                  "apex ball of the exact cone\nheader row n,basepoint; then the row-major n x n "
                  "distance matrix"});
  for (size_t i = 0; i < smoothed.size(); ++i) {
    char name[40];
    std::snprintf(name, sizeof name, "fms_smoothed_%02zu.csv", i);
    files.push_back({name, fms_csv(smoothed[i])});
    docs.push_back({name, "apex ball of the smoothed cone, delta = " + fmt17(deltas[i]) +
                              "\nsame layout as fms_exact.csv"});
  }
  ordered_json gh = ordered_json::array();
  for (size_t i = 0; i < ladder.size(); ++i) {
    ordered_json j = gh_json(ladder[i]);
    j["delta"] = deltas[i];
    gh.push_back(j);
  }
  files.push_back({"gh.json", gh.dump(2) + "\n"});
  docs.push_back({"gh.json", "per-delta closeness estimates: nets, levels, eps_star"});

  return finish_table_scenario("cone-sequence", cfg, {rep}, std::move(files), std::move(docs),
                               out, seed);
}

inline ConstantPack pack_from(const ConfigReader& r, const ScenarioConfig& cfg) {
  try {
    return wire_constants(r.num("v0", 1.0), r.num("alpha0", 1.0), r.num("C0", 0.25),
                          r.num("That", 1.0), r.num("Shat", 1.0), r.num("gamma", 1.0));
  } catch (const invalid_input& ex) {
    throw config_error(cfg.path + ": " + ex.what());
  }
}

inline ScenarioResult run_extension_schedule(const ScenarioConfig& cfg, const std::string& out,
                                             long long seed) {
  ConfigReader r(cfg, "extension-schedule", scenario_keys("extension-schedule"));
  const ConstantPack pack = pack_from(r, cfg);
  const double ell1 = r.num("ell1", 0.0025);
  const double r1 = r.num("r1", 4.0);
  const double r_target = r.num("r_target", 2.0);
  ExtensionSchedule sched;
  try {
    sched = run_schedule(ell1, r1, r_target, pack);
  } catch (const invalid_input& ex) {
    throw config_error(cfg.path + ": " + ex.what());
  }

  EstimateReport done;
  done.check = "schedule-outcome";
  done.pass = sched.outcome == ScheduleOutcome::time_threshold_reached;
  done.margin = sched.steps.back().ell / pack.gate() - 1.0;
  done.tolerance = 0.0;
  done.fitted["steps"] = (double)sched.steps.size();
  done.fitted["gate"] = pack.gate();
  done.fitted["final_ell"] = sched.steps.back().ell;
  done.fitted["final_r"] = sched.steps.back().r;
  done.witness = done.pass ? "gate cleared" : "radius exhausted";
  if (!done.pass) done.note = "schedule stopped before the smallness gate was cleared";

  EstimateReport budget;
  budget.check = "radius-budget";
  const double B = radius_budget(pack);
  budget.margin = B - sched.total_radius_loss;
  budget.tolerance = 0.0;
  budget.pass = budget.margin >= 0.0;
  budget.fitted["budget"] = B;
  budget.fitted["loss"] = sched.total_radius_loss;

  std::vector<std::pair<std::string, std::string>> files;
  std::vector<ManifestEntry> docs;
  files.push_back({"schedule.csv", schedule_csv(sched)});
  docs.push_back({"schedule.csv",
                  "extension staircase\ncolumns: k (step), ell_k (existence time), r_k (radius)"});
  files.push_back({"pack.json", pack_json(pack).dump(2) + "\n"});
  docs.push_back({"pack.json", "constant pack: supplied values and derived wiring"});

  return finish_table_scenario("extension-schedule", cfg, {done, budget}, std::move(files),
                               std::move(docs), out, seed);
}

inline ScenarioResult run_pyramid(const ScenarioConfig& cfg, const std::string& out,
                                  long long seed) {
  ConfigReader r(cfg, "pyramid", scenario_keys("pyramid"));
  const ConstantPack pack = pack_from(r, cfg);
  const std::vector<double> ells = r.num_list("ell_list", {0.005, 0.003, 0.0049});
  std::vector<PyramidLevelInput> levels;
  for (double e : ells) {
    if (!(e > 0.0) || e > pack.gate())
      throw config_error(cfg.path + ": every ell_list entry must sit in (0, gate]");
    levels.push_back({e, pack});
  }
  PyramidDomain dom;
  try {
    dom = pyramid_build(levels);
  } catch (const invalid_input& ex) {
    throw config_error(cfg.path + ": " + ex.what());
  }

  EstimateReport rep;
  rep.check = "pyramid-domain";
  double min_T = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (size_t q = 0; q < dom.T.size(); ++q) {
    rep.series.push_back({(double)(q + 1), dom.T[q]});
    min_T = std::min(min_T, dom.T[q]);
    if (q && dom.T[q] > dom.T[q - 1] + 1e-15) monotone = false;
  }
  rep.pass = !dom.truncated && monotone && min_T > 0.0;
  rep.margin = min_T;
  rep.tolerance = 0.0;
  rep.fitted["levels"] = (double)dom.T.size();
  rep.fitted["T_1"] = dom.T.front();
  rep.note = "series rows: (k, T_k)";
  if (dom.truncated) {
    rep.note += "; truncated at level " + std::to_string(dom.truncated_at);
    rep.witness = "level " + std::to_string(dom.truncated_at);
  }

  std::vector<std::pair<std::string, std::string>> files;
  std::vector<ManifestEntry> docs;
  files.push_back({"pyramid.csv", pyramid_csv(dom, levels)});
  docs.push_back({"pyramid.csv",
                  "spacetime pyramid table\ncolumns: k (ball radius), T_k (time ceiling), r_k "
                  "(schedule start radius k+1+B)"});
  files.push_back({"pack.json", pack_json(pack).dump(2) + "\n"});
  docs.push_back({"pack.json", "constant pack shared by every level"});

  return finish_table_scenario("pyramid", cfg, {rep}, std::move(files), std::move(docs), out,
                               seed);
}

inline ScenarioResult run_gh_report(const ScenarioConfig& cfg, const std::string& out,
                                    long long seed) {
  ConfigReader r(cfg, "gh-report", scenario_keys("gh-report"));
  const double angle = r.num("cone_angle", 0.7);
  const double offset = r.num("offset", 2.0);
  const double ball_radius = r.num("ball_radius", 0.5);
  const std::vector<double> lambdas = r.num_list("lambdas", {1.0, 2.0, 4.0});
  const double threshold = r.num("threshold", -1.0);
  if (!(angle > 0.0 && angle < 1.0))
    throw config_error(cfg.path + ": cone_angle must sit in (0,1)");
  if (!(ball_radius > 0.0) || !(offset > ball_radius))
    throw config_error(cfg.path + ": need 0 < ball_radius < offset");

  const FiniteMetricSpace flat_ref = flat_disc_fms(ball_radius);
  SingularReport vertex, off_vertex, flat_probe;
  try {
    vertex = detect_singular([&](double rad) { return cone_vertex_fms(angle, rad); }, flat_ref,
                             lambdas, ball_radius, threshold);
    off_vertex = detect_singular([&](double rad) { return cone_offset_fms(angle, offset, rad); },
                                 flat_ref, lambdas, ball_radius, threshold);
    flat_probe = detect_singular([&](double rad) { return flat_disc_fms(rad); }, flat_ref,
                                 lambdas, ball_radius, threshold);
  } catch (const invalid_input& ex) {
    throw config_error(cfg.path + ": " + ex.what());
  }

  auto verdict_report = [](const std::string& name, const SingularReport& sr, Verdict want) {
    EstimateReport rep;
    rep.check = name;
    rep.pass = sr.verdict == want;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double e : sr.eps_by_lambda) {
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    // margin: distance of the whole lambda family from the threshold
    rep.margin = want == Verdict::singular ? lo - sr.threshold : sr.threshold - hi;
    rep.tolerance = 0.0;
    rep.fitted["threshold"] = sr.threshold;
    rep.fitted["min_eps"] = lo;
    rep.fitted["max_eps"] = hi;
    rep.witness = std::string("verdict ") + verdict_name(sr.verdict);
    return rep;
  };
  EstimateReport rv = verdict_report("vertex-singular", vertex, Verdict::singular);
  EstimateReport ro = verdict_report("offset-regular", off_vertex, Verdict::regular);
  EstimateReport rf = verdict_report("flat-regular", flat_probe, Verdict::regular);

  EstimateReport indep;
  indep.check = "lambda-independence";
  double spread = 0.0;
  for (double e : vertex.eps_by_lambda) {
    spread = std::max(spread, std::abs(e - vertex.eps_by_lambda.front()));
  }
  indep.fitted["vertex_eps_spread"] = spread;
  indep.tolerance = 1e-9;
  indep.margin = indep.tolerance - spread;
  indep.pass = indep.margin >= 0.0;
  indep.note = "vertex discrepancy must not depend on the rescaling factor";

  ordered_json gh;
  gh["vertex"] = singular_json(vertex);
  gh["offset"] = singular_json(off_vertex);
  gh["flat"] = singular_json(flat_probe);
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<ManifestEntry> docs;
  files.push_back({"gh.json", gh.dump(2) + "\n"});
  docs.push_back({"gh.json",
                  "tangent-rescaling classification per probe point: lambdas, per-lambda "
                  "eps vs the flat disc, verdict"});
  files.push_back({"fms_vertex.csv", fms_csv(cone_vertex_fms(angle, ball_radius))});
  docs.push_back({"fms_vertex.csv",
                  "unit-scale vertex ball\nheader row n,basepoint; then the row-major n x n "
                  "distance matrix"});
  files.push_back({"fms_flat.csv", fms_csv(flat_ref)});
  docs.push_back({"fms_flat.csv", "flat reference ball\nsame layout as fms_vertex.csv"});

  return finish_table_scenario("gh-report", cfg, {rv, ro, rf, indep}, std::move(files),
                               std::move(docs), out, seed);
}

}  // namespace detail

inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                                   long long seed) {
  const std::string name = detail::scenario_name(cfg);
  try {
    if (name == "flat") return detail::run_flat(cfg, out_dir, seed);
    if (name == "sphere") return detail::run_sphere(cfg, out_dir, seed);
    if (name == "hyperbolic") return detail::run_hyperbolic(cfg, out_dir, seed);
    if (name == "flat-disc-complete") return detail::run_flat_disc_complete(cfg, out_dir, seed);
    if (name == "punctured-plane") return detail::run_punctured_plane(cfg, out_dir, seed);
    if (name == "thin-cylinder") return detail::run_thin_cylinder(cfg, out_dir, seed);
    if (name == "cone-sequence") return detail::run_cone_sequence(cfg, out_dir, seed);
    if (name == "extension-schedule") return detail::run_extension_schedule(cfg, out_dir, seed);
    if (name == "pyramid") return detail::run_pyramid(cfg, out_dir, seed);
    if (name == "gh-report") return detail::run_gh_report(cfg, out_dir, seed);
  } catch (const invalid_input& ex) {
    // Bad geometry/solver parameters discovered while building the models are
    // configuration mistakes, not solver failures.
    throw config_error(cfg.path + ": " + ex.what());
  }
  throw config_error(cfg.path + ": unhandled scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// Convergence study: halve h across levels and compare against the closed
// form. Only the models with exact evolutions are studyable.

struct StudyRow {
  int level = 0;
  int n = 0;
  double h = 0.0;
  double max_error = 0.0;
};

struct StudyResult {
  std::string scenario;
  std::vector<StudyRow> rows;
  double fitted_order = 0.0;
  bool order_defined = false;
  std::string note;
  int exit_code = 0;
  std::string summary;
  std::vector<std::string> artifacts;
};

namespace detail {

inline double sup_u_diff(const Surface& a, const Surface& b) {
  const std::vector<double>& ua = surface_u(a);
  const std::vector<double>& ub = surface_u(b);
  if (ua.size() != ub.size()) throw invalid_input("sup_u_diff: node count mismatch");
  double m = 0.0;
  for (size_t i = 0; i < ua.size(); ++i) m = std::max(m, std::abs(ua[i] - ub[i]));
  return m;
}

}  // namespace detail

inline StudyResult convergence_study(const ScenarioConfig& cfg, int levels,
                                     const std::string& out_dir, long long seed) {
  namespace fs = std::filesystem;
  const std::string name = detail::scenario_name(cfg);
  if (name != "sphere" && name != "hyperbolic" && name != "flat")
    throw config_error(cfg.path + ": scenario '" + name +
                       "' has no closed-form oracle for a convergence study");
  if (levels < 3) throw config_error("convergence study needs at least 3 levels");

  ConfigReader r(cfg, name, detail::scenario_keys(name));
  StudyResult res;
  res.scenario = name;

  try {
    if (name == "sphere") {
      const int base = r.integer("base_n", 128);
      const double dt_factor = r.num("dt_factor", 2.0);
      const double t_end = r.num("study_t_end", 0.1);
      ModelSpec spec;
      spec.kind = ModelKind::round_sphere;
      spec.rep = Representation::profile;
      for (int k = 0; k < levels; ++k) {
        spec.n = base << k;
        Surface s0 = make_model(spec);
        const int actual_n = (int)surface_u(s0).size();
        const double ds = 7.2 / actual_n;  // s-span of the default sphere ladder
        SolverConfig sc;
        sc.dt = dt_factor * ds * ds;
        sc.t_end = t_end;
        FlowTrajectory traj = run_flow(s0, sc);
        if (traj.termination == Termination::solver_failed)
          throw solver_failure("study level " + std::to_string(k) + ": " + traj.note, 0.0);
        const Surface want = closed_form_state(spec, traj.t_final);
        res.rows.push_back({k, actual_n, ds,
                            detail::sup_u_diff(traj.snapshots.back().geom, want)});
      }
    } else if (name == "hyperbolic") {
      const int base = r.integer("base_n", 128);
      const double dt_factor = r.num("dt_factor", 40.0);
      const double t_end = r.num("study_t_end", 0.2);
      const double outer = r.num("outer", 0.95);
      auto closed = [](double t, double rr, double) {
        return u_poincare(rr, 0.0) + 0.5 * std::log1p(2.0 * t);
      };
      for (int k = 0; k < levels; ++k) {
        const int n = (base << k) + 1;
        const double h = outer / (n - 1);
        RadialProfile p0 =
            make_radial_profile(n, 0.0, outer, [](double rr) { return u_poincare(rr, 0.0); });
        SolverConfig sc;
        sc.dt = dt_factor * h * h;
        sc.t_end = t_end;
        FlowTrajectory traj = run_flow(p0, sc, BoundaryMode::dirichlet(closed));
        if (traj.termination == Termination::solver_failed)
          throw solver_failure("study level " + std::to_string(k) + ": " + traj.note, 0.0);
        const RadialProfile& q = std::get<RadialProfile>(traj.snapshots.back().geom);
        double err = 0.0;
        for (int i = 0; i < q.n(); ++i)
          err = std::max(err, std::abs(q.u[i] - closed(traj.t_final, q.r[i], 0.0)));
        res.rows.push_back({k, n, h, err});
      }
    } else {  // flat: the fixed point is preserved bitwise
      const int base = r.integer("base_n", 64);
      const double t_end = r.num("study_t_end", 0.1);
      for (int k = 0; k < levels; ++k) {
        const int n = (base << k) + 1;
        RadialProfile p0 = make_radial_profile(n, 0.0, 1.0, [](double) { return 0.0; });
        SolverConfig sc;
        sc.dt = 1e-3;
        sc.t_end = t_end;
        FlowTrajectory traj = run_flow(p0, sc, BoundaryMode::frozen());
        if (traj.termination == Termination::solver_failed)
          throw solver_failure("study level " + std::to_string(k) + ": " + traj.note, 0.0);
        const RadialProfile& q = std::get<RadialProfile>(traj.snapshots.back().geom);
        double err = 0.0;
        for (double u : q.u) err = std::max(err, std::abs(u));
        res.rows.push_back({k, n, 1.0 / (n - 1), err});
      }
    }
  } catch (const invalid_input& ex) {
    throw config_error(cfg.path + ": " + ex.what());
  }

  // Least-squares slope of log(err) against log(h); meaningless once the
  // errors sit at roundoff, so the flat case reports "exact" instead.
  bool all_positive = true;
  for (const StudyRow& row : res.rows) all_positive = all_positive && row.max_error > 0.0;
  if (all_positive) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const StudyRow& row : res.rows) {
      const double x = std::log(row.h), y = std::log(row.max_error);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double m = (double)res.rows.size();
    res.fitted_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    res.order_defined = true;
  } else {
    res.note = "errors at roundoff: the discrete fixed point matches the oracle exactly";
  }

  const fs::path dir(out_dir);
  std::vector<ManifestEntry> manifest;
  std::string table = "level,n,h,max_error\n";
  for (const StudyRow& row : res.rows)
    table += std::to_string(row.level) + "," + std::to_string(row.n) + "," + fmt17(row.h) + "," +
             fmt17(row.max_error) + "\n";
  atomic_write_text(dir / "study.csv", table);
  res.artifacts.push_back("study.csv");
  manifest.push_back({"study.csv",
                      "error against the closed form per refinement level\ncolumns: level, n "
                      "(nodes), h (spacing), max_error (sup-norm factor error at t_end)"});

  ordered_json sj;
  sj["scenario"] = name;
  sj["seed"] = seed;
  sj["levels"] = levels;
  ordered_json rows = ordered_json::array();
  for (const StudyRow& row : res.rows)
    rows.push_back({{"level", row.level}, {"n", row.n}, {"h", row.h}, {"max_error", row.max_error}});
  sj["rows"] = rows;
  if (res.order_defined) sj["fitted_order"] = res.fitted_order;
  if (!res.note.empty()) sj["note"] = res.note;
  sj["exit_code"] = 0;
  sj["config"] = detail::config_echo(cfg);
  atomic_write_text(dir / "run.json", sj.dump(2) + "\n");
  res.artifacts.push_back("run.json");
  manifest.push_back({"run.json", "study manifest: the same table plus the fitted order"});

  std::string s = "scenario: " + name + " (convergence study, " + std::to_string(levels) +
                  " levels)\n";
  for (const StudyRow& row : res.rows)
    s += "  n " + std::to_string(row.n) + "  h " + fmt17(row.h) + "  max_error " +
         fmt17(row.max_error) + "\n";
  if (res.order_defined) s += "fitted order: " + fmt17(res.fitted_order) + "\n";
  if (!res.note.empty()) s += res.note + "\n";
  s += "result: PASS (exit 0)\n";
  res.summary = s;
  atomic_write_text(dir / "summary.txt", s);
  res.artifacts.push_back("summary.txt");
  manifest.push_back({"summary.txt", "human-readable study table"});
  atomic_write_text(dir / "MANIFEST", manifest_text(manifest));
  res.artifacts.push_back("MANIFEST");
  res.exit_code = 0;
  return res;
}

// ---------------------------------------------------------------------------
// `report <dir>`: re-render a previous run from its manifest.

inline int report_directory(const std::string& dir, std::string& out_text) {
  namespace fs = std::filesystem;
  const fs::path run_path = fs::path(dir) / "run.json";
  std::ifstream in(run_path, std::ios::binary);
  if (!in) throw config_error(run_path.string() + ": cannot open run manifest");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& ex) {
    throw config_error(run_path.string() + ": " + ex.what());
  }
  std::string s = "scenario: " + j.value("scenario", std::string("?")) + "\n";
  if (j.contains("termination"))
    s += "termination: " + j["termination"].get<std::string>() + " (t_final " +
         fmt17(j.value("t_final", 0.0)) + ")\n";
  if (j.contains("checks"))
    for (const auto& c : j["checks"]) {
      std::string name = c.value("name", std::string("?"));
      if (name.size() < 22) name.resize(22, ' ');
      s += "check " + name + (c.value("pass", false) ? "  PASS" : "  FAIL") + "  margin " +
           fmt17(c.value("margin", 0.0)) + "\n";
    }
  if (j.contains("rows")) {
    for (const auto& row : j["rows"])
      s += "  n " + std::to_string(row.value("n", 0)) + "  h " + fmt17(row.value("h", 0.0)) +
           "  max_error " + fmt17(row.value("max_error", 0.0)) + "\n";
    if (j.contains("fitted_order")) s += "fitted order: " + fmt17(j["fitted_order"].get<double>()) + "\n";
  }
  const int code = j.value("exit_code", 0);
  s += "recorded exit code: " + std::to_string(code) + "\n";
  out_text = s;
  return code;
}

}  // namespace ricci
