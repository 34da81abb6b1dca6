// Scenario runner CLI.
//
//   riccilab run <config>    [--out DIR] [--seed N] [--quiet]
//   riccilab study <config>  --levels K [--out DIR] [--seed N] [--quiet]
//   riccilab report <dir>    [--quiet]
//
// Exit codes: 0 every check passed, 1 configuration error or a failed
// check, 2 solver failure (partial artifacts are still written).

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "ricci/scenario.hpp"

namespace {

struct Options {
  std::string config;
  std::string dir;
  std::string out = "out";
  long long seed = 0;
  int levels = 3;
  bool quiet = false;
};

void say(const Options& opt, const std::string& text) {
  if (!opt.quiet) std::fputs(text.c_str(), stdout);
}

int do_run(const Options& opt) {
  ricci::ScenarioConfig cfg = ricci::load_config(opt.config);
  ricci::ScenarioResult res = ricci::run_scenario(cfg, opt.out, opt.seed);
  say(opt, res.summary);
  say(opt, "artifacts in " + opt.out + "/\n");
  return res.exit_code;
}

int do_study(const Options& opt) {
  ricci::ScenarioConfig cfg = ricci::load_config(opt.config);
  ricci::StudyResult res = ricci::convergence_study(cfg, opt.levels, opt.out, opt.seed);
  say(opt, res.summary);
  say(opt, "artifacts in " + opt.out + "/\n");
  return res.exit_code;
}

int do_report(const Options& opt) {
  std::string text;
  const int code = ricci::report_directory(opt.dir, text);
  say(opt, text);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal-flow scenario laboratory"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* run = app.add_subcommand("run", "execute a scenario config and its checks");
  run->add_option("config", opt.config, "scenario config file")->required();
  run->add_option("--out", opt.out, "artifact directory (default: out)");
  run->add_option("--seed", opt.seed, "seed recorded in the run manifest");
  run->add_flag("--quiet", opt.quiet, "suppress stdout; artifacts only");

  CLI::App* study = app.add_subcommand("study", "closed-form convergence study");
  study->add_option("config", opt.config, "scenario config file")->required();
  study->add_option("--levels", opt.levels, "refinement levels (>= 3)")->required();
  study->add_option("--out", opt.out, "artifact directory (default: out)");
  study->add_option("--seed", opt.seed, "seed recorded in the run manifest");
  study->add_flag("--quiet", opt.quiet, "suppress stdout; artifacts only");

  CLI::App* report = app.add_subcommand("report", "re-render a previous run directory");
  report->add_option("dir", opt.dir, "artifact directory of a previous run")->required();
  report->add_flag("--quiet", opt.quiet, "suppress stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // bad usage is a configuration error
  }

  try {
    if (run->parsed()) return do_run(opt);
    if (study->parsed()) return do_study(opt);
    return do_report(opt);
  } catch (const ricci::config_error& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "solver failure: %s\n", ex.what());
    return 2;
  }
}
