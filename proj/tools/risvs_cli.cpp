// Command-line front end: acquire, loop, sweep, selftest.

#include "risvs/acceptance.hpp"
#include "risvs/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace {

using namespace risvs;

struct Options {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  std::string strategy;
  double gamma = 0.0;
  int windows = 0;
  int seeds = 0;
  std::vector<double> gammas;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config, "Scenario JSON file (defaults to the built-in reference room)");
  cmd->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed (first seed for sweeps)");
  cmd->add_option("--strategy", o.strategy, "temporal | spatial | opportunistic");
}

RunSpec to_spec(const CLI::App& cmd, const Options& o) {
  RunSpec s;
  s.config_path = o.config;
  s.out_dir = o.out;
  if (cmd.count("--seed")) s.seed = o.seed;
  if (cmd.count("--strategy")) s.strategy = o.strategy;
  if (cmd.get_option_no_throw("--gamma") && cmd.count("--gamma")) s.gamma = o.gamma;
  if (cmd.get_option_no_throw("--windows") && cmd.count("--windows")) s.windows = o.windows;
  if (cmd.get_option_no_throw("--seeds") && cmd.count("--seeds")) s.seeds = o.seeds;
  if (cmd.get_option_no_throw("--gammas") && cmd.count("--gammas")) s.gammas = o.gammas;
  s.jobs = o.jobs;
  return s;
}

void report(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-assisted radar vital-sign simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Options o;

  auto* acquire = app.add_subcommand("acquire", "One acquisition window; per-path displacement and spectrum CSVs");
  add_common(acquire, o);
  acquire->add_option("--gamma", o.gamma, "RIS share for spatial/temporal separation");

  auto* loop = app.add_subcommand("loop", "Closed-loop operation; JSON-lines log per window");
  add_common(loop, o);
  loop->add_option("--gamma", o.gamma, "Initial RIS share");
  loop->add_option("--windows", o.windows, "Number of evaluation windows");

  auto* sweep = app.add_subcommand("sweep", "Resource-allocation sweep over the RIS share");
  add_common(sweep, o);
  sweep->add_option("--seeds", o.seeds, "Seeds per share");
  sweep->add_option("--gammas", o.gammas, "RIS shares to evaluate")->expected(0, -1);
  sweep->add_option("-j,--jobs", o.jobs, "Worker threads")->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria and print a report");
  selftest->add_option("-j,--jobs", o.jobs, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*acquire) report(cmd_acquire(to_spec(*acquire, o)));
    if (*loop) report(cmd_loop(to_spec(*loop, o)));
    if (*sweep) {
      if (sweep->count("--gammas")) {
        const auto& raw = sweep->get_option("--gammas")->results();
        const bool empty = std::all_of(raw.begin(), raw.end(), [](const std::string& r) { return r.empty(); });
        if (raw.empty() || empty) throw ConfigError("--gammas: the gamma grid is empty");
      }
      report(cmd_sweep(to_spec(*sweep, o)));
    }
    if (*selftest) {
      const int jobs = selftest->count("--jobs") ? std::max(1, o.jobs) : acceptance::detail::default_jobs();
      const auto results = acceptance::run_all(jobs);
      acceptance::print_report(std::cout, results);
      return acceptance::all_passed(results) ? kExitOk : kExitSelftest;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IngestError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
