#pragma once

#include "risvs/closed_loop.hpp"
#include "risvs/config.hpp"
#include "risvs/io.hpp"
#include "risvs/scenario.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace risvs {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitSelftest = 3 };

struct RunSpec {
  std::string config_path;  // empty → built-in defaults
  fs::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<double> gamma;
  std::optional<int> windows;
  std::optional<int> seeds;
  std::optional<std::vector<double>> gammas;
  int jobs = 1;
};

/// Loads the scenario and applies command-line overrides.
inline Scenario resolve_scenario(const RunSpec& spec, const std::string& command) {
  Scenario sc = spec.config_path.empty() ? Scenario{} : load_scenario(spec.config_path);
  if (spec.seed) sc.seed = *spec.seed;
  if (spec.strategy) {
    try {
      const StrategyMode m = parse_mode(*spec.strategy);
      if (command == "sweep") {
        if (m == StrategyMode::Opportunistic)
          throw ConfigError("--strategy: sweeps support spatial or temporal separation only");
        sc.sweep.mode = m;
      } else {
        sc.strategy.mode = m;
      }
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("--strategy: ") + e.what());
    }
  }
  if (spec.gamma) sc.strategy.gamma = *spec.gamma;
  if (spec.windows) sc.loop_windows = *spec.windows;
  if (spec.seeds) sc.sweep.seeds = *spec.seeds;
  if (spec.gammas) sc.sweep.gammas = *spec.gammas;
  if (spec.seed && command == "sweep") sc.sweep.first_seed = *spec.seed;
  if (spec.jobs < 1) throw ConfigError("--jobs must be at least 1");
  sc.validate();
  return sc;
}

inline void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory '" + dir.string() + "'");
}

/// One acquisition: displacement and spectrum CSVs for both paths.
inline std::vector<fs::path> cmd_acquire(const RunSpec& spec) {
  const Scenario sc = resolve_scenario(spec, "acquire");
  prepare_out_dir(spec.out_dir);
  const RunResult r = run_acquisition(sc, sc.seed);
  const RunMeta meta{sc.seed, config_hash(sc), "acquire"};
  std::vector<fs::path> files;
  for (PathId p : {PathId::Ris, PathId::Direct}) {
    const auto& est = r.path(p);
    const fs::path disp = spec.out_dir / (std::string("displacement_") + path_name(p) + ".csv");
    write_with_sidecar(disp, meta, [&](std::ostream& o) {
      if (est) write_displacement_csv(o, est->displacement, est->slots);
      else o << kDisplacementHeader << '\n';
    });
    const fs::path spec_file = spec.out_dir / (std::string("spectrum_") + path_name(p) + ".csv");
    write_with_sidecar(spec_file, meta, [&](std::ostream& o) {
      if (est) write_spectrum_csv(o, est->spectrum);
      else o << kSpectrumHeader << '\n';
    });
    files.push_back(disp);
    files.push_back(spec_file);
  }
  return files;
}

inline std::vector<fs::path> cmd_loop(const RunSpec& spec) {
  const Scenario sc = resolve_scenario(spec, "loop");
  prepare_out_dir(spec.out_dir);
  const auto windows = run_closed_loop(sc, sc.strategy, sc.loop_windows);
  const fs::path log = spec.out_dir / "loop.jsonl";
  write_with_sidecar(log, {sc.seed, config_hash(sc), "loop"},
                     [&](std::ostream& o) { write_loop_log(o, windows, sc.strategy.mode); });
  return {log};
}

inline std::vector<fs::path> cmd_sweep(const RunSpec& spec) {
  const Scenario sc = resolve_scenario(spec, "sweep");
  if (sc.sweep.gammas.empty()) throw ConfigError("sweep: the gamma grid is empty");
  prepare_out_dir(spec.out_dir);
  const auto rows = gamma_sweep(sc, sc.sweep.mode, sc.sweep.gammas, seed_range(sc.sweep.first_seed, sc.sweep.seeds),
                                spec.jobs);
  const fs::path out = spec.out_dir / "sweep.csv";
  write_with_sidecar(out, {sc.sweep.first_seed, config_hash(sc), "sweep"},
                     [&](std::ostream& o) { write_sweep_csv(o, rows); });
  return {out};
}

}  // namespace risvs
