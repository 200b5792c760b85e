#include "risvs/commands.hpp"
#include "risvs/config.hpp"
#include "risvs/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace risvs;

namespace {

const fs::path kConfigs = fs::path(RISVS_SOURCE_DIR) / "configs";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("risvs_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

Json minimal(const std::string& section, const std::string& key, Json value) {
  Json j = Json::object();
  j[section][key] = std::move(value);
  return j;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RISVS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Quantity, ParsesUnits) {
  EXPECT_DOUBLE_EQ(parse_quantity("7.15 GHz", Quantity::Frequency, "k"), 7.15e9);
  EXPECT_DOUBLE_EQ(parse_quantity("250 ms", Quantity::Time, "k"), 0.25);
  EXPECT_DOUBLE_EQ(parse_quantity("10 mW", Quantity::Power, "k"), 0.01);
  EXPECT_NEAR(parse_quantity("10 dBm", Quantity::Power, "k"), 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(parse_quantity("2 cm", Quantity::Length, "k"), 0.02);
  EXPECT_DOUBLE_EQ(parse_quantity("180 deg", Quantity::Angle, "k"), kPi);
  EXPECT_DOUBLE_EQ(parse_quantity("-130 dB", Quantity::Decibel, "k"), -130.0);
}

TEST(Quantity, RejectsBareNumbersAndWrongUnits) {
  EXPECT_THROW(parse_quantity("7.15", Quantity::Frequency, "radar.carrier"), ConfigError);
  EXPECT_THROW(parse_quantity("7 GHz", Quantity::Time, "radar.pri"), ConfigError);
  EXPECT_THROW(parse_quantity("GHz", Quantity::Frequency, "radar.carrier"), ConfigError);
  try {
    parse_quantity("10 furlongs", Quantity::Length, "placement.x");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("placement.x"), std::string::npos);
  }
}

TEST(Config, StrictSections) {
  EXPECT_THROW(scenario_from_json(minimal("radar", "carrier", 7.15e9)), ConfigError);
  EXPECT_THROW(scenario_from_json(minimal("radar", "carier", "7 GHz")), ConfigError);
  EXPECT_THROW(scenario_from_json(minimal("radr", "carrier", "7 GHz")), ConfigError);
  EXPECT_THROW(scenario_from_json(minimal("physiology", "breathing_rate", "3 Hz")), ConfigError);
  EXPECT_THROW(scenario_from_json(minimal("strategy", "kind", "hybrid")), ConfigError);
  EXPECT_THROW(parse_scenario("{ not json"), ConfigError);
  EXPECT_THROW(parse_scenario("[1, 2]"), ConfigError);
  EXPECT_NO_THROW(parse_scenario("{}"));
}

TEST(Config, OverridesApply) {
  const Scenario sc = parse_scenario(R"({"radar": {"carrier": "5 GHz", "elements": 4},
                                         "physiology": {"breathing_rate": "0.25 Hz"},
                                         "acquisition": {"seed": 42}})");
  EXPECT_DOUBLE_EQ(sc.radar.carrier_hz, 5e9);
  EXPECT_EQ(sc.radar.elements, 4);
  EXPECT_DOUBLE_EQ(sc.physio.breathing_hz, 0.25);
  EXPECT_EQ(sc.seed, 42u);
}

TEST(Config, RoundTripIsIdentical) {
  std::vector<Scenario> cases{Scenario{}};
  for (const auto& entry : fs::directory_iterator(kConfigs))
    if (entry.path().extension() == ".json") cases.push_back(load_scenario(entry.path().string()));
  ASSERT_GE(cases.size(), 3u);
  for (const Scenario& sc : cases) {
    const std::string a = canonical_text(sc);
    const Scenario back = parse_scenario(a);
    EXPECT_EQ(canonical_text(back), a);
    EXPECT_EQ(config_hash(back), config_hash(sc));
  }
}

TEST(Config, ShippedDefaultMatchesBuiltIn) {
  const Scenario f = load_scenario((kConfigs / "default.json").string());
  const Scenario d;
  EXPECT_NEAR(f.radar.carrier_hz, d.radar.carrier_hz, 1e-3);
  EXPECT_NEAR(f.radar.power_w, d.radar.power_w, 1e-15);
  EXPECT_NEAR((f.placement.ris_center - d.placement.ris_center).norm(), 0.0, 1e-12);
  EXPECT_NEAR(f.physio.breathing_hz, d.physio.breathing_hz, 1e-15);
  EXPECT_EQ(f.processing.clutter_window, d.processing.clutter_window);
  EXPECT_EQ(f.sweep.gammas.size(), 11u);
}

TEST(Config, HashTracksContent) {
  Scenario a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.physio.breathing_hz = 0.2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, MissingFileNamesPath) {
  try {
    load_scenario("/nonexistent/risvs.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/risvs.json"), std::string::npos);
  }
}

TEST(Commands, AcquireWritesFilesDeterministically) {
  TempDir t1("acq1"), t2("acq2");
  RunSpec s;
  s.out_dir = t1.path;
  const auto files = cmd_acquire(s);
  ASSERT_EQ(files.size(), 4u);
  for (const auto& f : files) {
    ASSERT_TRUE(fs::exists(f)) << f;
    fs::path side = f;
    side += ".meta.json";
    ASSERT_TRUE(fs::exists(side));
    const Json meta = Json::parse(slurp(side));
    EXPECT_EQ(meta["seed"], 1);
    EXPECT_EQ(meta["command"], "acquire");
    EXPECT_EQ(meta["config_hash"], config_hash(Scenario{}));
  }
  const auto disp = lines(slurp(t1.path / "displacement_ris.csv"));
  EXPECT_EQ(disp.front(), kDisplacementHeader);
  EXPECT_EQ(disp.size(), 241u);
  EXPECT_EQ(lines(slurp(t1.path / "spectrum_direct.csv")).front(), kSpectrumHeader);

  s.out_dir = t2.path;
  cmd_acquire(s);
  for (const auto& f : files) EXPECT_EQ(slurp(f), slurp(t2.path / f.filename()));
}

TEST(Commands, TemporalZeroShareGivesHeaderOnlyFile) {
  TempDir t("acqt");
  RunSpec s;
  s.out_dir = t.path;
  s.strategy = "temporal";
  s.gamma = 0.0;
  cmd_acquire(s);
  EXPECT_EQ(slurp(t.path / "displacement_ris.csv"), std::string(kDisplacementHeader) + "\n");
  EXPECT_EQ(lines(slurp(t.path / "displacement_direct.csv")).size(), 241u);
}

TEST(Commands, LoopWritesOneLinePerWindow) {
  TempDir t("loop");
  RunSpec s;
  s.out_dir = t.path;
  s.windows = 3;
  s.strategy = "opportunistic";
  cmd_loop(s);
  const auto log = lines(slurp(t.path / "loop.jsonl"));
  ASSERT_EQ(log.size(), 3u);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const Json j = Json::parse(log[i]);
    EXPECT_EQ(j["window"], static_cast<int>(i));
    EXPECT_EQ(j["strategy"], "opportunistic");
    for (const char* key : {"gamma", "active_path", "direct", "ris", "next_gamma", "next_active_path",
                            "theta_direct_deg", "reestimate_position"})
      EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(Commands, SweepRowsAndErrors) {
  TempDir t("sweep");
  RunSpec s;
  s.out_dir = t.path;
  s.seeds = 2;
  s.gammas = std::vector<double>{0.0, 0.5, 1.0};
  s.jobs = 2;
  cmd_sweep(s);
  const auto rows = lines(slurp(t.path / "sweep.csv"));
  ASSERT_EQ(rows.size(), 1u + 3 * 2 * 2);
  EXPECT_EQ(rows[0], kSweepHeader);
  EXPECT_EQ(rows[1].substr(0, 8), "0,ris,1,");

  RunSpec empty = s;
  empty.gammas = std::vector<double>{};
  EXPECT_THROW(cmd_sweep(empty), ConfigError);
  RunSpec opp = s;
  opp.strategy = "opportunistic";
  EXPECT_THROW(cmd_sweep(opp), ConfigError);
  RunSpec jobs = s;
  jobs.jobs = 0;
  EXPECT_THROW(cmd_sweep(jobs), ConfigError);
}

TEST(Commands, SweepSingleShareMatchesAcquire) {
  TempDir t("one");
  RunSpec s;
  s.out_dir = t.path;
  s.seeds = 1;
  s.seed = 4;
  s.gammas = std::vector<double>{0.5};
  cmd_sweep(s);
  const auto rows = lines(slurp(t.path / "sweep.csv"));
  const RunResult r = run_acquisition(Scenario{}, 4);
  EXPECT_EQ(rows[1], "0.5,ris,4," + csv_number(r.ris->peak_freq) + "," + csv_number(r.ris->prominence_db));
  EXPECT_EQ(rows[2], "0.5,direct,4," + csv_number(r.direct->peak_freq) + "," + csv_number(r.direct->prominence_db));
}

TEST(Cli, ExitCodes) {
  TempDir t("cli");
  const std::string out = " -o " + t.path.string();
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("acquire -c /nonexistent.json" + out), 1);
  EXPECT_EQ(run_cli("acquire --strategy hybrid" + out), 1);
  EXPECT_EQ(run_cli("sweep --gammas" + out), 1);
  EXPECT_EQ(run_cli("acquire -o /dev/null/sub"), 2);
  EXPECT_EQ(run_cli("acquire -c " + (kConfigs / "facing_radar.json").string() + out), 0);
  EXPECT_TRUE(fs::exists(t.path / "spectrum_direct.csv.meta.json"));
}
