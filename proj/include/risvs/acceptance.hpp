#pragma once

#include "risvs/beamform.hpp"
#include "risvs/commands.hpp"
#include "risvs/oracles.hpp"
#include "risvs/scenario.hpp"
#include "risvs/sigproc.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace risvs::acceptance {

struct Outcome {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_s = 0.0;  // 0 → no runtime limit
};

namespace detail {

inline std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

/// Random half-wavelength ULA constraint pair with |a_c| <= limit.
inline std::pair<CVector, CVector> random_pair(Rng& rng, double limit) {
  const ArrayConfig cfg = ArrayConfig::half_wavelength(5, 1.0);
  std::uniform_real_distribution<double> ang(-kPi / 2.0 + 0.05, kPi / 2.0 - 0.05);
  while (true) {
    const CVector a1 = ula_steering(cfg, ang(rng)).entries;
    const CVector a2 = ula_steering(cfg, ang(rng)).entries;
    if (std::abs(steering_correlation(a1, a2)) <= limit) return {a1, a2};
  }
}

}  // namespace detail

inline Outcome beamformer_constraints() {
  Outcome o{1, "beamformer constraint satisfaction", false, "", 0.0, 5.0};
  Rng rng(derive_seed(2024, 1));
  std::uniform_real_distribution<double> g(0.01, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto [a1, a2] = detail::random_pair(rng, 0.99);
    const ConstraintPair c{a1, a2, g(rng), g(rng)};
    const Precoder p = min_norm_precoder(c);
    worst = std::max(worst, std::abs(std::abs(a1.dot(p.w)) - c.gamma1) / c.gamma1);
    worst = std::max(worst, std::abs(std::abs(a2.dot(p.w)) - c.gamma2) / c.gamma2);
  }
  o.passed = worst <= 1e-9;
  o.detail = "max relative constraint error " + detail::fmt(worst, 3) + " over 1000 instances";
  return o;
}

inline Outcome minimum_norm_optimality() {
  Outcome o{2, "minimum-norm optimality", false, "", 0.0, 30.0};
  Rng rng(derive_seed(2024, 2));
  std::uniform_real_distribution<double> g(0.05, 1.0);
  double worst_closed = 0.0, worst_oracle = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto [a1, a2] = detail::random_pair(rng, 0.99);
    const double g1 = g(rng), g2 = g(rng);
    const Precoder p = min_norm_precoder({a1, a2, g1, g2});
    const double closed = min_power_closed_form(g1, g2, steering_correlation(a1, a2));
    const auto brute = oracle::brute_force_min_power(a1, a2, g1, g2);
    worst_closed = std::max(worst_closed, std::abs(p.achieved_power - closed) / closed);
    worst_oracle = std::max(worst_oracle, std::abs(p.achieved_power - brute.power) / brute.power);
  }
  o.passed = worst_closed <= 1e-9 && worst_oracle <= 1e-6;
  o.detail = "vs closed form " + detail::fmt(worst_closed, 3) + " (tol 1e-9), vs phase-grid oracle " +
             detail::fmt(worst_oracle, 3) + " (tol 1e-6)";
  return o;
}

inline Outcome fixed_budget_split() {
  Outcome o{3, "fixed-budget split spends exactly P_total", false, "", 0.0, 0.0};
  Rng rng(derive_seed(2024, 3));
  const double p_total = 0.01;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto [a1, a2] = detail::random_pair(rng, 0.99);
    for (int k = 0; k <= 10; ++k) {
      const Precoder p = split_precoder(a1, a2, k / 10.0, p_total);
      worst = std::max(worst, std::abs(p.achieved_power - p_total) / p_total);
    }
  }
  o.passed = worst <= 1e-9;
  o.detail = "max relative power error " + detail::fmt(worst, 3) + " over 100 geometries x 11 shares";
  return o;
}

inline Outcome noise_floor() {
  Outcome o{4, "noise-floor arithmetic", false, "", 0.0, 0.0};
  const double nf = Scenario{}.radar.noise_floor_dbm();
  o.passed = std::abs(nf - (-107.0)) < 0.05;
  o.detail = "sigma_n^2 = " + detail::fmt(nf, 8) + " dBm (expected -107.0 at 0.1 dB display precision)";
  return o;
}

/// Noiseless RIS-only acquisition without clutter or fading.
inline Scenario clean_single_path_scenario() {
  Scenario sc;
  sc.noise = false;
  sc.channel.fading = false;
  sc.channel.clutter = false;
  sc.processing.clutter_window = 0;
  sc.physio.q_direct = 0.0;
  sc.physio.random_phase = false;
  sc.strategy.mode = StrategyMode::Opportunistic;
  sc.strategy.active = PathId::Ris;
  return sc;
}

inline Outcome demodulation_fidelity() {
  Outcome o{5, "demodulation fidelity", false, "", 0.0, 5.0};
  const Scenario sc = clean_single_path_scenario();
  const RunResult r = run_acquisition(sc, 1);
  const Scene scene = build_scene(sc);
  const double gain = angle_gain(sc.physio.model(1.0), scene.angles.incidence_ris);
  std::vector<double> truth(r.truth.samples);
  for (double& v : truth) v *= gain;
  // The demodulator removes a least-squares line; compare against the same projection.
  remove_linear_trend(truth);
  const auto& d = r.ris->displacement.samples;
  double se = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) se += (d[i] - truth[i]) * (d[i] - truth[i]);
  const double rmse = std::sqrt(se / static_cast<double>(d.size()));
  const double amp = gain * sc.physio.peak_to_peak_m / 2.0;
  const double bin = lock_tolerance(sc);
  const double df = std::abs(r.ris->peak_freq - sc.physio.breathing_hz);
  o.passed = rmse < 0.01 * amp && df <= bin + 1e-12;
  o.detail = "RMSE " + detail::fmt(100.0 * rmse / amp, 3) + "% of amplitude, peak " + detail::fmt(r.ris->peak_freq, 6) +
             " Hz (|df| " + detail::fmt(df, 3) + " <= bin " + detail::fmt(bin, 4) + ")";
  return o;
}

inline Outcome clutter_filter_check() {
  Outcome o{6, "clutter filter", false, "", 0.0, 0.0};
  const int len = 240;
  CMatrix constant(2, len);
  constant.row(0).setConstant(cd{3.5, -1.25});
  constant.row(1).setConstant(cd{-0.7, 2.0});
  double worst_const = 0.0;
  for (int w = 3; w <= len; w += 2) worst_const = std::max(worst_const, clutter_filter(constant, w).cwiseAbs().maxCoeff());

  const double fs = 4.0, f = 0.133;
  const int w = 21;
  CMatrix tone(1, len);
  for (int l = 0; l < len; ++l) tone(0, l) = std::polar(1.0, kTwoPi * f * l / fs);
  const CMatrix hp = clutter_filter(tone, w);
  const int mid = len / 2;
  const cd ma = (tone(0, mid) - hp(0, mid)) / tone(0, mid);
  const double closed = moving_average_response(f, fs, w);
  const double err = std::abs(ma - cd{closed, 0.0});
  o.passed = worst_const <= 1e-12 && err <= 1e-6;
  o.detail = "max |constant residue| " + detail::fmt(worst_const, 3) + ", W=21 gain at 0.133 Hz " +
             detail::fmt(ma.real(), 9) + " vs Dirichlet " + detail::fmt(closed, 9);
  return o;
}

inline Outcome end_to_end_shape(int jobs) {
  Outcome o{7, "end-to-end: RIS path beats direct path (spatial, share 0.5)", false, "", 0.0, 120.0};
  Scenario sc;
  const auto rows = gamma_sweep(sc, StrategyMode::Spatial, {0.5}, seed_range(1, 20), jobs);
  std::vector<double> ris, direct;
  for (const SweepRow& r : rows) (r.path == PathId::Ris ? ris : direct).push_back(r.prominence_db);
  int wins = 0;
  for (std::size_t i = 0; i < ris.size(); ++i) wins += ris[i] > direct[i];
  const double frac = static_cast<double>(wins) / static_cast<double>(ris.size());
  const double med = detail::median(ris);
  o.passed = frac >= 0.9 && med >= 10.0;
  o.detail = "RIS > direct in " + detail::fmt(100.0 * frac, 3) + "% of 20 seeds, median RIS prominence " +
             detail::fmt(med, 4) + " dB (direct " + detail::fmt(detail::median(direct), 4) + " dB)";
  return o;
}

struct LockCurve {
  std::vector<double> gammas;
  std::vector<double> lock;
};

inline LockCurve lock_curve(const Scenario& sc, StrategyMode mode, int seeds, int jobs) {
  LockCurve c;
  for (int k = 0; k <= 10; ++k) c.gammas.push_back(k / 10.0);
  const auto rows = gamma_sweep(sc, mode, c.gammas, seed_range(1, seeds), jobs);
  const double tol = lock_tolerance(sc);
  c.lock.assign(c.gammas.size(), 0.0);
  for (const SweepRow& r : rows) {
    if (r.path != PathId::Ris) continue;
    const auto idx = static_cast<std::size_t>(std::lround(r.gamma * 10.0));
    c.lock[idx] += peak_locked(r.peak_freq, sc.physio.breathing_hz, tol) ? 1.0 / seeds : 0.0;
  }
  return c;
}

/// Smallest share whose lock fraction reaches `level`, or +inf.
inline double share_to_reach(const LockCurve& c, double level) {
  for (std::size_t i = 0; i < c.gammas.size(); ++i)
    if (c.lock[i] >= level - 1e-12) return c.gammas[i];
  return std::numeric_limits<double>::infinity();
}

inline bool non_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - 1e-12) return false;
  return true;
}

inline Outcome gamma_sweep_trend(int jobs) {
  Outcome o{8, "resource-allocation sweep trend", false, "", 0.0, 600.0};
  const Scenario sc;
  const LockCurve sp = lock_curve(sc, StrategyMode::Spatial, 20, jobs);
  const LockCurve tp = lock_curve(sc, StrategyMode::Temporal, 20, jobs);
  const double s90 = share_to_reach(sp, 0.9);
  const double t90 = share_to_reach(tp, 0.9);
  const bool mono = non_decreasing(sp.lock);
  const bool mono_t = non_decreasing(tp.lock);
  o.passed = mono && mono_t && sp.lock[5] >= 0.9 && t90 > s90;
  std::ostringstream os;
  os << "lock spatial [";
  for (std::size_t i = 0; i < sp.lock.size(); ++i) os << (i ? " " : "") << detail::fmt(sp.lock[i], 2);
  os << "] temporal [";
  for (std::size_t i = 0; i < tp.lock.size(); ++i) os << (i ? " " : "") << detail::fmt(tp.lock[i], 2);
  os << "]; 90% reached at spatial " << s90 << ", temporal " << t90;
  o.detail = os.str();
  return o;
}

inline Outcome temporal_resolution() {
  Outcome o{9, "temporal separation doubles the main-lobe width", false, "", 0.0, 0.0};
  Scenario sc;
  sc.noise = false;
  sc.channel.fading = false;
  sc.channel.clutter = false;
  sc.physio.random_phase = false;
  StrategyKind spatial = sc.strategy;
  spatial.mode = StrategyMode::Spatial;
  spatial.gamma = 0.5;
  StrategyKind temporal = spatial;
  temporal.mode = StrategyMode::Temporal;
  const RunResult rs = run_acquisition(sc, spatial, 1);
  const RunResult rt = run_acquisition(sc, temporal, 1);
  const double ws = main_lobe_width(rs.ris->spectrum, rs.ris->peak_index);
  const double wt = main_lobe_width(rt.ris->spectrum, rt.ris->peak_index);
  const double ratio = wt / ws;
  o.passed = std::abs(ratio - 2.0) <= 0.2;
  o.detail = "half-power width spatial " + detail::fmt(ws, 4) + " Hz, temporal " + detail::fmt(wt, 4) +
             " Hz, ratio " + detail::fmt(ratio, 4);
  return o;
}

inline Outcome root_music_accuracy() {
  Outcome o{10, "root-MUSIC accuracy", false, "", 0.0, 0.0};
  const ArrayConfig cfg = ArrayConfig::half_wavelength(5, 1.0);
  const double snr = db2lin(20.0);
  std::vector<double> err;
  for (int seed = 1; seed <= 100; ++seed) {
    Rng rng(derive_seed(static_cast<std::uint64_t>(seed), 10));
    std::uniform_real_distribution<double> ang(deg2rad(-60.0), deg2rad(60.0));
    const double theta = ang(rng);
    const CVector a = ula_steering(cfg, theta).entries * std::sqrt(5.0);
    CMatrix x(5, 200);
    for (int t = 0; t < 200; ++t) {
      const cd s = complex_normal(rng);
      for (int m = 0; m < 5; ++m) x(m, t) = a(m) * s + complex_normal(rng, 1.0 / snr);
    }
    err.push_back(std::abs(rad2deg(root_music_doa(x, 1, cfg)[0] - theta)));
  }
  const double med = detail::median(err);
  o.passed = med < 0.5;
  o.detail = "median |error| " + detail::fmt(med, 3) + " deg over 100 seeds";
  return o;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Outcome determinism() {
  Outcome o{11, "determinism", false, "", 0.0, 0.0};
  const fs::path base = fs::temp_directory_path() /
                        ("risvs_selftest_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::size_t compared = 0;
  bool same = true;
  std::string first_diff;
  for (int rep = 0; rep < 2; ++rep) {
    RunSpec spec;
    spec.seed = 7;
    spec.out_dir = base / std::to_string(rep) / "acquire";
    cmd_acquire(spec);
    spec.out_dir = base / std::to_string(rep) / "loop";
    spec.windows = 3;
    spec.strategy = "opportunistic";
    cmd_loop(spec);
    spec.out_dir = base / std::to_string(rep) / "sweep";
    spec.strategy = "temporal";
    spec.windows.reset();
    spec.seeds = 3;
    spec.gammas = std::vector<double>{0.2, 0.7};
    spec.jobs = rep == 0 ? 1 : 4;
    cmd_sweep(spec);
  }
  for (const auto& e : fs::recursive_directory_iterator(base / "0")) {
    if (!e.is_regular_file()) continue;
    const fs::path twin = base / "1" / fs::relative(e.path(), base / "0");
    ++compared;
    if (!fs::exists(twin) || read_file(e.path()) != read_file(twin)) {
      same = false;
      if (first_diff.empty()) first_diff = fs::relative(e.path(), base / "0").string();
    }
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  o.passed = same && compared >= 12;
  o.detail = std::to_string(compared) + " files compared across repeated acquire/loop/sweep runs" +
             (same ? ", all byte-identical" : ", first mismatch " + first_diff);
  return o;
}

/// Runs one criterion, timing it and turning exceptions into failures.
inline Outcome timed(const std::function<Outcome()>& fn, int id, const std::string& name) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.id = id;
    o.name = name;
    o.passed = false;
    o.detail = std::string("exception: ") + e.what();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.limit_s > 0.0 && o.seconds > o.limit_s) {
    o.passed = false;
    o.detail += " (runtime " + detail::fmt(o.seconds, 3) + " s exceeds " + detail::fmt(o.limit_s, 3) + " s)";
  }
  return o;
}

inline std::vector<Outcome> run_all(int jobs = detail::default_jobs()) {
  std::vector<Outcome> out;
  out.push_back(timed(beamformer_constraints, 1, "beamformer constraint satisfaction"));
  out.push_back(timed(minimum_norm_optimality, 2, "minimum-norm optimality"));
  out.push_back(timed(fixed_budget_split, 3, "fixed-budget split spends exactly P_total"));
  out.push_back(timed(noise_floor, 4, "noise-floor arithmetic"));
  out.push_back(timed(demodulation_fidelity, 5, "demodulation fidelity"));
  out.push_back(timed(clutter_filter_check, 6, "clutter filter"));
  out.push_back(timed([jobs] { return end_to_end_shape(jobs); }, 7, "end-to-end shape"));
  out.push_back(timed([jobs] { return gamma_sweep_trend(jobs); }, 8, "resource-allocation sweep trend"));
  out.push_back(timed(temporal_resolution, 9, "temporal separation doubles the main-lobe width"));
  out.push_back(timed(root_music_accuracy, 10, "root-MUSIC accuracy"));
  out.push_back(timed(determinism, 11, "determinism"));
  return out;
}

inline void print_report(std::ostream& os, const std::vector<Outcome>& results) {
  for (const Outcome& o : results)
    os << (o.passed ? "PASS" : "FAIL") << "  [" << std::setw(2) << o.id << "] " << o.name << ": " << o.detail << " ("
       << detail::fmt(o.seconds, 3) << " s)\n";
  const auto passed = std::count_if(results.begin(), results.end(), [](const Outcome& o) { return o.passed; });
  os << passed << "/" << results.size() << " criteria passed\n";
}

inline bool all_passed(const std::vector<Outcome>& results) {
  return std::all_of(results.begin(), results.end(), [](const Outcome& o) { return o.passed; });
}

}  // namespace risvs::acceptance
