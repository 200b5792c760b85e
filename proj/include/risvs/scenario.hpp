#pragma once

#include "risvs/beamform.hpp"
#include "risvs/channel.hpp"
#include "risvs/common.hpp"
#include "risvs/geometry.hpp"
#include "risvs/physio.hpp"
#include "risvs/sigproc.hpp"
#include "risvs/strategy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace risvs {

struct RadarConfig {
  int elements = 5;
  double carrier_hz = 7.15e9;
  double bandwidth_hz = 0.5e6;
  int fast_samples = 64;
  double pri_s = 0.25;
  double power_w = 0.01;
  double noise_figure_db = 10.0;
  double element_spacing_wl = 0.5;
  double pulse_freq_hz = 0.0;  // 0 → a quarter of the fast-time rate

  double wavelength() const { return risvs::wavelength(carrier_hz); }
  double slow_rate() const { return 1.0 / pri_s; }
  double fast_rate() const { return bandwidth_hz * fast_samples; }  // B = 1/T_p, T_p = K_fast/fs
  double pulse_freq() const { return pulse_freq_hz > 0.0 ? pulse_freq_hz : fast_rate() / 4.0; }
  double noise_floor_dbm() const { return thermal_noise_dbm(bandwidth_hz, noise_figure_db); }
  double noise_power_w() const { return dbm2watt(noise_floor_dbm()); }
  ArrayConfig array() const { return {elements, element_spacing_wl * wavelength(), wavelength()}; }

  void validate() const {
    if (elements < 2) throw ConfigError("radar.elements must be at least 2");
    if (!(carrier_hz > 0.0)) throw ConfigError("radar.carrier must be positive");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("radar.bandwidth must be positive");
    if (fast_samples < 1) throw ConfigError("radar.fast_samples must be at least 1");
    if (!(pri_s > 0.0)) throw ConfigError("radar.pri must be positive");
    if (!(power_w > 0.0)) throw ConfigError("radar.power must be positive");
    if (!(element_spacing_wl > 0.0)) throw ConfigError("radar.element_spacing must be positive");
    if (pulse_freq_hz < 0.0 || pulse_freq() >= fast_rate() / 2.0)
      throw ConfigError("radar.pulse_frequency must lie below half the fast-time rate");
  }
};

struct RisSetup {
  int rows = 10;
  int cols = 10;
  double spacing_wl = 0.5;
  int phase_bits = 0;
  bool aperture_gain = true;
};

struct ChannelConfig {
  double rician_k_db = 10.0;
  bool fading = true;
  double clutter_gain_db = -130.0;  // per-entry clutter power
  bool clutter = true;
};

struct PhysioConfig {
  double breathing_hz = 0.133;
  double peak_to_peak_m = 0.02;
  int harmonics = 0;
  double drift_m = 0.0;
  bool random_phase = true;
  double q_ris = 1.0;
  double q_direct = 1.0;
  double reference_angle = deg2rad(78.75);
  double reference_gain = 0.1;
  std::vector<std::pair<double, double>> gain_table;  // (rad, gain); empty → parametric
  double distortion_m = 0.0;
  std::string trace_file;

  RcsModel model(double q) const {
    return gain_table.empty() ? RcsModel::parametric(q, reference_angle, reference_gain)
                              : RcsModel::measured(q, gain_table);
  }
};

struct SweepConfig {
  StrategyMode mode = StrategyMode::Spatial;
  std::vector<double> gammas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int seeds = 20;
  std::uint64_t first_seed = 1;
};

struct Scenario {
  RadarConfig radar;
  RisSetup ris;
  Placement placement = default_placement();
  ChannelConfig channel;
  PhysioConfig physio;
  ExtractionSettings processing;
  bool noise = true;
  double window_s = 60.0;
  StrategyKind strategy;
  SweepConfig sweep;
  int loop_windows = 5;
  std::uint64_t seed = 1;

  int length() const { return static_cast<int>(std::llround(window_s * radar.slow_rate())); }

  void validate() const {
    radar.validate();
    try {
      placement.validate();
    } catch (const InvalidGeometry& e) {
      throw ConfigError(std::string("placement: ") + e.what());
    }
    if (ris.rows < 1 || ris.cols < 1) throw ConfigError("ris.rows and ris.cols must be positive");
    if (!(ris.spacing_wl > 0.0)) throw ConfigError("ris.element_spacing must be positive");
    if (ris.phase_bits < 0 || ris.phase_bits > 16) throw ConfigError("ris.phase_bits must lie in [0, 16]");
    if (!(channel.rician_k_db > -100.0)) throw ConfigError("channel.rician_k is out of range");
    if (!(physio.breathing_hz > 0.0 && physio.breathing_hz < radar.slow_rate() / 2.0))
      throw ConfigError("physiology.breathing_rate violates slow-time Nyquist (0 < f_b < " +
                        std::to_string(radar.slow_rate() / 2.0) + " Hz)");
    if (!(physio.peak_to_peak_m >= 0.0)) throw ConfigError("physiology.peak_to_peak must be non-negative");
    if (!(physio.q_ris >= 0.0 && physio.q_direct >= 0.0)) throw ConfigError("reflectivities must be non-negative");
    try {
      (void)physio.model(1.0);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("physiology angle gain: ") + e.what());
    }
    if (length() < 16) throw ConfigError("acquisition window must hold at least 16 slow-time samples");
    if (processing.zero_pad < 1) throw ConfigError("processing.zero_pad must be at least 1");
    if (processing.clutter_window < 0 || (processing.clutter_window > 0 && processing.clutter_window % 2 == 0) ||
        processing.clutter_window == 1)
      throw ConfigError("processing.clutter_window must be 0 (off) or an odd value >= 3");
    if (!(processing.band.lo > 0.0 && processing.band.lo < processing.band.hi &&
          processing.band.hi <= radar.slow_rate() / 2.0))
      throw ConfigError("processing band must satisfy 0 < lo < hi <= slow_rate/2");
    try {
      strategy.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("strategy: ") + e.what());
    }
    for (double g : sweep.gammas)
      if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("sweep.gammas must lie in [0, 1]");
    if (sweep.seeds < 1) throw ConfigError("sweep.seeds must be at least 1");
    if (loop_windows < 0) throw ConfigError("loop.windows must be non-negative");
  }
};

// ---------------------------------------------------------------------------
// Derived scene

struct Scene {
  ArrayConfig array;
  RisConfig ris;
  PlacementAngles angles;
  PathSteering steering;
  LosChannels los;
  Waveform waveform;
  double lambda = 0.0;
  double slow_rate = 0.0;
  double noise_w = 0.0;
  int length = 0;
};

/// Builds the deterministic part of the scene. The RIS is focused on
/// `focus` (default: the configured target) and the direct-path steering
/// vector points at `theta_direct` (default: the true azimuth).
inline Scene build_scene(const Scenario& sc, std::optional<Vec3> focus = std::nullopt,
                         std::optional<double> theta_direct = std::nullopt) {
  sc.validate();
  Scene s;
  s.lambda = sc.radar.wavelength();
  s.slow_rate = sc.radar.slow_rate();
  s.noise_w = sc.radar.noise_power_w();
  s.length = sc.length();
  s.array = sc.radar.array();
  const Placement& p = sc.placement;
  s.ris = make_ris_grid(sc.ris.rows, sc.ris.cols, sc.ris.spacing_wl * s.lambda, p.ris_center, p.ris_normal);
  s.ris.phase_bits = sc.ris.phase_bits;
  s.ris.aperture_gain = sc.ris.aperture_gain;
  s.ris.phases = ris_focus_profile(p.radar_position, focus.value_or(p.target_position), s.ris, s.lambda);
  s.angles = angles_from_placement(p);
  if (s.angles.incidence_direct > kPi / 2.0 || s.angles.incidence_ris > kPi / 2.0)
    throw InvalidGeometry("chest faces away from the radar or the RIS (incidence beyond 90°)");
  s.steering.direct = ula_steering(s.array, theta_direct.value_or(s.angles.theta_direct)).entries;
  s.steering.ris = ula_steering(s.array, s.angles.theta_ris).entries;
  s.los = los_channel(p, s.array, s.ris);
  s.waveform = make_waveform(sc.radar.pulse_freq(), sc.radar.fast_rate(), sc.radar.fast_samples);
  return s;
}

/// Block-fading realization for one run; each link has its own RNG stream.
inline ChannelRealization draw_channels(const Scenario& sc, const Scene& scene, std::uint64_t seed) {
  const double k = sc.channel.fading ? db2lin(sc.channel.rician_k_db) : kPureLosK;
  Rng r_direct(derive_seed(seed, stream::kDirect));
  Rng r_incident(derive_seed(seed, stream::kIncident));
  Rng r_target(derive_seed(seed, stream::kTarget));
  Rng r_clutter(derive_seed(seed, stream::kClutter));
  ChannelRealization ch;
  ch.direct = rician_draw_scaled(scene.los.direct, k, r_direct);
  ch.incident = rician_draw_scaled(scene.los.incident, k, r_incident);
  ch.target = rician_draw_scaled(scene.los.target, k, r_target);
  const double strength = sc.channel.clutter ? db2lin(sc.channel.clutter_gain_db) : 0.0;
  ch.clutter = clutter_draw(strength, r_clutter, scene.array.element_count);
  ch.ris_diag = reflection_diagonal(scene.ris.phases);
  return ch;
}

struct PathTraces {
  DisplacementTrace truth;  // chest displacement, metres
  CVector rcs_ris;          // α_l
  CVector rcs_direct;       // β_l
  double gain_ris = 1.0;
  double gain_direct = 1.0;
};

/// Chest motion and per-path RCS for `total` slow-time samples. Ingested
/// two-column traces map front → smaller-incidence path and side → the
/// other, with unit angle gain (the recording already carries it).
inline PathTraces make_traces(const Scenario& sc, const Scene& scene, std::uint64_t seed, int total) {
  PathTraces t;
  const auto n = static_cast<std::size_t>(total);
  const bool ris_is_front = scene.angles.incidence_ris <= scene.angles.incidence_direct;
  DisplacementTrace d_ris, d_direct;
  if (!sc.physio.trace_file.empty()) {
    const TraceFile tf = load_trace_csv(sc.physio.trace_file, scene.slow_rate);
    if (tf.front.size() < n)
      throw IngestError(sc.physio.trace_file + ": trace holds " + std::to_string(tf.front.size()) +
                        " samples but the acquisition needs " + std::to_string(n));
    t.truth = tf.front.slice(0, n);
    const DisplacementTrace side = tf.side ? tf.side->slice(0, n) : t.truth;
    d_ris = ris_is_front ? t.truth : side;
    d_direct = ris_is_front ? side : t.truth;
    if (!tf.side) {
      const RcsModel m = sc.physio.model(1.0);
      t.gain_ris = angle_gain(m, scene.angles.incidence_ris);
      t.gain_direct = angle_gain(m, scene.angles.incidence_direct);
    }
  } else {
    RespirationOptions opt;
    opt.harmonics = sc.physio.harmonics;
    opt.drift = sc.physio.drift_m;
    opt.random_phase = sc.physio.random_phase;
    t.truth = synth_respiration(sc.physio.breathing_hz, sc.physio.peak_to_peak_m, total / scene.slow_rate,
                                scene.slow_rate, opt, derive_seed(seed, stream::kPhysio));
    if (t.truth.size() != n) t.truth = t.truth.slice(0, std::min(n, t.truth.size()));
    const RcsModel m = sc.physio.model(1.0);
    t.gain_ris = angle_gain(m, scene.angles.incidence_ris);
    t.gain_direct = angle_gain(m, scene.angles.incidence_direct);
    d_ris = add_angle_distortion(t.truth, t.gain_ris, sc.physio.distortion_m, derive_seed(seed, 101));
    d_direct = add_angle_distortion(t.truth, t.gain_direct, sc.physio.distortion_m, derive_seed(seed, 102));
  }
  t.rcs_ris = rcs_series(sc.physio.q_ris, t.gain_ris, d_ris, scene.lambda);
  t.rcs_direct = rcs_series(sc.physio.q_direct, t.gain_direct, d_direct, scene.lambda);
  return t;
}

// ---------------------------------------------------------------------------
// Acquisition

/// Slow-time record for precoders `w[l]`: per slot, x = H_l·w[l] is sent
/// through the fast-time pulse, white noise at `noise_w` per fast-time
/// sample is added and each antenna is matched-filtered.
inline SlowTimeRecord simulate_acquisition(const Scene& scene, const ChannelRealization& ch, const CVector& rcs_ris,
                                           const CVector& rcs_direct, const std::vector<Precoder>& w,
                                           double noise_w, Rng& noise_rng) {
  ch.validate();
  const auto len = static_cast<Eigen::Index>(w.size());
  if (rcs_ris.size() < len || rcs_direct.size() < len) throw ShapeMismatch("RCS series shorter than the schedule");
  const int m_count = scene.array.element_count;
  const CVector& s = scene.waveform.samples;
  const auto k_fast = s.size();
  const CVector v = ch.cascade();

  SlowTimeRecord rec;
  rec.slow_rate = scene.slow_rate;
  rec.data.resize(m_count, len);
  CMatrix fast(m_count, k_fast);
  for (Eigen::Index l = 0; l < len; ++l) {
    const CVector& wl = w[static_cast<std::size_t>(l)].w;
    if (wl.size() != m_count) throw ShapeMismatch("precoder length does not match the array");
    const CVector x = rcs_ris(l) * v.cwiseProduct(wl).sum() * v +
                      rcs_direct(l) * ch.direct.cwiseProduct(wl).sum() * ch.direct + ch.clutter * wl;
    fast.noalias() = x * s.transpose();
    if (noise_w > 0.0)
      for (Eigen::Index k = 0; k < k_fast; ++k)
        for (int m = 0; m < m_count; ++m) fast(m, k) += complex_normal(noise_rng, noise_w);
    for (int m = 0; m < m_count; ++m) rec.data(m, l) = matched_filter(fast.row(m).transpose(), s);
  }
  return rec;
}

/// Convenience form: scene, channels and traces from the scenario and `seed`.
inline SlowTimeRecord simulate_acquisition(const Scenario& sc, const Schedule& schedule, std::uint64_t seed) {
  const Scene scene = build_scene(sc);
  const ChannelRealization ch = draw_channels(sc, scene, seed);
  const PathTraces tr = make_traces(sc, scene, seed, schedule.length());
  Rng noise(derive_seed(seed, stream::kNoise));
  return simulate_acquisition(scene, ch, tr.rcs_ris, tr.rcs_direct, schedule.precoders,
                              sc.noise ? scene.noise_w : 0.0, noise);
}

/// Receive weight for a path: the conjugated full-power single-path beam.
inline CVector receive_weights(const PathSteering& a, PathId path, double p_total) {
  return single_path_precoder(a, path, p_total).w.conjugate();
}

struct PathEstimates {
  std::optional<VitalSignEstimate> direct;
  std::optional<VitalSignEstimate> ris;
};

inline PathEstimates extract_paths(const SlowTimeRecord& rec, const Schedule& schedule, const PathSteering& a,
                                   double p_total, double lambda, const ExtractionSettings& cfg) {
  PathEstimates e;
  e.direct = extract_vital_sign(rec, schedule.direct_slots, receive_weights(a, PathId::Direct, p_total),
                                PathId::Direct, lambda, cfg);
  e.ris = extract_vital_sign(rec, schedule.ris_slots, receive_weights(a, PathId::Ris, p_total), PathId::Ris,
                             lambda, cfg);
  return e;
}

struct RunResult {
  std::optional<VitalSignEstimate> direct;
  std::optional<VitalSignEstimate> ris;
  SlowTimeRecord record;
  Schedule schedule;
  DisplacementTrace truth;
  std::uint64_t seed = 0;

  const std::optional<VitalSignEstimate>& path(PathId p) const { return p == PathId::Direct ? direct : ris; }
};

inline RunResult run_acquisition(const Scenario& sc, const StrategyKind& kind, std::uint64_t seed) {
  const Scene scene = build_scene(sc);
  const ChannelRealization ch = draw_channels(sc, scene, seed);
  const PathTraces tr = make_traces(sc, scene, seed, scene.length);
  RunResult r;
  r.seed = seed;
  r.truth = tr.truth;
  r.schedule = plan_transmissions(kind, scene.length, scene.steering, sc.radar.power_w);
  Rng noise(derive_seed(seed, stream::kNoise));
  r.record = simulate_acquisition(scene, ch, tr.rcs_ris, tr.rcs_direct, r.schedule.precoders,
                                  sc.noise ? scene.noise_w : 0.0, noise);
  PathEstimates e = extract_paths(r.record, r.schedule, scene.steering, sc.radar.power_w, scene.lambda,
                                  sc.processing);
  r.direct = std::move(e.direct);
  r.ris = std::move(e.ris);
  return r;
}

inline RunResult run_acquisition(const Scenario& sc, std::uint64_t seed) { return run_acquisition(sc, sc.strategy, seed); }

// ---------------------------------------------------------------------------
// Resource-allocation sweep

struct SweepRow {
  double gamma = 0.0;
  PathId path = PathId::Direct;
  std::uint64_t seed = 0;
  double peak_freq = 0.0;  // NaN when the path received no slots
  double prominence_db = 0.0;
};

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. The first exception
/// is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(workers, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard lock(err_mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (err) std::rethrow_exception(err);
}

/// Per-path dominant peak and prominence for every (γ, seed). Rows are
/// ordered by γ, then seed, then path (RIS first); the order does not
/// depend on `jobs`.
inline std::vector<SweepRow> gamma_sweep(const Scenario& sc, StrategyMode mode, const std::vector<double>& grid,
                                         const std::vector<std::uint64_t>& seeds, int jobs = 1) {
  if (grid.empty()) throw InvalidArgument("gamma grid is empty");
  if (seeds.empty()) throw InvalidArgument("seed list is empty");
  if (mode == StrategyMode::Opportunistic) throw InvalidArgument("sweeps support spatial or temporal separation only");
  for (double g : grid)
    if (!(g >= 0.0 && g <= 1.0)) throw InvalidArgument("gamma grid values must lie in [0, 1]");

  const Scene scene = build_scene(sc);
  std::vector<SweepRow> rows(grid.size() * seeds.size() * 2);
  parallel_for(grid.size() * seeds.size(), jobs, [&](std::size_t idx) {
    const double g = grid[idx / seeds.size()];
    const std::uint64_t seed = seeds[idx % seeds.size()];
    const ChannelRealization ch = draw_channels(sc, scene, seed);
    const PathTraces tr = make_traces(sc, scene, seed, scene.length);
    StrategyKind kind = sc.strategy;
    kind.mode = mode;
    kind.gamma = g;
    const Schedule sched = plan_transmissions(kind, scene.length, scene.steering, sc.radar.power_w);
    Rng noise(derive_seed(seed, stream::kNoise));
    const SlowTimeRecord rec = simulate_acquisition(scene, ch, tr.rcs_ris, tr.rcs_direct, sched.precoders,
                                                    sc.noise ? scene.noise_w : 0.0, noise);
    const PathEstimates e = extract_paths(rec, sched, scene.steering, sc.radar.power_w, scene.lambda, sc.processing);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto fill = [&](SweepRow& row, PathId p, const std::optional<VitalSignEstimate>& est) {
      row = {g, p, seed, est ? est->peak_freq : nan, est ? est->prominence_db : nan};
    };
    fill(rows[2 * idx], PathId::Ris, e.ris);
    fill(rows[2 * idx + 1], PathId::Direct, e.direct);
  });
  return rows;
}

/// Padded-bin lock tolerance used for peak-lock statistics.
inline double lock_tolerance(const Scenario& sc) {
  return sc.radar.slow_rate() / (static_cast<double>(sc.processing.zero_pad) * sc.length());
}

inline bool peak_locked(double peak_freq, double truth, double tol) {
  return std::isfinite(peak_freq) && std::abs(peak_freq - truth) <= tol + 1e-12;
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> v;
  for (int i = 0; i < count; ++i) v.push_back(first + static_cast<std::uint64_t>(i));
  return v;
}

}  // namespace risvs
