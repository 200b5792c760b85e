#pragma once

#include "risvs/scenario.hpp"
#include "risvs/strategy.hpp"

#include <optional>
#include <vector>

namespace risvs {

struct PositionEstimate {
  double theta_direct = 0.0;
  std::vector<double> doa;  // all root-MUSIC angles, ascending
  Vec3 target;              // range and height taken from the configured placement
};

/// Target position from one single-element probe window: every slot
/// transmits √P on element 0, the clutter-filtered snapshots go through
/// two-source root-MUSIC, and the angle farther from the RIS is the patient.
inline PositionEstimate estimate_position(const Scenario& sc, const Scene& scene, const ChannelRealization& ch,
                                          const CVector& rcs_ris, const CVector& rcs_direct, Rng& noise_rng) {
  Precoder probe;
  probe.w = CVector::Zero(scene.array.element_count);
  probe.w(0) = std::sqrt(sc.radar.power_w);
  probe.achieved_power = sc.radar.power_w;
  const std::vector<Precoder> sched(static_cast<std::size_t>(scene.length), probe);
  const SlowTimeRecord rec = simulate_acquisition(scene, ch, rcs_ris, rcs_direct, sched,
                                                  sc.noise ? scene.noise_w : 0.0, noise_rng);
  const int w = fit_window(sc.processing.clutter_window > 0 ? sc.processing.clutter_window : 21, rec.length());
  const CMatrix filtered = clutter_filter(rec.data, w);

  PositionEstimate est;
  est.doa = root_music_doa(filtered.conjugate(), 2, scene.array);
  const double theta_ris = scene.angles.theta_ris;
  est.theta_direct = std::abs(est.doa[0] - theta_ris) >= std::abs(est.doa[1] - theta_ris) ? est.doa[0] : est.doa[1];

  const Placement& p = sc.placement;
  const Vec3 rel = p.target_position - p.radar_position;
  const double range = std::hypot(rel.x(), rel.y());
  const Vec3 bore = Vec3(p.radar_boresight.x(), p.radar_boresight.y(), 0.0).normalized();
  const Vec3 left = positive_angle_axis(p);
  est.target = p.radar_position + range * (std::cos(est.theta_direct) * bore + std::sin(est.theta_direct) * left);
  est.target.z() = p.target_position.z();
  return est;
}

struct WindowOutcome {
  int window = 0;
  double gamma = 0.0;                // RIS share used in this window
  std::optional<PathId> active;      // opportunistic path used in this window
  LoopState state;                   // state after evaluation
  std::optional<VitalSignEstimate> direct;
  std::optional<VitalSignEstimate> ris;
  double theta_direct_est = 0.0;
};

/// Path an oracle would pick: the one hitting the chest closest to broadside.
inline PathId geometric_best_path(const Scene& scene) {
  return scene.angles.incidence_ris <= scene.angles.incidence_direct ? PathId::Ris : PathId::Direct;
}

/// Position estimation, RIS focusing and the per-window
/// transmit/receive/evaluate/update cycle. Fading and clutter are held for
/// the whole loop; noise is redrawn each window and chest motion continues
/// across windows.
inline std::vector<WindowOutcome> run_closed_loop(const Scenario& sc, const StrategyKind& kind, int n_windows) {
  if (n_windows < 0) throw InvalidArgument("window count must be non-negative");
  std::vector<WindowOutcome> out;
  if (n_windows == 0) return out;
  kind.validate();

  const std::uint64_t seed = sc.seed;
  Scene scene = build_scene(sc);
  ChannelRealization ch = draw_channels(sc, scene, seed);
  const int len = scene.length;
  const PathTraces tr = make_traces(sc, scene, seed, len * (n_windows + 1));
  const std::uint64_t noise_base = derive_seed(seed, stream::kNoise);
  const std::uint64_t probe_base = derive_seed(seed, stream::kProbeNoise);

  LoopState state;
  state.mode = kind.mode;
  state.gamma_ris = kind.gamma;
  if (kind.mode == StrategyMode::Opportunistic && kind.ideal) state.active = geometric_best_path(scene);

  // Probe slots precede the first sensing window.
  auto locate = [&](int attempt) {
    Rng probe_noise(derive_seed(probe_base, static_cast<std::uint64_t>(attempt)));
    const PositionEstimate pos = estimate_position(sc, scene, ch, tr.rcs_ris.head(len), tr.rcs_direct.head(len),
                                                   probe_noise);
    scene = build_scene(sc, pos.target, pos.theta_direct);
    ch.ris_diag = reflection_diagonal(scene.ris.phases);
    state.theta_direct_est = pos.theta_direct;
    ++state.ris_profile_version;
  };
  locate(0);

  for (int win = 0; win < n_windows; ++win) {
    StrategyKind plan = kind;
    plan.gamma = state.gamma_ris;
    if (kind.mode == StrategyMode::Opportunistic) {
      if (state.active) {
        plan.active = *state.active;
      } else {
        plan.mode = StrategyMode::Spatial;  // equal-weight probe window
        plan.gamma = 0.5;
      }
    }
    const Schedule sched = plan_transmissions(plan, len, scene.steering, sc.radar.power_w);
    const auto offset = static_cast<Eigen::Index>(len) * (win + 1);
    Rng noise(derive_seed(noise_base, static_cast<std::uint64_t>(win)));
    const SlowTimeRecord rec =
        simulate_acquisition(scene, ch, tr.rcs_ris.segment(offset, len), tr.rcs_direct.segment(offset, len),
                             sched.precoders, sc.noise ? scene.noise_w : 0.0, noise);
    PathEstimates est = extract_paths(rec, sched, scene.steering, sc.radar.power_w, scene.lambda, sc.processing);

    WindowOutcome w;
    w.window = win;
    w.gamma = sched.gamma;
    w.active = kind.mode == StrategyMode::Opportunistic ? state.active : std::nullopt;
    w.theta_direct_est = state.theta_direct_est;
    state = evaluate_and_update(state, kind, est.direct, est.ris);
    w.state = state;
    w.direct = std::move(est.direct);
    w.ris = std::move(est.ris);
    out.push_back(std::move(w));

    if (state.reestimate_position && win + 1 < n_windows) locate(win + 1);
  }
  return out;
}

}  // namespace risvs
