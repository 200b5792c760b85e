#pragma once

#include "risvs/beamform.hpp"
#include "risvs/common.hpp"
#include "risvs/sigproc.hpp"

#include <optional>
#include <string>
#include <vector>

namespace risvs {

enum class StrategyMode { Temporal, Spatial, Opportunistic };

inline const char* mode_name(StrategyMode m) {
  switch (m) {
    case StrategyMode::Temporal: return "temporal";
    case StrategyMode::Spatial: return "spatial";
    case StrategyMode::Opportunistic: return "opportunistic";
  }
  return "?";
}

inline StrategyMode parse_mode(const std::string& s) {
  if (s == "temporal") return StrategyMode::Temporal;
  if (s == "spatial") return StrategyMode::Spatial;
  if (s == "opportunistic") return StrategyMode::Opportunistic;
  throw InvalidArgument("unknown strategy '" + s + "' (expected temporal, spatial or opportunistic)");
}

/// Strategy plus its tuning knobs. `gamma` is always the RIS share: the
/// amplitude share of the RIS constraint (spatial) or the fraction of slots
/// given to the RIS beam (temporal).
struct StrategyKind {
  StrategyMode mode = StrategyMode::Spatial;
  double gamma = 0.5;
  PathId active = PathId::Ris;  // opportunistic selection
  bool ideal = false;           // opportunistic: path fixed to the geometric best
  double threshold_db = 11.0;
  double step = 0.1;
  int hysteresis = 2;
  double gamma_min = 0.05;
  double gamma_max = 0.95;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
    if (!(step > 0.0)) throw InvalidArgument("adaptation step must be positive");
    if (hysteresis < 1) throw InvalidArgument("hysteresis must be at least one window");
    if (!(gamma_min >= 0.0 && gamma_min < gamma_max && gamma_max <= 1.0))
      throw InvalidArgument("adaptive gamma bounds must satisfy 0 <= min < max <= 1");
  }
};

/// Per-slot transmit precoders and, per path, the slots whose echoes that path
/// is evaluated on.
struct Schedule {
  StrategyMode mode = StrategyMode::Spatial;
  double gamma = 0.5;
  std::vector<Precoder> precoders;
  std::vector<int> direct_slots;
  std::vector<int> ris_slots;

  int length() const { return static_cast<int>(precoders.size()); }
  const std::vector<int>& slots(PathId p) const { return p == PathId::Direct ? direct_slots : ris_slots; }
};

namespace detail {

inline std::vector<int> all_slots(int len) {
  std::vector<int> v(static_cast<std::size_t>(len));
  for (int l = 0; l < len; ++l) v[static_cast<std::size_t>(l)] = l;
  return v;
}

}  // namespace detail

inline Schedule plan_transmissions(const StrategyKind& kind, int length, const PathSteering& a, double p_total) {
  kind.validate();
  if (length < 1) throw InvalidArgument("schedule length must be positive");
  Schedule s;
  s.mode = kind.mode;
  switch (kind.mode) {
    case StrategyMode::Spatial: {
      s.gamma = kind.gamma;
      const Precoder w = split_precoder(a.ris, a.direct, kind.gamma, p_total);
      s.precoders.assign(static_cast<std::size_t>(length), w);
      s.direct_slots = s.ris_slots = detail::all_slots(length);
      break;
    }
    case StrategyMode::Opportunistic: {
      s.gamma = kind.active == PathId::Ris ? 1.0 : 0.0;
      s.precoders.assign(static_cast<std::size_t>(length), single_path_precoder(a, kind.active, p_total));
      s.direct_slots = s.ris_slots = detail::all_slots(length);
      break;
    }
    case StrategyMode::Temporal: {
      s.gamma = kind.gamma;
      const SlotSets sets = SlotSets::contiguous(length, kind.gamma);
      const Precoder wd = single_path_precoder(a, PathId::Direct, p_total);
      const Precoder wr = single_path_precoder(a, PathId::Ris, p_total);
      s.precoders.reserve(static_cast<std::size_t>(length));
      for (int l = 0; l < length; ++l) s.precoders.push_back(sets.ris.count(l) ? wr : wd);
      s.direct_slots.assign(sets.direct.begin(), sets.direct.end());
      s.ris_slots.assign(sets.ris.begin(), sets.ris.end());
      break;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation and reconfiguration

struct LoopState {
  StrategyMode mode = StrategyMode::Spatial;
  double gamma_ris = 0.5;
  std::optional<PathId> active;  // opportunistic; empty during the initial probe window
  int below_count = 0;
  double last_prom_direct = 0.0;
  double last_prom_ris = 0.0;
  double theta_direct_est = 0.0;
  int ris_profile_version = 0;
  bool reestimate_position = false;
  int switches = 0;
};

inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

inline LoopState evaluate_and_update(const LoopState& state, const StrategyKind& kind, double prom_direct,
                                     double prom_ris) {
  LoopState next = state;
  next.last_prom_direct = prom_direct;
  next.last_prom_ris = prom_ris;
  next.reestimate_position = prom_direct < kind.threshold_db && prom_ris < kind.threshold_db;

  switch (state.mode) {
    case StrategyMode::Spatial:
    case StrategyMode::Temporal: {
      const double g = state.gamma_ris + kind.step * sign_of(prom_ris - prom_direct);
      next.gamma_ris = std::clamp(g, kind.gamma_min, kind.gamma_max);
      break;
    }
    case StrategyMode::Opportunistic: {
      if (!state.active) {
        next.active = prom_ris >= prom_direct ? PathId::Ris : PathId::Direct;
        next.below_count = 0;
        break;
      }
      if (kind.ideal) break;
      const double active_prom = *state.active == PathId::Ris ? prom_ris : prom_direct;
      if (active_prom < kind.threshold_db) {
        next.below_count = state.below_count + 1;
        if (next.below_count >= kind.hysteresis) {
          next.active = *state.active == PathId::Ris ? PathId::Direct : PathId::Ris;
          next.below_count = 0;
          ++next.switches;
        }
      } else {
        next.below_count = 0;
      }
      break;
    }
  }
  next.gamma_ris = state.mode == StrategyMode::Opportunistic
                       ? (next.active ? (*next.active == PathId::Ris ? 1.0 : 0.0) : 0.5)
                       : next.gamma_ris;
  return next;
}

inline LoopState evaluate_and_update(const LoopState& state, const StrategyKind& kind,
                                     const std::optional<VitalSignEstimate>& est_direct,
                                     const std::optional<VitalSignEstimate>& est_ris) {
  return evaluate_and_update(state, kind, est_direct ? est_direct->prominence_db : 0.0,
                             est_ris ? est_ris->prominence_db : 0.0);
}

}  // namespace risvs
