#pragma once

#include "risvs/closed_loop.hpp"
#include "risvs/config.hpp"
#include "risvs/scenario.hpp"
#include "risvs/sigproc.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace risvs {

inline constexpr char kDisplacementHeader[] = "time_s,displacement_m";
inline constexpr char kSpectrumHeader[] = "freq_Hz,power";
inline constexpr char kSweepHeader[] = "gamma,path,seed,peak_freq_Hz,prominence_db";

/// Round-trip decimal, with "nan" for missing values.
inline std::string csv_number(double v) { return std::isfinite(v) ? exact_number(v) : std::string("nan"); }

/// Displacement samples; `slots` gives each sample's slow-time index.
inline void write_displacement_csv(std::ostream& out, const DisplacementTrace& d, const std::vector<int>& slots) {
  if (!slots.empty() && slots.size() != d.size()) throw ShapeMismatch("slot list does not match the trace");
  out << kDisplacementHeader << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double l = slots.empty() ? static_cast<double>(i) : static_cast<double>(slots[i]);
    out << csv_number(l / d.slow_rate) << ',' << csv_number(d.samples[i]) << '\n';
  }
}

inline void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
  out << kSpectrumHeader << '\n';
  for (std::size_t k = 0; k < s.freq.size(); ++k) out << csv_number(s.freq[k]) << ',' << csv_number(s.power[k]) << '\n';
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const SweepRow& r : rows)
    out << csv_number(r.gamma) << ',' << path_name(r.path) << ',' << r.seed << ',' << csv_number(r.peak_freq) << ','
        << csv_number(r.prominence_db) << '\n';
}

inline Json window_log_entry(const WindowOutcome& w, StrategyMode mode) {
  Json j;
  j["window"] = w.window;
  j["strategy"] = mode_name(mode);
  j["gamma"] = w.gamma;
  j["active_path"] = w.active ? Json(path_name(*w.active)) : Json(nullptr);
  auto path = [](const std::optional<VitalSignEstimate>& e) {
    return e ? Json{{"peak_freq_Hz", e->peak_freq}, {"prominence_db", e->prominence_db}}
             : Json{{"peak_freq_Hz", nullptr}, {"prominence_db", nullptr}};
  };
  j["direct"] = path(w.direct);
  j["ris"] = path(w.ris);
  j["next_gamma"] = w.state.gamma_ris;
  j["next_active_path"] = w.state.active ? Json(path_name(*w.state.active)) : Json(nullptr);
  j["theta_direct_deg"] = rad2deg(w.theta_direct_est);
  j["reestimate_position"] = w.state.reestimate_position;
  return j;
}

inline void write_loop_log(std::ostream& out, const std::vector<WindowOutcome>& windows, StrategyMode mode) {
  for (const auto& w : windows) out << window_log_entry(w, mode).dump() << '\n';
}

struct RunMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string command;
};

/// Writes `path` through `body` and a `<path>.meta.json` sidecar next to it.
template <class Body>
void write_with_sidecar(const std::filesystem::path& path, const RunMeta& meta, Body&& body) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    body(out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
  }
  std::filesystem::path side = path;
  side += ".meta.json";
  std::ofstream out(side, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + side.string() + "'");
  const Json j = {{"file", path.filename().string()},
                  {"command", meta.command},
                  {"seed", meta.seed},
                  {"config_hash", meta.config_hash},
                  {"version", kVersion}};
  out << j.dump(2) << '\n';
}

}  // namespace risvs
