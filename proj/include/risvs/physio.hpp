#pragma once

#include "risvs/common.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace risvs {

struct DisplacementTrace {
  std::vector<double> samples;  // m
  double slow_rate = 0.0;       // Hz
  std::string label;

  std::size_t size() const { return samples.size(); }

  void validate() const {
    if (samples.size() < 2) throw InvalidArgument("displacement trace needs at least two samples");
    if (!(slow_rate > 0.0)) throw InvalidArgument("slow-time rate must be positive");
    for (double d : samples)
      if (!std::isfinite(d)) throw InvalidArgument("displacement trace contains non-finite samples");
  }

  /// Samples [first, first + count).
  DisplacementTrace slice(std::size_t first, std::size_t count) const {
    if (first + count > samples.size()) throw InvalidArgument("trace slice exceeds trace length");
    DisplacementTrace t{{samples.begin() + static_cast<std::ptrdiff_t>(first),
                         samples.begin() + static_cast<std::ptrdiff_t>(first + count)},
                        slow_rate, label};
    return t;
  }
};

struct RespirationOptions {
  int harmonics = 0;
  double harmonic_level = 0.05;  // relative to the fundamental, capped at 0.1
  double drift = 0.0;            // m, linear drift over the whole trace
  bool random_phase = false;
};

/// Synthetic chest displacement: (pp/2)·sin(2π f_b l / rate + φ0) plus optional
/// harmonics and drift. φ0 and harmonic phases come from the seed.
inline DisplacementTrace synth_respiration(double breathing_hz, double peak_to_peak, double duration_s,
                                           double slow_rate, const RespirationOptions& opt, std::uint64_t seed) {
  if (!(slow_rate > 0.0)) throw InvalidArgument("slow-time rate must be positive");
  if (!(breathing_hz > 0.0 && breathing_hz < slow_rate / 2.0))
    throw InvalidArgument("breathing rate violates slow-time Nyquist (0 < f_b < rate/2)");
  if (!(peak_to_peak >= 0.0)) throw InvalidArgument("peak-to-peak displacement must be non-negative");
  if (opt.harmonics < 0) throw InvalidArgument("harmonic count must be non-negative");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * slow_rate));
  if (n < 2) throw InvalidArgument("trace duration yields fewer than two samples");

  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  const double phase0 = opt.random_phase ? uni(rng) : 0.0;
  const double level = std::min(std::abs(opt.harmonic_level), 0.1);
  std::vector<std::pair<int, double>> harmonics;
  for (int h = 2; h < 2 + opt.harmonics; ++h) {
    if (h * breathing_hz >= slow_rate / 2.0) break;
    harmonics.emplace_back(h, uni(rng));
  }

  DisplacementTrace t;
  t.slow_rate = slow_rate;
  t.label = "synthetic";
  t.samples.resize(n);
  const double amp = peak_to_peak / 2.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double arg = kTwoPi * breathing_hz * static_cast<double>(l) / slow_rate;
    double d = amp * std::sin(arg + phase0);
    for (const auto& [h, ph] : harmonics) d += level * amp * std::sin(h * arg + ph);
    d += opt.drift * static_cast<double>(l) / static_cast<double>(n - 1);
    t.samples[l] = d;
  }
  return t;
}

inline DisplacementTrace synth_respiration(double breathing_hz, double peak_to_peak, double duration_s,
                                           double slow_rate, int harmonics, std::uint64_t seed) {
  RespirationOptions opt;
  opt.harmonics = harmonics;
  return synth_respiration(breathing_hz, peak_to_peak, duration_s, slow_rate, opt, seed);
}

// ---------------------------------------------------------------------------
// Angle-dependent RCS

enum class AngleGainKind { Parametric, Table };

struct RcsModel {
  double reflectivity = 1.0;
  AngleGainKind kind = AngleGainKind::Parametric;
  double exponent = 0.0;                            // cos^p
  std::vector<std::pair<double, double>> table;     // (rad, gain), ascending angles

  /// Exponent p such that cos^p(reference_angle) = reference_gain.
  static double exponent_for(double reference_angle, double reference_gain) {
    if (!(reference_angle > 0.0 && reference_angle < kPi / 2.0))
      throw InvalidArgument("reference angle must lie in (0, 90°)");
    if (!(reference_gain > 0.0 && reference_gain < 1.0)) throw InvalidArgument("reference gain must lie in (0, 1)");
    return std::log(reference_gain) / std::log(std::cos(reference_angle));
  }

  static RcsModel parametric(double reflectivity, double reference_angle = deg2rad(78.75),
                             double reference_gain = 0.1) {
    RcsModel m;
    m.reflectivity = reflectivity;
    m.kind = AngleGainKind::Parametric;
    m.exponent = exponent_for(reference_angle, reference_gain);
    m.validate();
    return m;
  }

  static RcsModel measured(double reflectivity, std::vector<std::pair<double, double>> points) {
    RcsModel m;
    m.reflectivity = reflectivity;
    m.kind = AngleGainKind::Table;
    m.table = std::move(points);
    std::sort(m.table.begin(), m.table.end());
    m.validate();
    return m;
  }

  void validate() const {
    if (!(reflectivity >= 0.0)) throw InvalidArgument("reflectivity must be non-negative");
    if (kind == AngleGainKind::Parametric) {
      if (!(exponent > 0.0)) throw InvalidArgument("angle-gain exponent must be positive");
      return;
    }
    if (table.size() < 2) throw InvalidArgument("measured angle-gain table needs two or more points");
    if (std::abs(table.front().first) > 1e-12 || std::abs(table.front().second - 1.0) > 1e-12)
      throw InvalidArgument("measured angle-gain table must start at (0°, 1)");
    if (std::abs(table.back().first - kPi / 2.0) > 1e-9 || table.back().second > 0.05)
      throw InvalidArgument("measured angle-gain table must end at 90° with gain <= 0.05");
    for (std::size_t i = 1; i < table.size(); ++i) {
      if (!(table[i].first > table[i - 1].first)) throw InvalidArgument("table angles must be strictly increasing");
      if (table[i].second > table[i - 1].second) throw InvalidArgument("table gains must be non-increasing");
      if (table[i].second < 0.0) throw InvalidArgument("table gains must be non-negative");
    }
  }
};

inline double angle_gain(const RcsModel& model, double incidence) {
  if (!(incidence >= -1e-12 && incidence <= kPi / 2.0 + 1e-12))
    throw InvalidArgument("incidence angle must lie in [0, 90°]");
  incidence = std::clamp(incidence, 0.0, kPi / 2.0);
  if (model.kind == AngleGainKind::Parametric) return std::pow(std::cos(incidence), model.exponent);
  const auto& t = model.table;
  auto hi = std::lower_bound(t.begin(), t.end(), incidence,
                             [](const std::pair<double, double>& p, double a) { return p.first < a; });
  if (hi == t.begin()) return hi->second;
  if (hi == t.end()) return t.back().second;
  const auto lo = hi - 1;
  const double f = (incidence - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

/// Per-sample complex RCS q·exp(j·(4π/λ0)·g(θ)·d[l]); the round-trip phase
/// convention matches phase_demodulate.
inline CVector rcs_series(double reflectivity, double gain, const DisplacementTrace& trace, double lambda) {
  trace.validate();
  CVector out(static_cast<Eigen::Index>(trace.size()));
  const double k = 4.0 * kPi / lambda * gain;
  for (std::size_t l = 0; l < trace.size(); ++l)
    out(static_cast<Eigen::Index>(l)) = std::polar(reflectivity, k * trace.samples[l]);
  return out;
}

inline CVector rcs_series(const RcsModel& model, const DisplacementTrace& trace, double incidence, double lambda) {
  model.validate();
  return rcs_series(model.reflectivity, angle_gain(model, incidence), trace, lambda);
}

/// Adds band-limited jitter whose strength grows with the angular loss (1 - gain),
/// mimicking the distorted large-angle traces seen in measurements.
inline DisplacementTrace add_angle_distortion(const DisplacementTrace& trace, double gain, double level,
                                              std::uint64_t seed, int smoothing = 9) {
  DisplacementTrace out = trace;
  if (level <= 0.0 || gain >= 1.0) return out;
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> white(trace.size());
  for (double& v : white) v = n(rng);
  const double scale = level * (1.0 - gain);
  const int half = smoothing / 2;
  for (std::size_t l = 0; l < trace.size(); ++l) {
    double acc = 0.0;
    int cnt = 0;
    for (int k = -half; k <= half; ++k) {
      const auto idx = static_cast<std::ptrdiff_t>(l) + k;
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(trace.size())) continue;
      acc += white[static_cast<std::size_t>(idx)];
      ++cnt;
    }
    out.samples[l] += scale * acc / std::sqrt(static_cast<double>(cnt));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace CSV: index,front_radar_VS[,side_radar_VS], displacement in cm.

inline constexpr char kTraceHeaderTwo[] = "index,front_radar_VS,side_radar_VS";
inline constexpr char kTraceHeaderOne[] = "index,front_radar_VS";

struct TraceFile {
  DisplacementTrace front;
  std::optional<DisplacementTrace> side;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& cell, std::size_t row, const std::string& path) {
  const std::string t = trim(cell);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(v))
    throw IngestError(path + ": row " + std::to_string(row) + ": non-numeric value '" + t + "'");
  return v;
}

}  // namespace detail

inline TraceFile read_trace_csv(std::istream& in, double slow_rate, const std::string& path = "<stream>") {
  std::string header;
  if (!std::getline(in, header)) throw IngestError(path + ": empty file");
  header = detail::trim(header);
  bool two_columns = false;
  if (header == kTraceHeaderTwo) {
    two_columns = true;
  } else if (header != kTraceHeaderOne) {
    throw IngestError(path + ": missing columns; expected header '" + std::string(kTraceHeaderTwo) + "'");
  }
  TraceFile tf;
  tf.front.slow_rate = slow_rate;
  tf.front.label = "front_radar_VS";
  DisplacementTrace side{{}, slow_rate, "side_radar_VS"};
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    const std::size_t want = two_columns ? 3 : 2;
    if (cells.size() != want)
      throw IngestError(path + ": row " + std::to_string(row) + ": expected " + std::to_string(want) + " columns");
    detail::parse_number(cells[0], row, path);
    tf.front.samples.push_back(detail::parse_number(cells[1], row, path) / 100.0);
    if (two_columns) side.samples.push_back(detail::parse_number(cells[2], row, path) / 100.0);
  }
  if (tf.front.samples.empty()) throw IngestError(path + ": no samples");
  tf.front.validate();
  if (two_columns) {
    side.validate();
    tf.side = std::move(side);
  }
  return tf;
}

inline TraceFile load_trace_csv(const std::string& path, double slow_rate) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open trace file '" + path + "'");
  return read_trace_csv(in, slow_rate, path);
}

inline void write_trace_csv(std::ostream& out, const DisplacementTrace& front, const DisplacementTrace* side = nullptr) {
  if (side && side->size() != front.size()) throw ShapeMismatch("front and side traces differ in length");
  out << (side ? kTraceHeaderTwo : kTraceHeaderOne) << '\n';
  out << std::setprecision(17);
  for (std::size_t l = 0; l < front.size(); ++l) {
    out << l << ',' << front.samples[l] * 100.0;
    if (side) out << ',' << side->samples[l] * 100.0;
    out << '\n';
  }
}

inline void write_trace_csv(const std::string& path, const DisplacementTrace& front,
                            const DisplacementTrace* side = nullptr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write trace file '" + path + "'");
  write_trace_csv(out, front, side);
}

/// Angle gain implied by a measured pair: RMS of the angled trace over RMS of the
/// front reference (both mean-removed).
inline double gain_from_traces(const DisplacementTrace& front, const DisplacementTrace& side) {
  if (front.size() != side.size()) throw ShapeMismatch("front and side traces differ in length");
  auto rms = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
  };
  const double f = rms(front.samples);
  if (f <= 0.0) throw InvalidArgument("front reference trace is constant");
  return std::min(1.0, rms(side.samples) / f);
}

}  // namespace risvs
