#pragma once

#include "risvs/common.hpp"
#include "risvs/scenario.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>

namespace risvs {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Unit-suffixed quantities

enum class Quantity { Frequency, Time, Power, Decibel, Length, Angle };

inline const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::Frequency: return "frequency (Hz, kHz, MHz, GHz)";
    case Quantity::Time: return "time (s, ms, us)";
    case Quantity::Power: return "power (W, mW, dBm)";
    case Quantity::Decibel: return "level (dB)";
    case Quantity::Length: return "length (m, cm, mm)";
    case Quantity::Angle: return "angle (deg, rad)";
  }
  return "?";
}

/// Parses "<number> <unit>" into SI base units (Hz, s, W, dB, m, rad).
/// Anything else, including bare numbers, is rejected.
inline double parse_quantity(const std::string& text, Quantity q, const std::string& key) {
  static const std::regex re(R"(^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re))
    throw ConfigError(key + ": expected '<number> <unit>' for a " + quantity_name(q) + ", got '" + text + "'");
  const double v = std::stod(m[1].str());
  const std::string u = m[2].str();
  auto bad = [&]() -> double {
    throw ConfigError(key + ": unit '" + u + "' is not a " + quantity_name(q));
  };
  switch (q) {
    case Quantity::Frequency:
      if (u == "Hz") return v;
      if (u == "kHz") return v * 1e3;
      if (u == "MHz") return v * 1e6;
      if (u == "GHz") return v * 1e9;
      return bad();
    case Quantity::Time:
      if (u == "s") return v;
      if (u == "ms") return v * 1e-3;
      if (u == "us") return v * 1e-6;
      return bad();
    case Quantity::Power:
      if (u == "W") return v;
      if (u == "mW") return v * 1e-3;
      if (u == "dBm") return dbm2watt(v);
      return bad();
    case Quantity::Decibel:
      if (u == "dB") return v;
      return bad();
    case Quantity::Length:
      if (u == "m") return v;
      if (u == "cm") return v * 1e-2;
      if (u == "mm") return v * 1e-3;
      return bad();
    case Quantity::Angle:
      if (u == "rad") return v;
      if (u == "deg") return deg2rad(v);
      return bad();
  }
  return bad();
}

/// Shortest decimal that parses back to exactly `v`.
inline std::string exact_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string with_unit(double v, const char* unit) { return exact_number(v) + " " + unit; }

// ---------------------------------------------------------------------------
// Strict section reader

namespace detail {

class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~Section() = default;
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string key(const std::string& k) const { return path_ + "." + k; }

  const Json& at(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  void quantity(const std::string& k, Quantity q, double& out) {
    if (!has(k)) return;
    const Json& v = at(k);
    if (!v.is_string()) throw ConfigError(key(k) + ": expected a string with a unit, e.g. \"" + example(q) + "\"");
    out = parse_quantity(v.get<std::string>(), q, key(k));
  }

  /// Length that may also be given in wavelengths ("0.5 lambda"); stored in wavelengths.
  void length_wl(const std::string& k, double lambda, double& out_wl) {
    if (!has(k)) return;
    const Json& v = at(k);
    if (!v.is_string()) throw ConfigError(key(k) + ": expected a string such as \"0.5 lambda\" or \"2.1 cm\"");
    const std::string s = v.get<std::string>();
    static const std::regex re(R"(^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*lambda\s*$)");
    std::smatch m;
    if (std::regex_match(s, m, re)) {
      out_wl = std::stod(m[1].str());
      return;
    }
    out_wl = parse_quantity(s, Quantity::Length, key(k)) / lambda;
  }

  template <class T>
  void plain(const std::string& k, T& out) {
    if (!has(k)) return;
    const Json& v = at(k);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(key(k) + ": expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(key(k) + ": expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(key(k) + ": expected a number");
      } else {
        if (!v.is_string()) throw ConfigError(key(k) + ": expected a string");
      }
      out = v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(key(k) + ": " + e.what());
    }
  }

  void vec3(const std::string& k, Vec3& out) {
    if (!has(k)) return;
    const Json& v = at(k);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
      throw ConfigError(key(k) + ": expected an array of three numbers");
    out = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(key(item.key()) + ": unknown key");
  }

  const Json& json() const { return j_; }

 private:
  static std::string example(Quantity q) {
    switch (q) {
      case Quantity::Frequency: return "7.15 GHz";
      case Quantity::Time: return "250 ms";
      case Quantity::Power: return "10 mW";
      case Quantity::Decibel: return "10 dB";
      case Quantity::Length: return "2 cm";
      case Quantity::Angle: return "78.75 deg";
    }
    return "";
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario ↔ JSON

inline Scenario scenario_from_json(const Json& root) {
  Scenario sc;
  detail::Section top(root, "config");
  static const std::set<std::string> sections{"radar", "ris", "placement", "channel", "physiology",
                                              "processing", "acquisition", "strategy", "sweep", "loop"};
  for (const auto& item : root.items())
    if (!sections.count(item.key())) throw ConfigError("config." + item.key() + ": unknown section");

  if (top.has("radar")) {
    detail::Section s(top.at("radar"), "radar");
    s.plain("elements", sc.radar.elements);
    s.quantity("carrier", Quantity::Frequency, sc.radar.carrier_hz);
    s.quantity("bandwidth", Quantity::Frequency, sc.radar.bandwidth_hz);
    s.plain("fast_samples", sc.radar.fast_samples);
    s.quantity("pri", Quantity::Time, sc.radar.pri_s);
    s.quantity("power", Quantity::Power, sc.radar.power_w);
    s.quantity("noise_figure", Quantity::Decibel, sc.radar.noise_figure_db);
    if (!(sc.radar.carrier_hz > 0.0)) throw ConfigError("radar.carrier must be positive");
    s.length_wl("element_spacing", sc.radar.wavelength(), sc.radar.element_spacing_wl);
    s.quantity("pulse_frequency", Quantity::Frequency, sc.radar.pulse_freq_hz);
    s.finish();
  }
  const double lambda = sc.radar.wavelength();

  if (top.has("ris")) {
    detail::Section s(top.at("ris"), "ris");
    s.plain("rows", sc.ris.rows);
    s.plain("cols", sc.ris.cols);
    s.length_wl("element_spacing", lambda, sc.ris.spacing_wl);
    s.plain("phase_bits", sc.ris.phase_bits);
    s.plain("aperture_gain", sc.ris.aperture_gain);
    s.finish();
  }

  if (top.has("placement")) {
    detail::Section s(top.at("placement"), "placement");
    Placement& p = sc.placement;
    s.vec3("radar_m", p.radar_position);
    s.vec3("radar_boresight", p.radar_boresight);
    s.vec3("ris_center_m", p.ris_center);
    s.vec3("ris_normal", p.ris_normal);
    s.vec3("target_m", p.target_position);
    if (s.has("chest_normal") && s.has("chest_facing"))
      throw ConfigError("placement: give either chest_normal or chest_facing, not both");
    if (s.has("chest_facing")) {
      std::string facing;
      s.plain("chest_facing", facing);
      if (facing == "ris") p.chest_normal = p.chest_toward(p.ris_center);
      else if (facing == "radar") p.chest_normal = p.chest_toward(p.radar_position);
      else throw ConfigError("placement.chest_facing: expected \"ris\" or \"radar\", got \"" + facing + "\"");
    } else if (s.has("target_m") || s.has("ris_center_m")) {
      p.chest_normal = p.chest_toward(p.ris_center);
    }
    s.vec3("chest_normal", p.chest_normal);
    s.finish();
  }

  if (top.has("channel")) {
    detail::Section s(top.at("channel"), "channel");
    s.quantity("rician_k", Quantity::Decibel, sc.channel.rician_k_db);
    s.plain("fading", sc.channel.fading);
    s.quantity("clutter_gain", Quantity::Decibel, sc.channel.clutter_gain_db);
    s.plain("clutter", sc.channel.clutter);
    s.finish();
  }

  if (top.has("physiology")) {
    detail::Section s(top.at("physiology"), "physiology");
    PhysioConfig& ph = sc.physio;
    s.quantity("breathing_rate", Quantity::Frequency, ph.breathing_hz);
    s.quantity("peak_to_peak", Quantity::Length, ph.peak_to_peak_m);
    s.plain("harmonics", ph.harmonics);
    s.quantity("drift", Quantity::Length, ph.drift_m);
    s.plain("random_phase", ph.random_phase);
    s.plain("reflectivity_ris", ph.q_ris);
    s.plain("reflectivity_direct", ph.q_direct);
    s.quantity("distortion", Quantity::Length, ph.distortion_m);
    s.plain("trace_file", ph.trace_file);
    if (s.has("angle_gain")) {
      detail::Section g(s.at("angle_gain"), "physiology.angle_gain");
      g.quantity("reference_angle", Quantity::Angle, ph.reference_angle);
      g.plain("reference_gain", ph.reference_gain);
      if (g.has("table")) {
        const Json& t = g.at("table");
        if (!t.is_array()) throw ConfigError("physiology.angle_gain.table: expected an array of [angle, gain] pairs");
        ph.gain_table.clear();
        for (const auto& row : t) {
          if (!row.is_array() || row.size() != 2 || !row[0].is_string() || !row[1].is_number())
            throw ConfigError("physiology.angle_gain.table: each row must be [\"<angle> deg\", gain]");
          ph.gain_table.emplace_back(parse_quantity(row[0].get<std::string>(), Quantity::Angle,
                                                    "physiology.angle_gain.table"),
                                     row[1].get<double>());
        }
      }
      g.finish();
    }
    s.finish();
  }

  if (top.has("processing")) {
    detail::Section s(top.at("processing"), "processing");
    s.plain("clutter_window", sc.processing.clutter_window);
    s.plain("zero_pad", sc.processing.zero_pad);
    s.plain("detrend", sc.processing.detrend);
    s.plain("noise", sc.noise);
    if (s.has("band")) {
      const Json& b = s.at("band");
      if (!b.is_array() || b.size() != 2 || !b[0].is_string() || !b[1].is_string())
        throw ConfigError("processing.band: expected [\"<lo> Hz\", \"<hi> Hz\"]");
      sc.processing.band.lo = parse_quantity(b[0].get<std::string>(), Quantity::Frequency, "processing.band");
      sc.processing.band.hi = parse_quantity(b[1].get<std::string>(), Quantity::Frequency, "processing.band");
    }
    s.finish();
  }

  if (top.has("acquisition")) {
    detail::Section s(top.at("acquisition"), "acquisition");
    s.quantity("window", Quantity::Time, sc.window_s);
    s.plain("seed", sc.seed);
    s.finish();
  }

  if (top.has("strategy")) {
    detail::Section s(top.at("strategy"), "strategy");
    StrategyKind& k = sc.strategy;
    if (s.has("kind")) {
      std::string kind;
      s.plain("kind", kind);
      try {
        k.mode = parse_mode(kind);
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("strategy.kind: ") + e.what());
      }
    }
    s.plain("gamma", k.gamma);
    if (s.has("active")) {
      std::string a;
      s.plain("active", a);
      if (a == "ris") k.active = PathId::Ris;
      else if (a == "direct") k.active = PathId::Direct;
      else throw ConfigError("strategy.active: expected \"ris\" or \"direct\", got \"" + a + "\"");
    }
    s.plain("ideal", k.ideal);
    s.quantity("threshold", Quantity::Decibel, k.threshold_db);
    s.plain("step", k.step);
    s.plain("hysteresis", k.hysteresis);
    s.plain("gamma_min", k.gamma_min);
    s.plain("gamma_max", k.gamma_max);
    s.finish();
  }

  if (top.has("sweep")) {
    detail::Section s(top.at("sweep"), "sweep");
    if (s.has("kind")) {
      std::string kind;
      s.plain("kind", kind);
      try {
        sc.sweep.mode = parse_mode(kind);
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("sweep.kind: ") + e.what());
      }
      if (sc.sweep.mode == StrategyMode::Opportunistic)
        throw ConfigError("sweep.kind: sweeps support spatial or temporal separation only");
    }
    if (s.has("gammas")) {
      const Json& g = s.at("gammas");
      if (!g.is_array()) throw ConfigError("sweep.gammas: expected an array of numbers");
      sc.sweep.gammas.clear();
      for (const auto& v : g) {
        if (!v.is_number()) throw ConfigError("sweep.gammas: expected an array of numbers");
        sc.sweep.gammas.push_back(v.get<double>());
      }
    }
    s.plain("seeds", sc.sweep.seeds);
    s.plain("first_seed", sc.sweep.first_seed);
    s.finish();
  }

  if (top.has("loop")) {
    detail::Section s(top.at("loop"), "loop");
    s.plain("windows", sc.loop_windows);
    s.finish();
  }
  top.finish();
  sc.validate();
  return sc;
}

/// Canonical form: every quantity in base units with round-trip precision.
inline Json scenario_to_json(const Scenario& sc) {
  auto v3 = [](const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); };
  Json j;
  j["radar"] = {{"elements", sc.radar.elements},
                {"carrier", with_unit(sc.radar.carrier_hz, "Hz")},
                {"bandwidth", with_unit(sc.radar.bandwidth_hz, "Hz")},
                {"fast_samples", sc.radar.fast_samples},
                {"pri", with_unit(sc.radar.pri_s, "s")},
                {"power", with_unit(sc.radar.power_w, "W")},
                {"noise_figure", with_unit(sc.radar.noise_figure_db, "dB")},
                {"element_spacing", with_unit(sc.radar.element_spacing_wl, "lambda")},
                {"pulse_frequency", with_unit(sc.radar.pulse_freq_hz, "Hz")}};
  j["ris"] = {{"rows", sc.ris.rows},
              {"cols", sc.ris.cols},
              {"element_spacing", with_unit(sc.ris.spacing_wl, "lambda")},
              {"phase_bits", sc.ris.phase_bits},
              {"aperture_gain", sc.ris.aperture_gain}};
  const Placement& p = sc.placement;
  j["placement"] = {{"radar_m", v3(p.radar_position)},     {"radar_boresight", v3(p.radar_boresight)},
                    {"ris_center_m", v3(p.ris_center)},     {"ris_normal", v3(p.ris_normal)},
                    {"target_m", v3(p.target_position)},    {"chest_normal", v3(p.chest_normal)}};
  j["channel"] = {{"rician_k", with_unit(sc.channel.rician_k_db, "dB")},
                  {"fading", sc.channel.fading},
                  {"clutter_gain", with_unit(sc.channel.clutter_gain_db, "dB")},
                  {"clutter", sc.channel.clutter}};
  const PhysioConfig& ph = sc.physio;
  Json gain = {{"reference_angle", with_unit(ph.reference_angle, "rad")}, {"reference_gain", ph.reference_gain}};
  if (!ph.gain_table.empty()) {
    Json t = Json::array();
    for (const auto& [a, g] : ph.gain_table) t.push_back(Json::array({with_unit(a, "rad"), g}));
    gain["table"] = t;
  }
  j["physiology"] = {{"breathing_rate", with_unit(ph.breathing_hz, "Hz")},
                     {"peak_to_peak", with_unit(ph.peak_to_peak_m, "m")},
                     {"harmonics", ph.harmonics},
                     {"drift", with_unit(ph.drift_m, "m")},
                     {"random_phase", ph.random_phase},
                     {"reflectivity_ris", ph.q_ris},
                     {"reflectivity_direct", ph.q_direct},
                     {"distortion", with_unit(ph.distortion_m, "m")},
                     {"trace_file", ph.trace_file},
                     {"angle_gain", gain}};
  j["processing"] = {{"clutter_window", sc.processing.clutter_window},
                     {"zero_pad", sc.processing.zero_pad},
                     {"detrend", sc.processing.detrend},
                     {"noise", sc.noise},
                     {"band", Json::array({with_unit(sc.processing.band.lo, "Hz"),
                                           with_unit(sc.processing.band.hi, "Hz")})}};
  j["acquisition"] = {{"window", with_unit(sc.window_s, "s")}, {"seed", sc.seed}};
  const StrategyKind& k = sc.strategy;
  j["strategy"] = {{"kind", mode_name(k.mode)},
                   {"gamma", k.gamma},
                   {"active", path_name(k.active)},
                   {"ideal", k.ideal},
                   {"threshold", with_unit(k.threshold_db, "dB")},
                   {"step", k.step},
                   {"hysteresis", k.hysteresis},
                   {"gamma_min", k.gamma_min},
                   {"gamma_max", k.gamma_max}};
  j["sweep"] = {{"kind", mode_name(sc.sweep.mode)},
                {"gammas", sc.sweep.gammas},
                {"seeds", sc.sweep.seeds},
                {"first_seed", sc.sweep.first_seed}};
  j["loop"] = {{"windows", sc.loop_windows}};
  return j;
}

inline Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": top level must be a JSON object");
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str(), path);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw ConfigError(path + ": " + msg);
  }
}

inline std::string canonical_text(const Scenario& sc) { return scenario_to_json(sc).dump(2) + "\n"; }

/// FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string config_hash(const Scenario& sc) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : scenario_to_json(sc).dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace risvs
