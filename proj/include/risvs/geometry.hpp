#pragma once

#include "risvs/common.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace risvs {

/// Uniform linear array description.
struct ArrayConfig {
  int element_count = 5;
  double spacing = 0.0;     // m
  double wavelength = 0.0;  // m

  void validate() const {
    if (element_count < 1) throw InvalidArgument("array needs at least one element");
    if (!(spacing > 0.0)) throw InvalidArgument("array spacing must be positive");
    if (!(wavelength > 0.0)) throw InvalidArgument("carrier wavelength must be positive");
  }

  static ArrayConfig half_wavelength(int m, double lambda) { return {m, lambda / 2.0, lambda}; }
};

struct SteeringVector {
  CVector entries;
  double angle = 0.0;  // rad
};

/// Scene layout. Angles are measured in the horizontal plane from the radar
/// boresight, positive toward z × boresight.
struct Placement {
  Vec3 radar_position{0.0, 0.0, 1.0};
  Vec3 radar_boresight{1.0, 0.0, 0.0};
  Vec3 ris_center{2.707, 1.4606, 1.0};
  Vec3 ris_normal{0.0, -1.0, 0.0};
  Vec3 target_position{3.0, 0.0, 1.0};
  Vec3 chest_normal{0.0, 1.0, 0.0};

  void validate() const {
    auto unit = [](const Vec3& v, const char* name) {
      if (std::abs(v.norm() - 1.0) > 1e-12)
        throw InvalidGeometry(std::string(name) + " must have unit length");
    };
    unit(ris_normal, "ris_normal");
    unit(chest_normal, "chest_normal");
    unit(radar_boresight, "radar_boresight");
    if (std::hypot(radar_boresight.x(), radar_boresight.y()) < 1e-9)
      throw InvalidGeometry("radar_boresight must have a horizontal component");
    auto apart = [](const Vec3& a, const Vec3& b, const char* what) {
      if ((a - b).norm() <= 1e-12) throw InvalidGeometry(std::string("coincident points: ") + what);
    };
    apart(radar_position, target_position, "radar and target");
    apart(radar_position, ris_center, "radar and RIS");
    apart(ris_center, target_position, "RIS and target");
  }

  /// Unit vector pointing from the target toward `p`, handy for building chest normals.
  Vec3 chest_toward(const Vec3& p) const { return (p - target_position).normalized(); }
};

struct PlacementAngles {
  double theta_direct = 0.0;        // azimuth of the target seen from the radar
  double theta_ris = 0.0;           // azimuth of the RIS centre seen from the radar
  double incidence_direct = 0.0;    // chest incidence of the direct illumination
  double incidence_ris = 0.0;       // chest incidence of the RIS illumination
};

namespace detail {

inline Vec3 horizontal_unit(const Vec3& v) {
  Vec3 h{v.x(), v.y(), 0.0};
  return h.normalized();
}

}  // namespace detail

/// Horizontal unit vector along which positive angles grow (z × boresight).
inline Vec3 positive_angle_axis(const Placement& p) {
  const Vec3 b = detail::horizontal_unit(p.radar_boresight);
  return Vec3::UnitZ().cross(b);
}

/// Azimuth of point `q` relative to the radar boresight.
inline double azimuth_from_radar(const Placement& p, const Vec3& q) {
  const Vec3 d = q - p.radar_position;
  const Vec3 b = detail::horizontal_unit(p.radar_boresight);
  const Vec3 left = positive_angle_axis(p);
  const double along = d.dot(b);
  const double across = d.dot(left);
  if (std::hypot(along, across) <= 1e-12)
    throw InvalidGeometry("point lies on the radar's vertical axis; azimuth undefined");
  return std::atan2(across, along);
}

/// Radar element positions. Element m sits at m·δ along boresight × z, so the
/// far-field LoS phase toward azimuth θ is exp(-j·2π·m·δ·sinθ/λ0), i.e. the
/// channel vector is proportional to conj(ula_steering(θ)).
inline std::vector<Vec3> radar_element_positions(const Placement& p, const ArrayConfig& cfg) {
  const Vec3 axis = -positive_angle_axis(p);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(cfg.element_count));
  for (int m = 0; m < cfg.element_count; ++m) out.push_back(p.radar_position + m * cfg.spacing * axis);
  return out;
}

inline SteeringVector ula_steering(const ArrayConfig& cfg, double theta) {
  cfg.validate();
  const int m_count = cfg.element_count;
  SteeringVector sv;
  sv.angle = theta;
  sv.entries.resize(m_count);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_count));
  const double phase_step = kTwoPi * cfg.spacing * std::sin(theta) / cfg.wavelength;
  for (int m = 0; m < m_count; ++m) sv.entries(m) = scale * std::polar(1.0, phase_step * m);
  return sv;
}

inline double incidence_angle(const Vec3& normal, const Vec3& from_target) {
  const double c = std::clamp(normal.dot(from_target.normalized()), -1.0, 1.0);
  return std::acos(c);
}

inline PlacementAngles angles_from_placement(const Placement& p) {
  p.validate();
  PlacementAngles a;
  a.theta_direct = azimuth_from_radar(p, p.target_position);
  a.theta_ris = azimuth_from_radar(p, p.ris_center);
  a.incidence_direct = incidence_angle(p.chest_normal, p.radar_position - p.target_position);
  a.incidence_ris = incidence_angle(p.chest_normal, p.ris_center - p.target_position);
  return a;
}

/// Reference room: chest 3 m in front of the radar, facing the RIS panel.
inline Placement default_placement() {
  Placement p;
  p.chest_normal = p.chest_toward(p.ris_center);
  return p;
}

/// Same room with the patient turned toward the radar.
inline Placement facing_radar_placement() {
  Placement p = default_placement();
  p.chest_normal = p.chest_toward(p.radar_position);
  return p;
}

}  // namespace risvs
