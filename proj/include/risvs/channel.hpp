#pragma once

#include "risvs/common.hpp"
#include "risvs/geometry.hpp"

#include <limits>
#include <vector>

namespace risvs {

/// K factor above which a Rician draw is treated as pure LoS.
inline constexpr double kPureLosK = 1e12;

struct RicianSpec {
  double k_factor = 0.0;  // linear
  CMatrix los;            // same shape as the draw

  void validate() const {
    if (!(k_factor >= 0.0)) throw InvalidArgument("Rician K must be non-negative");
    if (!los.allFinite()) throw InvalidArgument("LoS component must be finite");
  }
};

/// sqrt(K/(K+1))·H_LoS + sqrt(1/(K+1))·H_nLoS with unit-variance CN entries.
inline CMatrix rician_draw(const RicianSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.k_factor >= kPureLosK) return spec.los;
  const double k = spec.k_factor;
  const double los_w = std::sqrt(k / (k + 1.0));
  const double nlos_w = std::sqrt(1.0 / (k + 1.0));
  CMatrix out(spec.los.rows(), spec.los.cols());
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      out(r, c) = los_w * spec.los(r, c) + nlos_w * complex_normal(rng);
  return out;
}

inline CMatrix rician_draw(const RicianSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return rician_draw(spec, rng);
}

/// Rician draw around a path-loss-scaled LoS matrix: the unit-variance draw is
/// taken on the LoS phases and then rescaled entrywise by |LoS|, so the
/// scattered part shares each link's mean power.
inline CMatrix rician_draw_scaled(const CMatrix& los, double k_factor, Rng& rng) {
  const CMatrix mag = los.cwiseAbs().cast<cd>();
  CMatrix phase = los;
  for (Eigen::Index i = 0; i < phase.size(); ++i) {
    const double a = std::abs(los(i));
    phase(i) = a > 0.0 ? los(i) / a : cd{1.0, 0.0};
  }
  const CMatrix drawn = rician_draw(RicianSpec{k_factor, phase}, rng);
  return drawn.cwiseProduct(mag);
}

struct RisConfig {
  int rows = 10;
  int cols = 10;
  double element_spacing = 0.0;  // m
  std::vector<Vec3> element_positions;
  std::vector<double> phases;  // rad, [0, 2π)
  int phase_bits = 0;          // 0 = continuous
  bool aperture_gain = true;

  int size() const { return rows * cols; }

  void validate() const {
    if (rows < 1 || cols < 1) throw InvalidArgument("RIS grid must be at least 1x1");
    if (!(element_spacing > 0.0)) throw InvalidArgument("RIS element spacing must be positive");
    if (static_cast<int>(element_positions.size()) != size())
      throw ShapeMismatch("RIS element positions do not match the grid");
    if (!phases.empty() && static_cast<int>(phases.size()) != size())
      throw ShapeMismatch("RIS phase profile does not match the grid");
    for (double ph : phases)
      if (!(ph >= 0.0 && ph < kTwoPi)) throw InvalidArgument("RIS phases must lie in [0, 2π)");
  }

  /// Element gain 4π·A/λ² of a spacing² aperture.
  double element_gain(double lambda) const {
    if (!aperture_gain) return 1.0;
    return 4.0 * kPi * element_spacing * element_spacing / (lambda * lambda);
  }
};

/// Lays a rows×cols grid in the plane orthogonal to `normal`, centred on `center`.
/// Columns run horizontally, rows vertically.
inline RisConfig make_ris_grid(int rows, int cols, double spacing, const Vec3& center, const Vec3& normal) {
  RisConfig ris;
  ris.rows = rows;
  ris.cols = cols;
  ris.element_spacing = spacing;
  Vec3 u = Vec3::UnitZ().cross(normal);
  if (u.norm() < 1e-9) u = Vec3::UnitX();  // ceiling-mounted panel
  u.normalize();
  const Vec3 v = normal.cross(u).normalized();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double du = (c - (cols - 1) / 2.0) * spacing;
      const double dv = (r - (rows - 1) / 2.0) * spacing;
      ris.element_positions.push_back(center + du * u + dv * v);
    }
  }
  ris.validate();
  return ris;
}

struct ChannelRealization {
  CMatrix incident;  // H_I, M×N radar → RIS
  CVector target;    // h_T, N, RIS → target
  CVector direct;    // h_D, M, radar → target
  CMatrix clutter;   // H_C, M×M
  CVector ris_diag;  // diagonal of Γ

  CMatrix gamma_matrix() const { return ris_diag.asDiagonal(); }

  /// Composite radar→RIS→target vector H_I·Γ·h_T.
  CVector cascade() const { return incident * ris_diag.cwiseProduct(target); }

  void validate() const {
    const auto m = direct.size();
    const auto n = target.size();
    if (incident.rows() != m || incident.cols() != n || ris_diag.size() != n || clutter.rows() != m ||
        clutter.cols() != m)
      throw ShapeMismatch("channel realization shapes are inconsistent");
  }
};

/// One-way free-space coefficient λ/(4πd)·exp(-j2πd/λ).
inline cd free_space(double d, double lambda) {
  if (!(d > 0.0)) throw InvalidGeometry("zero link distance");
  return (lambda / (4.0 * kPi * d)) * std::polar(1.0, -kTwoPi * d / lambda);
}

struct LosChannels {
  CMatrix incident;
  CVector target;
  CVector direct;
};

inline LosChannels los_channel(const Placement& p, const ArrayConfig& cfg, const RisConfig& ris) {
  p.validate();
  cfg.validate();
  ris.validate();
  const auto radar = radar_element_positions(p, cfg);
  const int m_count = cfg.element_count;
  const int n_count = ris.size();
  const double lambda = cfg.wavelength;
  const double leg_gain = std::sqrt(ris.element_gain(lambda));
  LosChannels out;
  out.incident.resize(m_count, n_count);
  out.target.resize(n_count);
  out.direct.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    out.direct(m) = free_space((radar[m] - p.target_position).norm(), lambda);
    for (int n = 0; n < n_count; ++n)
      out.incident(m, n) = leg_gain * free_space((radar[m] - ris.element_positions[n]).norm(), lambda);
  }
  for (int n = 0; n < n_count; ++n)
    out.target(n) = leg_gain * free_space((ris.element_positions[n] - p.target_position).norm(), lambda);
  return out;
}

/// Phase profile that equalises the radar→element→target path phase.
inline std::vector<double> ris_focus_profile(const Vec3& radar, const Vec3& target, const RisConfig& ris,
                                             double lambda) {
  std::vector<double> phases;
  phases.reserve(ris.element_positions.size());
  for (const Vec3& e : ris.element_positions) {
    const double path = (radar - e).norm() + (e - target).norm();
    double ph = std::fmod(kTwoPi * path / lambda, kTwoPi);
    if (ph < 0.0) ph += kTwoPi;
    if (ph >= kTwoPi) ph = 0.0;
    phases.push_back(ph);
  }
  if (ris.phase_bits > 0) {
    const double step = kTwoPi / static_cast<double>(1 << ris.phase_bits);
    for (double& ph : phases) {
      ph = std::round(ph / step) * step;
      if (ph >= kTwoPi - 1e-12) ph = 0.0;
    }
  }
  return phases;
}

inline std::vector<double> ris_focus_profile(const Placement& p, const RisConfig& ris, double lambda) {
  return ris_focus_profile(p.radar_position, p.target_position, ris, lambda);
}

inline CVector reflection_diagonal(const std::vector<double>& phases) {
  CVector g(static_cast<Eigen::Index>(phases.size()));
  for (std::size_t n = 0; n < phases.size(); ++n) g(static_cast<Eigen::Index>(n)) = std::polar(1.0, phases[n]);
  return g;
}

/// End-to-end channel H(α, β) = α·v·vᵀ + β·h_D·h_Dᵀ + H_C with v = H_I·Γ·h_T.
inline CMatrix assemble_end_to_end(const ChannelRealization& ch, cd rcs_ris, cd rcs_direct) {
  ch.validate();
  const CVector v = ch.cascade();
  CMatrix h = ch.clutter;
  h.noalias() += rcs_ris * (v * v.transpose());
  h.noalias() += rcs_direct * (ch.direct * ch.direct.transpose());
  return h;
}

/// Static clutter matrix, complex symmetric, per-entry variance `strength`.
inline CMatrix clutter_draw(double strength, Rng& rng, int m_count) {
  if (!(strength >= 0.0)) throw InvalidArgument("clutter strength must be non-negative");
  CMatrix c = CMatrix::Zero(m_count, m_count);
  if (strength == 0.0) return c;
  for (int i = 0; i < m_count; ++i)
    for (int j = i; j < m_count; ++j) {
      c(i, j) = complex_normal(rng, strength);
      c(j, i) = c(i, j);
    }
  return c;
}

inline CMatrix clutter_draw(double strength, std::uint64_t seed, int m_count) {
  Rng rng(seed);
  return clutter_draw(strength, rng, m_count);
}

}  // namespace risvs
