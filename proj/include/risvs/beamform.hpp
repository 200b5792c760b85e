#pragma once

#include "risvs/common.hpp"
#include "risvs/geometry.hpp"

#include <set>
#include <vector>

namespace risvs {

/// Correlation magnitude above which two constraints are considered collinear.
inline constexpr double kCollinearLimit = 1.0 - 1e-9;

/// Two steering constraints |a_iᴴ w| = γ_i.
struct ConstraintPair {
  CVector a1;
  CVector a2;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

struct Precoder {
  CVector w;
  double achieved_power = 0.0;
  ConstraintPair constraints;
};

/// a1ᴴ a2.
inline cd steering_correlation(const CVector& a1, const CVector& a2) {
  if (a1.size() != a2.size()) throw ShapeMismatch("steering vectors differ in length");
  return a1.dot(a2);  // Eigen's dot conjugates the left operand
}

/// Minimum of wᴴw under both magnitude constraints, optimised over the free phases.
inline double min_power_closed_form(double gamma1, double gamma2, cd a_c) {
  const double c = std::abs(a_c);
  if (!(c < 1.0)) throw IllConditioned("steering correlation magnitude must be below one");
  return (gamma1 * gamma1 + gamma2 * gamma2 - 2.0 * gamma1 * gamma2 * c) / (1.0 - c * c);
}

namespace detail {

/// w = A (AᴴA)⁻¹ g with the 2×2 Gram inverse written out.
inline CVector least_norm_two(const CVector& a1, const CVector& a2, cd g1, cd g2) {
  const cd g11 = a1.squaredNorm();
  const cd g22 = a2.squaredNorm();
  const cd g12 = a1.dot(a2);
  const cd det = g11 * g22 - g12 * std::conj(g12);
  if (std::abs(det) <= 1e-300) throw IllConditioned("steering vectors are linearly dependent");
  const cd l1 = (g22 * g1 - g12 * g2) / det;
  const cd l2 = (-std::conj(g12) * g1 + g11 * g2) / det;
  return l1 * a1 + l2 * a2;
}

inline void check_pair(const CVector& a1, const CVector& a2, bool any_active) {
  if (a1.size() != a2.size() || a1.size() == 0) throw ShapeMismatch("constraint steering vectors must match");
  if (any_active && std::abs(steering_correlation(a1, a2)) >= kCollinearLimit)
    throw IllConditioned("constraint directions are (nearly) collinear, |a_c| >= 1 - 1e-9");
}

}  // namespace detail

/// Minimum-norm precoder meeting |a1ᴴw| = γ1 and |a2ᴴw| = γ2. The relative
/// constraint phase is set to ∠(a1ᴴa2), which makes the Gram cross term real
/// and positive; the phase of constraint 2 is pinned to zero.
inline Precoder min_norm_precoder(const ConstraintPair& c) {
  if (c.gamma1 < 0.0 || c.gamma2 < 0.0) throw InvalidArgument("constraint magnitudes must be non-negative");
  detail::check_pair(c.a1, c.a2, c.gamma1 > 0.0 || c.gamma2 > 0.0);
  const cd a_c = steering_correlation(c.a1, c.a2);
  const double dphi = std::arg(a_c);
  Precoder p;
  p.constraints = c;
  p.w = detail::least_norm_two(c.a1, c.a2, c.gamma1 * std::polar(1.0, dphi), cd{c.gamma2, 0.0});
  p.achieved_power = p.w.squaredNorm();
  return p;
}

/// Scale s that makes the γ / (1-γ) split spend exactly `p_total`.
inline double split_scale(double p_total, double gamma, cd a_c) {
  if (!(p_total > 0.0)) throw InvalidArgument("total power must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("split share must lie in [0, 1]");
  const double c = std::abs(a_c);
  if (!(c < 1.0)) throw IllConditioned("steering correlation magnitude must be below one");
  const double denom = 1.0 - 2.0 * gamma * (1.0 + c) + 2.0 * gamma * gamma * (1.0 + c);
  if (!(denom > 0.0)) throw IllConditioned("power-split denominator is not positive");
  return std::sqrt(p_total * (1.0 - c * c) / denom);
}

/// Fixed-budget precoder: γ of the constraint amplitude on a1, 1-γ on a2.
inline Precoder split_precoder(const CVector& a1, const CVector& a2, double gamma, double p_total) {
  detail::check_pair(a1, a2, true);
  const cd a_c = steering_correlation(a1, a2);
  const double s = split_scale(p_total, gamma, a_c);
  ConstraintPair c{a1, a2, s * gamma, s * (1.0 - gamma)};
  return min_norm_precoder(c);
}

/// Slow-time slot ownership for time-multiplexed sensing.
struct SlotSets {
  std::set<int> direct;
  std::set<int> ris;

  void validate() const {
    for (int l : direct)
      if (ris.count(l)) throw InvalidArgument("slot " + std::to_string(l) + " is assigned to both paths");
  }

  /// Contiguous halves: the first ⌊(1-share)·L⌉ slots go to the direct path.
  static SlotSets contiguous(int length, double ris_share) {
    if (!(ris_share >= 0.0 && ris_share <= 1.0)) throw InvalidArgument("slot share must lie in [0, 1]");
    SlotSets s;
    const int n_ris = static_cast<int>(std::lround(ris_share * length));
    for (int l = 0; l < length; ++l) (l < length - n_ris ? s.direct : s.ris).insert(l);
    return s;
  }
};

enum class PathId { Direct, Ris };

inline const char* path_name(PathId p) { return p == PathId::Direct ? "direct" : "ris"; }

/// Direct/RIS steering pair, kept by name to avoid column-order mix-ups.
struct PathSteering {
  CVector direct;
  CVector ris;
};

/// Full-power single-path beam with a null on the other path.
inline Precoder single_path_precoder(const PathSteering& a, PathId path, double p_total) {
  return path == PathId::Direct ? split_precoder(a.direct, a.ris, 1.0, p_total)
                                : split_precoder(a.ris, a.direct, 1.0, p_total);
}

inline Precoder temporal_weights(int l, const SlotSets& slots, const PathSteering& a, double p_total) {
  slots.validate();
  if (slots.direct.count(l)) return single_path_precoder(a, PathId::Direct, p_total);
  if (slots.ris.count(l)) return single_path_precoder(a, PathId::Ris, p_total);
  throw InvalidArgument("slow-time index " + std::to_string(l) + " is in neither slot set");
}

}  // namespace risvs
