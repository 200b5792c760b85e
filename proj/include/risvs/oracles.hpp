#pragma once

#include "risvs/beamform.hpp"
#include "risvs/common.hpp"

#include <Eigen/QR>

namespace risvs::oracle {

/// Least-norm solution of Aᴴw = g through Eigen's pseudo-inverse, A = [a1 a2].
inline CVector pinv_solution(const CVector& a1, const CVector& a2, cd g1, cd g2) {
  CMatrix ah(2, a1.size());
  ah.row(0) = a1.adjoint();
  ah.row(1) = a2.adjoint();
  CVector g(2);
  g << g1, g2;
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(ah);
  return cod.pseudoInverse() * g;
}

inline double power_at(const CVector& a1, const CVector& a2, double gamma1, double gamma2, double dphi) {
  return pinv_solution(a1, a2, std::polar(gamma1, dphi), cd{gamma2, 0.0}).squaredNorm();
}

struct GridMinimum {
  double dphi = 0.0;
  double power = 0.0;
};

/// Minimum transmit power over the relative constraint phase: a uniform
/// grid, then golden-section refinement around the best grid point.
inline GridMinimum brute_force_min_power(const CVector& a1, const CVector& a2, double gamma1, double gamma2,
                                         int grid = 4096) {
  GridMinimum best{0.0, power_at(a1, a2, gamma1, gamma2, 0.0)};
  const double step = kTwoPi / grid;
  for (int i = 1; i < grid; ++i) {
    const double phi = -kPi + i * step;
    const double p = power_at(a1, a2, gamma1, gamma2, phi);
    if (p < best.power) best = {phi, p};
  }
  double lo = best.dphi - step;
  double hi = best.dphi + step;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = power_at(a1, a2, gamma1, gamma2, x1);
  double f2 = power_at(a1, a2, gamma1, gamma2, x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = power_at(a1, a2, gamma1, gamma2, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = power_at(a1, a2, gamma1, gamma2, x2);
    }
  }
  const double x = 0.5 * (lo + hi);
  const double p = power_at(a1, a2, gamma1, gamma2, x);
  if (p < best.power) best = {x, p};
  return best;
}

/// Moving average of a complex exponential at frequency f, evaluated by
/// direct summation at an interior sample.
inline double moving_average_gain(double f, double fs, int window) {
  const int half = window / 2;
  cd acc{0.0, 0.0};
  for (int k = -half; k <= half; ++k) acc += std::polar(1.0, kTwoPi * f * k / fs);
  return (acc / static_cast<double>(window)).real();
}

}  // namespace risvs::oracle
