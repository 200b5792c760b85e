#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace risvs {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr char kVersion[] = "1.0.0";

// Error hierarchy. Everything thrown by the library derives from Error so
// callers can map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm2watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt2dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

inline double wavelength(double carrier_hz) { return kSpeedOfLight / carrier_hz; }

/// Thermal noise power in dBm for a receiver of the given bandwidth and noise figure.
inline double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

using Rng = std::mt19937_64;

/// Derives an independent sub-stream seed from a run seed and a stream tag
/// (splitmix64 finalizer), so channel, clutter, noise and physiology draws
/// stay decoupled when one of them changes shape.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace stream {
inline constexpr std::uint64_t kDirect = 1;
inline constexpr std::uint64_t kIncident = 2;
inline constexpr std::uint64_t kTarget = 3;
inline constexpr std::uint64_t kClutter = 4;
inline constexpr std::uint64_t kNoise = 5;
inline constexpr std::uint64_t kPhysio = 6;
inline constexpr std::uint64_t kProbeNoise = 7;
}  // namespace stream

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline cd complex_normal(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline bool all_finite(const CMatrix& m) { return m.allFinite(); }

}  // namespace risvs
