#pragma once

#include "risvs/beamform.hpp"
#include "risvs/common.hpp"
#include "risvs/geometry.hpp"
#include "risvs/physio.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace risvs {

// ---------------------------------------------------------------------------
// Fast time

struct Waveform {
  double f0 = 0.0;
  double fs = 0.0;
  CVector samples;

  int fast_samples() const { return static_cast<int>(samples.size()); }
  double pulse_duration() const { return samples.size() / fs; }
};

/// Sampled pulse √2·cos(2π f0 k / fs), k = 0 … K_fast-1.
inline Waveform make_waveform(double f0, double fs, int fast_samples) {
  if (!(fs > 0.0)) throw InvalidArgument("sampling rate must be positive");
  if (!(f0 > 0.0 && f0 < fs / 2.0)) throw InvalidArgument("pulse frequency aliases (need 0 < f0 < fs/2)");
  if (fast_samples < 1) throw InvalidArgument("pulse needs at least one fast-time sample");
  Waveform w{f0, fs, CVector(fast_samples)};
  for (int k = 0; k < fast_samples; ++k)
    w.samples(k) = std::sqrt(2.0) * std::cos(kTwoPi * f0 * k / fs);
  return w;
}

/// Correlates one antenna's fast-time row with the pulse, normalised by ‖s‖²
/// so a received c·s returns c.
inline cd matched_filter(const CVector& y_fast, const CVector& s) {
  if (y_fast.size() != s.size()) throw ShapeMismatch("fast-time row and pulse differ in length");
  const double energy = s.squaredNorm();
  if (!(energy > 0.0)) throw InvalidArgument("pulse has zero energy");
  return s.dot(y_fast) / energy;
}

// ---------------------------------------------------------------------------
// Slow time

struct SlowTimeRecord {
  CMatrix data;  // M × L
  double slow_rate = 0.0;

  int antennas() const { return static_cast<int>(data.rows()); }
  int length() const { return static_cast<int>(data.cols()); }
};

/// Subtracts the centred length-W moving average along slow time, per row.
/// Windows shrink at the record edges.
inline CMatrix clutter_filter(const CMatrix& y, int window) {
  const auto len = static_cast<int>(y.cols());
  if (window % 2 == 0 || window < 3 || window > len)
    throw InvalidArgument("clutter window must be odd with 3 <= W <= L (W=" + std::to_string(window) +
                          ", L=" + std::to_string(len) + ")");
  const int half = window / 2;
  CMatrix out(y.rows(), y.cols());
  for (Eigen::Index m = 0; m < y.rows(); ++m) {
    for (int l = 0; l < len; ++l) {
      const int lo = std::max(0, l - half);
      const int hi = std::min(len - 1, l + half);
      cd acc{0.0, 0.0};
      for (int k = lo; k <= hi; ++k) acc += y(m, k);
      out(m, l) = y(m, l) - acc / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

/// Moving-average response sin(πfW/fs) / (W·sin(πf/fs)).
inline double moving_average_response(double f, double fs, int window) {
  const double x = kPi * f / fs;
  if (std::abs(std::sin(x)) < 1e-15) return 1.0;
  return std::sin(x * window) / (window * std::sin(x));
}

struct SeparatedPaths {
  CVector direct;
  CVector ris;
};

/// r = wᴴ·Y for each receive weight vector.
inline SeparatedPaths separate_paths(const CMatrix& y, const CVector& w_direct, const CVector& w_ris) {
  if (w_direct.size() != y.rows() || w_ris.size() != y.rows())
    throw ShapeMismatch("receive weights do not match the antenna count");
  return {(w_direct.adjoint() * y).transpose(), (w_ris.adjoint() * y).transpose()};
}

/// Wraps a phase difference into (-π, π].
inline double wrap_phase(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

inline std::vector<double> unwrap_phase(const CVector& r) {
  std::vector<double> phase(static_cast<std::size_t>(r.size()));
  if (r.size() == 0) return phase;
  double prev = std::arg(r(0));
  phase[0] = prev;
  for (Eigen::Index l = 1; l < r.size(); ++l) {
    const double cur = std::arg(r(l));
    phase[static_cast<std::size_t>(l)] = phase[static_cast<std::size_t>(l - 1)] + wrap_phase(cur - prev);
    prev = cur;
  }
  return phase;
}

/// Removes the least-squares line from `v` in place.
inline void remove_linear_trend(std::vector<double>& v) {
  const auto n = v.size();
  if (n < 2) return;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += v[i];
    sxx += x * x;
    sxy += x * v[i];
  }
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / dn;
  for (std::size_t i = 0; i < n; ++i) v[i] -= icpt + slope * static_cast<double>(i);
}

/// Unwrapped slow-time phase → displacement d = (1/2)(λ0/2π)·φ.
inline DisplacementTrace phase_demodulate(const CVector& r, double lambda, double slow_rate, bool detrend = true) {
  for (Eigen::Index l = 0; l < r.size(); ++l)
    if (!(std::abs(r(l)) > 0.0))
      throw InvalidArgument("zero-magnitude slow-time sample at index " + std::to_string(l));
  std::vector<double> phase = unwrap_phase(r);
  if (detrend) remove_linear_trend(phase);
  DisplacementTrace t;
  t.slow_rate = slow_rate;
  t.samples.resize(phase.size());
  const double scale = 0.5 * lambda / kTwoPi;
  for (std::size_t l = 0; l < phase.size(); ++l) t.samples[l] = scale * phase[l];
  return t;
}

// ---------------------------------------------------------------------------
// Spectrum

struct Spectrum {
  std::vector<double> freq;   // Hz, 0 … rate/2
  std::vector<double> power;  // one-sided, sums to the windowed-signal energy

  double bin_width() const { return freq.size() > 1 ? freq[1] - freq[0] : 0.0; }
};

/// Symmetric Hann window.
inline std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1));
  return w;
}

/// Mean-removed, Hann-windowed periodogram on an explicit FFT length.
inline Spectrum power_spectrum_nfft(const DisplacementTrace& d, std::size_t nfft) {
  const std::size_t n = d.size();
  if (n < 8) throw InvalidArgument("spectrum needs at least 8 samples");
  if (nfft < n) throw InvalidArgument("FFT length shorter than the trace");
  if (!(d.slow_rate > 0.0)) throw InvalidArgument("slow-time rate must be positive");
  double mean = 0.0;
  for (double v : d.samples) mean += v;
  mean /= static_cast<double>(n);
  const auto w = hann(n);
  std::vector<cd> x(nfft, cd{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) x[i] = (d.samples[i] - mean) * w[i];

  Eigen::FFT<double> fft;
  std::vector<cd> spec;
  fft.fwd(spec, x);

  Spectrum s;
  const std::size_t half = nfft / 2;
  s.freq.resize(half + 1);
  s.power.resize(half + 1);
  const double scale = 1.0 / static_cast<double>(nfft);
  for (std::size_t k = 0; k <= half; ++k) {
    const bool edge = k == 0 || (nfft % 2 == 0 && k == half);
    s.freq[k] = static_cast<double>(k) * d.slow_rate / static_cast<double>(nfft);
    s.power[k] = (edge ? 1.0 : 2.0) * std::norm(spec[k]) * scale;
  }
  return s;
}

inline Spectrum power_spectrum(const DisplacementTrace& d, int zero_pad_factor) {
  if (zero_pad_factor < 1) throw InvalidArgument("zero-pad factor must be at least 1");
  return power_spectrum_nfft(d, d.size() * static_cast<std::size_t>(zero_pad_factor));
}

struct Band {
  double lo = 0.05;
  double hi = 0.7;
};

struct PeakQuality {
  double peak_freq = 0.0;
  double prominence_db = 0.0;
  std::size_t peak_index = 0;
};

/// Prominence ceiling for spectra whose off-peak median is exactly zero.
inline constexpr double kMaxProminenceDb = 300.0;

/// Tallest in-band bin and its height over the in-band median, excluding ±2
/// bins around the peak.
inline PeakQuality peak_quality(const Spectrum& s, Band band) {
  if (s.freq.empty()) throw InvalidArgument("empty spectrum");
  if (!(band.lo < band.hi)) throw InvalidArgument("band must satisfy lo < hi");
  if (band.hi > s.freq.back() + 1e-12) throw InvalidArgument("band exceeds the spectrum's Nyquist limit");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < s.freq.size(); ++k)
    if (s.freq[k] >= band.lo - 1e-12 && s.freq[k] <= band.hi + 1e-12) idx.push_back(k);
  if (idx.empty()) throw InvalidArgument("no spectral bins inside the band");
  std::size_t peak = idx.front();
  for (std::size_t k : idx)
    if (s.power[k] > s.power[peak]) peak = k;
  std::vector<double> rest;
  for (std::size_t k : idx)
    if (k + 2 < peak || k > peak + 2) rest.push_back(s.power[k]);
  if (rest.empty()) throw InvalidArgument("band too narrow to estimate a noise floor");
  const auto mid = rest.begin() + static_cast<std::ptrdiff_t>(rest.size() / 2);
  std::nth_element(rest.begin(), mid, rest.end());
  double median = *mid;
  if (rest.size() % 2 == 0) {
    const double lower = *std::max_element(rest.begin(), mid);
    median = 0.5 * (median + lower);
  }
  PeakQuality q;
  q.peak_index = peak;
  q.peak_freq = s.freq[peak];
  const double p = s.power[peak];
  if (!(p > 0.0)) {
    q.prominence_db = 0.0;
  } else if (!(median > 0.0)) {
    q.prominence_db = kMaxProminenceDb;
  } else {
    q.prominence_db = std::min(kMaxProminenceDb, std::max(0.0, lin2db(p / median)));
  }
  return q;
}

/// Half-power width of the lobe around `peak` (linear interpolation between bins).
inline double main_lobe_width(const Spectrum& s, std::size_t peak) {
  const double half = 0.5 * s.power.at(peak);
  auto cross = [&](int dir) {
    auto k = static_cast<std::ptrdiff_t>(peak);
    while (true) {
      const auto next = k + dir;
      if (next < 0 || next >= static_cast<std::ptrdiff_t>(s.power.size())) return s.freq[static_cast<std::size_t>(k)];
      const double pk = s.power[static_cast<std::size_t>(k)];
      const double pn = s.power[static_cast<std::size_t>(next)];
      if (pn <= half) {
        const double f = (pk - half) / (pk - pn);
        return s.freq[static_cast<std::size_t>(k)] + f * (s.freq[static_cast<std::size_t>(next)] - s.freq[static_cast<std::size_t>(k)]);
      }
      k = next;
    }
  };
  return cross(+1) - cross(-1);
}

// ---------------------------------------------------------------------------
// Vital-sign estimate for one path

struct VitalSignEstimate {
  PathId path = PathId::Direct;
  DisplacementTrace displacement;
  std::vector<int> slots;  // slow-time indices the trace was taken from
  Spectrum spectrum;
  double peak_freq = 0.0;
  double prominence_db = 0.0;
  std::size_t peak_index = 0;
};

struct ExtractionSettings {
  int clutter_window = 21;  // 0 disables the clutter filter
  int zero_pad = 4;
  Band band;
  bool detrend = true;
};

/// Largest odd window not exceeding `len`, or 0 when too short to filter.
inline int fit_window(int window, int len) {
  if (window <= 0) return 0;
  int w = std::min(window, len);
  if (w % 2 == 0) --w;
  return w >= 3 ? w : 0;
}

/// Splits sorted slot indices into contiguous runs.
inline std::vector<std::pair<int, int>> contiguous_runs(const std::vector<int>& slots) {
  std::vector<std::pair<int, int>> runs;
  for (std::size_t i = 0; i < slots.size();) {
    std::size_t j = i;
    while (j + 1 < slots.size() && slots[j + 1] == slots[j] + 1) ++j;
    runs.emplace_back(slots[i], slots[j] + 1);
    i = j + 1;
  }
  return runs;
}

/// Clutter filter per contiguous slot run, receive beamforming with `rx`
/// (r = rxᴴ·Y), phase demodulation, periodogram on a pad·L_total grid and
/// peak evaluation. Returns nothing when the path owns fewer than 8 slots.
inline std::optional<VitalSignEstimate> extract_vital_sign(const SlowTimeRecord& rec, const std::vector<int>& slots,
                                                           const CVector& rx, PathId path, double lambda,
                                                           const ExtractionSettings& cfg) {
  if (rx.size() != rec.data.rows()) throw ShapeMismatch("receive weights do not match the antenna count");
  if (slots.size() < 8) return std::nullopt;
  CVector r(static_cast<Eigen::Index>(slots.size()));
  Eigen::Index pos = 0;
  for (const auto& [first, last] : contiguous_runs(slots)) {
    const int len = last - first;
    CMatrix seg = rec.data.middleCols(first, len);
    if (const int w = fit_window(cfg.clutter_window, len); w > 0) seg = clutter_filter(seg, w);
    r.segment(pos, len) = (rx.adjoint() * seg).transpose();
    pos += len;
  }
  VitalSignEstimate est;
  est.path = path;
  est.slots = slots;
  est.displacement = phase_demodulate(r, lambda, rec.slow_rate, cfg.detrend);
  est.displacement.label = path_name(path);
  const std::size_t nfft = static_cast<std::size_t>(cfg.zero_pad) * static_cast<std::size_t>(rec.length());
  est.spectrum = power_spectrum_nfft(est.displacement, std::max(nfft, est.displacement.size()));
  const PeakQuality q = peak_quality(est.spectrum, cfg.band);
  est.peak_freq = q.peak_freq;
  est.prominence_db = q.prominence_db;
  est.peak_index = q.peak_index;
  return est;
}

// ---------------------------------------------------------------------------
// Root-MUSIC

/// Polynomial roots via companion-matrix eigenvalues. coeffs[k] multiplies z^k.
inline std::vector<cd> polynomial_roots(std::vector<cd> coeffs) {
  while (coeffs.size() > 1 && std::abs(coeffs.back()) == 0.0) coeffs.pop_back();
  const auto deg = static_cast<Eigen::Index>(coeffs.size()) - 1;
  if (deg < 1) return {};
  CMatrix comp = CMatrix::Zero(deg, deg);
  for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs.back();
  Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
  if (es.info() != Eigen::Success) throw Error("companion eigen-solve failed");
  std::vector<cd> roots(static_cast<std::size_t>(deg));
  for (Eigen::Index i = 0; i < deg; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return roots;
}

/// Root-MUSIC DOA for a ULA whose snapshots are ∝ ula_steering(θ). Returns
/// `n_sources` angles (rad), ascending.
inline std::vector<double> root_music_doa(const CMatrix& snapshots, int n_sources, const ArrayConfig& cfg) {
  cfg.validate();
  const int m = cfg.element_count;
  if (snapshots.rows() != m) throw ShapeMismatch("snapshot rows must equal the element count");
  if (n_sources < 1 || n_sources > m - 1)
    throw InvalidArgument("root-MUSIC needs 1 <= n_sources <= M-1 (got " + std::to_string(n_sources) + ")");
  if (snapshots.cols() < m) throw InvalidArgument("root-MUSIC needs at least M snapshots");

  const CMatrix r = snapshots * snapshots.adjoint() / static_cast<double>(snapshots.cols());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
  if (es.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");
  const CMatrix noise = es.eigenvectors().leftCols(m - n_sources);  // ascending eigenvalues
  const CMatrix c = noise * noise.adjoint();

  // aᴴ C a = Σ_k b_k z^k with b_k the sum of C's k-th diagonal (k = col - row).
  std::vector<cd> coeffs(static_cast<std::size_t>(2 * m - 1), cd{0.0, 0.0});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) coeffs[static_cast<std::size_t>(j - i + m - 1)] += c(i, j);
  auto roots = polynomial_roots(coeffs);

  // Roots come in (z, 1/z*) pairs; keep the ones inside (or on) the circle.
  std::vector<cd> inside;
  for (const cd& z : roots)
    if (std::abs(z) <= 1.0 + 1e-9) inside.push_back(z);
  std::sort(inside.begin(), inside.end(),
            [](const cd& a, const cd& b) { return std::abs(1.0 - std::abs(a)) < std::abs(1.0 - std::abs(b)); });

  std::vector<double> angles;
  const double k = cfg.wavelength / (kTwoPi * cfg.spacing);
  for (const cd& z : inside) {
    const double s = k * std::arg(z);
    if (std::abs(s) > 1.0) continue;
    const double theta = std::asin(s);
    // Near-unit-circle double roots split into close pairs; skip duplicates.
    const bool dup = std::any_of(angles.begin(), angles.end(), [&](double a) { return std::abs(a - theta) < 1e-6; });
    if (dup) continue;
    angles.push_back(theta);
    if (static_cast<int>(angles.size()) == n_sources) break;
  }
  if (static_cast<int>(angles.size()) < n_sources)
    throw Error("root-MUSIC found only " + std::to_string(angles.size()) + " admissible roots");
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace risvs
