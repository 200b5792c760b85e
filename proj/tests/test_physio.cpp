#include "risvs/physio.hpp"
#include "risvs/sigproc.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <iomanip>
#include <sstream>

using namespace risvs;
using risvs::testing::Gen;
using risvs::testing::rel_err;

TEST(Respiration, LengthAndDominantBin) {
  const auto t = synth_respiration(0.133, 0.02, 60.0, 4.0, 0, 1);
  ASSERT_EQ(t.size(), 240u);
  const auto s = power_spectrum(t, 4);
  const auto q = peak_quality(s, Band{});
  EXPECT_NEAR(q.peak_freq, 0.133, s.bin_width());
}

TEST(Respiration, PeakToPeakExactOnQuarterCycleGrid) {
  const auto t = synth_respiration(0.25, 0.02, 60.0, 4.0, 0, 1);
  const auto [lo, hi] = std::minmax_element(t.samples.begin(), t.samples.end());
  EXPECT_NEAR(*hi - *lo, 0.02, 1e-9);
}

TEST(Respiration, HarmonicsStayBelowTenPercent) {
  RespirationOptions opt;
  opt.harmonics = 3;
  opt.harmonic_level = 0.5;
  opt.random_phase = true;
  const auto t = synth_respiration(0.2, 0.02, 60.0, 4.0, opt, 9);
  const auto plain = synth_respiration(0.2, 0.02, 60.0, 4.0, RespirationOptions{0, 0.0, 0.0, true}, 9);
  double worst = 0.0;
  for (std::size_t l = 0; l < t.size(); ++l) worst = std::max(worst, std::abs(t.samples[l] - plain.samples[l]));
  EXPECT_LE(worst, 3 * 0.1 * 0.01 + 1e-12);
}

TEST(Respiration, SeedControlsPhaseOnly) {
  RespirationOptions opt;
  opt.random_phase = true;
  const auto a = synth_respiration(0.133, 0.02, 60.0, 4.0, opt, 3);
  const auto b = synth_respiration(0.133, 0.02, 60.0, 4.0, opt, 3);
  const auto c = synth_respiration(0.133, 0.02, 60.0, 4.0, opt, 4);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
}

TEST(Respiration, NyquistViolationIsRejected) {
  EXPECT_THROW(synth_respiration(2.1, 0.02, 60.0, 4.0, 0, 1), InvalidArgument);
  EXPECT_THROW(synth_respiration(0.0, 0.02, 60.0, 4.0, 0, 1), InvalidArgument);
  EXPECT_THROW(synth_respiration(0.1, -1.0, 60.0, 4.0, 0, 1), InvalidArgument);
  EXPECT_THROW(synth_respiration(0.1, 0.02, 0.25, 4.0, 0, 1), InvalidArgument);
}

TEST(TraceCsv, TwoColumnFile) {
  std::ostringstream os;
  os << std::setprecision(17) << "index,front_radar_VS,side_radar_VS\n";
  for (int i = 0; i < 100; ++i) os << i << ',' << 0.5 * std::sin(0.1 * i) << ',' << 0.1 * std::sin(0.1 * i) << '\n';
  std::istringstream in(os.str());
  const TraceFile tf = read_trace_csv(in, 4.0);
  ASSERT_EQ(tf.front.size(), 100u);
  ASSERT_TRUE(tf.side.has_value());
  EXPECT_NEAR(tf.front.samples[10], 0.005 * std::sin(1.0), 1e-15);
  EXPECT_NEAR(gain_from_traces(tf.front, *tf.side), 0.2, 1e-12);
}

TEST(TraceCsv, HeaderOnlyHasNoSamples) {
  std::istringstream in("index,front_radar_VS,side_radar_VS\n");
  try {
    read_trace_csv(in, 4.0, "empty.csv");
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("no samples"), std::string::npos);
  }
}

TEST(TraceCsv, MissingColumnsAndBadNumbers) {
  std::istringstream wrong_header("index,value\n0,1\n1,2\n");
  EXPECT_THROW(read_trace_csv(wrong_header, 4.0), IngestError);
  std::istringstream short_row("index,front_radar_VS,side_radar_VS\n0,1\n");
  EXPECT_THROW(read_trace_csv(short_row, 4.0), IngestError);
  std::istringstream text("index,front_radar_VS\n0,1\n1,abc\n");
  try {
    read_trace_csv(text, 4.0, "t.csv");
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(TraceCsv, RoundTripProperty) {
  Gen g(31);
  for (int i = 0; i < 50; ++i) {
    const int n = g.integer(2, 300);
    DisplacementTrace f{{}, 4.0, "front"}, s{{}, 4.0, "side"};
    for (int k = 0; k < n; ++k) {
      f.samples.push_back(g.uniform(-0.05, 0.05));
      s.samples.push_back(g.uniform(-0.05, 0.05));
    }
    std::stringstream io;
    write_trace_csv(io, f, &s);
    const TraceFile back = read_trace_csv(io, 4.0);
    ASSERT_EQ(back.front.size(), f.size());
    for (int k = 0; k < n; ++k) {
      EXPECT_NEAR(back.front.samples[k], f.samples[k], 1e-12);
      EXPECT_NEAR(back.side->samples[k], s.samples[k], 1e-12);
    }
  }
}

TEST(AngleGain, ParametricAnchors) {
  const RcsModel m = RcsModel::parametric(1.0);
  EXPECT_DOUBLE_EQ(angle_gain(m, 0.0), 1.0);
  EXPECT_NEAR(angle_gain(m, deg2rad(78.75)), 0.1, 1e-12);
  EXPECT_GE(angle_gain(m, deg2rad(11.25)), 0.95);
  EXPECT_LE(angle_gain(m, kPi / 2.0), 0.05);
  EXPECT_THROW(angle_gain(m, deg2rad(91.0)), InvalidArgument);
  EXPECT_THROW(RcsModel::parametric(1.0, deg2rad(78.75), 1.5), InvalidArgument);
}

TEST(AngleGain, MonotoneNonIncreasing) {
  const RcsModel m = RcsModel::parametric(1.0);
  double prev = angle_gain(m, 0.0);
  for (int i = 1; i <= 900; ++i) {
    const double gcur = angle_gain(m, deg2rad(0.1 * i));
    EXPECT_LE(gcur, prev + 1e-15);
    prev = gcur;
  }
}

TEST(AngleGain, TableInterpolates) {
  const RcsModel m = RcsModel::measured(1.0, {{0.0, 1.0}, {deg2rad(45.0), 0.5}, {kPi / 2.0, 0.0}});
  EXPECT_NEAR(angle_gain(m, deg2rad(22.5)), 0.75, 1e-12);
  EXPECT_NEAR(angle_gain(m, deg2rad(67.5)), 0.25, 1e-12);
  EXPECT_THROW(RcsModel::measured(1.0, {{0.0, 1.0}, {deg2rad(45.0), 0.6}, {kPi / 2.0, 0.7}}), InvalidArgument);
  EXPECT_THROW(RcsModel::measured(1.0, {{0.0, 0.9}, {kPi / 2.0, 0.0}}), InvalidArgument);
}

TEST(RcsSeries, ConstantForStillTarget) {
  const DisplacementTrace still{std::vector<double>(50, 0.0), 4.0, ""};
  const CVector q = rcs_series(0.7, 0.3, still, 0.042);
  for (Eigen::Index l = 0; l < q.size(); ++l) EXPECT_NEAR(std::abs(q(l) - cd{0.7, 0.0}), 0.0, 1e-15);
}

TEST(RcsSeries, QuarterWavelengthIsHalfTurn) {
  const double lambda = 0.042;
  const DisplacementTrace t{{0.0, lambda / 4.0}, 4.0, ""};
  const CVector q = rcs_series(1.0, 1.0, t, lambda);
  EXPECT_NEAR(std::abs(q(1) - cd{-1.0, 0.0}), 0.0, 1e-12);
}

TEST(RcsSeries, MagnitudeAndExcursionRatio) {
  Gen g(32);
  const double lambda = kSpeedOfLight / 7.15e9;
  const auto t = synth_respiration(0.133, 0.002, 60.0, 4.0, 0, 1);
  for (int i = 0; i < 50; ++i) {
    const double q = g.uniform(0.1, 2.0), g1 = g.uniform(0.05, 1.0), g2 = g.uniform(0.05, 1.0);
    const CVector a = rcs_series(q, g1, t, lambda), b = rcs_series(q, g2, t, lambda);
    for (Eigen::Index l = 0; l < a.size(); ++l) EXPECT_NEAR(std::abs(a(l)), q, 1e-12);
    const auto da = phase_demodulate(a, lambda, 4.0, false), db = phase_demodulate(b, lambda, 4.0, false);
    const auto span = [](const DisplacementTrace& d) {
      const auto [lo, hi] = std::minmax_element(d.samples.begin(), d.samples.end());
      return *hi - *lo;
    };
    EXPECT_LE(rel_err(span(da) / span(db), g1 / g2), 1e-9);
  }
}

TEST(Distortion, ScalesWithAngularLoss) {
  const auto t = synth_respiration(0.133, 0.02, 60.0, 4.0, 0, 1);
  EXPECT_EQ(add_angle_distortion(t, 1.0, 0.01, 5).samples, t.samples);
  EXPECT_EQ(add_angle_distortion(t, 0.3, 0.0, 5).samples, t.samples);
  const auto a = add_angle_distortion(t, 0.9, 0.01, 5), b = add_angle_distortion(t, 0.1, 0.01, 5);
  double ea = 0.0, eb = 0.0;
  for (std::size_t l = 0; l < t.size(); ++l) {
    ea += std::pow(a.samples[l] - t.samples[l], 2);
    eb += std::pow(b.samples[l] - t.samples[l], 2);
  }
  EXPECT_NEAR(std::sqrt(eb / ea), 0.9 / 0.1, 1e-9);
}
