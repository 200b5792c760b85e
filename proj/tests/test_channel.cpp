#include "risvs/channel.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

using namespace risvs;
using risvs::testing::Gen;

namespace {

CMatrix some_los(int r, int c) {
  Gen g(3);
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = g.complex();
  return m;
}

ChannelRealization random_realization(Gen& g, int m = 5, int n = 16) {
  ChannelRealization ch;
  ch.incident.resize(m, n);
  for (Eigen::Index i = 0; i < ch.incident.size(); ++i) ch.incident(i) = g.complex();
  ch.target = g.cvector(n);
  ch.direct = g.cvector(m);
  Rng r(g.rng());
  ch.clutter = clutter_draw(0.3, r, m);
  std::vector<double> ph;
  for (int i = 0; i < n; ++i) ph.push_back(g.uniform(0.0, kTwoPi));
  ch.ris_diag = reflection_diagonal(ph);
  return ch;
}

double second_singular_ratio(const CMatrix& h) {
  Eigen::JacobiSVD<CMatrix> svd(h);
  const auto& s = svd.singularValues();
  return s(1) / s(0);
}

}  // namespace

TEST(Rician, HugeKReturnsLos) {
  const CMatrix los = some_los(4, 3);
  const CMatrix h = rician_draw(RicianSpec{1e12, los}, 7);
  EXPECT_LE((h - los).norm() / los.norm(), 1e-6);
}

TEST(Rician, PureScatterHasUnitVariance) {
  const CMatrix los = CMatrix::Zero(1, 100000);
  const CMatrix h = rician_draw(RicianSpec{0.0, los}, 8);
  const double var = h.squaredNorm() / static_cast<double>(h.size());
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(Rician, TenDbKeepsLosPowerFraction) {
  const double k = db2lin(10.0);
  EXPECT_NEAR(k / (k + 1.0), 0.9090909090909091, 1e-15);
  // Sample mean over many draws converges to √(K/(K+1))·LoS.
  const CMatrix los = some_los(2, 2);
  const int draws = 100000;
  Rng rng(9);
  CMatrix acc = CMatrix::Zero(2, 2);
  for (int i = 0; i < draws; ++i) acc += rician_draw(RicianSpec{k, los}, rng);
  acc /= static_cast<double>(draws);
  const double se = std::sqrt(1.0 / (k + 1.0) / draws);  // std error per entry (complex magnitude scale)
  for (Eigen::Index i = 0; i < los.size(); ++i)
    EXPECT_LE(std::abs(acc(i) - std::sqrt(k / (k + 1.0)) * los(i)), 3.0 * se * std::sqrt(2.0));
}

TEST(Rician, DeterministicPerSeed) {
  const CMatrix los = some_los(3, 3);
  EXPECT_EQ(rician_draw(RicianSpec{10.0, los}, 42), rician_draw(RicianSpec{10.0, los}, 42));
  EXPECT_NE(rician_draw(RicianSpec{10.0, los}, 42), rician_draw(RicianSpec{10.0, los}, 43));
}

TEST(Rician, ScaledDrawKeepsLinkMagnitude) {
  // |LoS| scaling: the mean power per entry equals |LoS|² for any K.
  CMatrix los(1, 1);
  los(0, 0) = std::polar(1e-3, 0.7);
  Rng rng(10);
  double acc = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) acc += std::norm(rician_draw_scaled(los, db2lin(10.0), rng)(0, 0));
  EXPECT_NEAR(acc / n / 1e-6, 1.0, 0.02);
}

TEST(FreeSpace, ThreeMetreDirectLink) {
  const double lambda = wavelength(7.15e9);
  EXPECT_NEAR(lambda, 0.04193, 1e-5);
  EXPECT_NEAR(std::abs(free_space(3.0, lambda)), lambda / (4.0 * kPi * 3.0), 1e-18);
  EXPECT_NEAR(std::abs(free_space(3.0, lambda)), 1.112e-3, 1e-6);
}

TEST(FreeSpace, DoublingDistanceHalvesMagnitude) {
  Gen g(14);
  const double lambda = 0.0419;
  for (int i = 0; i < 100; ++i) {
    const double d = g.uniform(0.1, 20.0);
    const cd a = free_space(d, lambda), b = free_space(2.0 * d, lambda);
    EXPECT_NEAR(std::abs(b) / std::abs(a), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(b / std::abs(b) - std::polar(1.0, -kTwoPi * 2.0 * d / lambda)), 0.0, 1e-9);
  }
  EXPECT_THROW(free_space(0.0, lambda), InvalidGeometry);
}

TEST(LosChannel, DirectLinkMatchesHandValue) {
  const Placement p = default_placement();
  const double lambda = wavelength(7.15e9);
  const ArrayConfig cfg = ArrayConfig::half_wavelength(5, lambda);
  const RisConfig ris = make_ris_grid(10, 10, lambda / 2.0, p.ris_center, p.ris_normal);
  const LosChannels los = los_channel(p, cfg, ris);
  EXPECT_NEAR(std::abs(los.direct(0)), lambda / (4.0 * kPi * 3.0), 1e-15);
  EXPECT_EQ(los.incident.rows(), 5);
  EXPECT_EQ(los.incident.cols(), 100);
  EXPECT_EQ(los.target.size(), 100);
}

TEST(LosChannel, ApertureGainScalesRisLegs) {
  const Placement p = default_placement();
  const double lambda = wavelength(7.15e9);
  const ArrayConfig cfg = ArrayConfig::half_wavelength(5, lambda);
  RisConfig ris = make_ris_grid(10, 10, lambda / 2.0, p.ris_center, p.ris_normal);
  const LosChannels with = los_channel(p, cfg, ris);
  ris.aperture_gain = false;
  const LosChannels without = los_channel(p, cfg, ris);
  EXPECT_NEAR(ris.element_gain(lambda), 1.0, 0.0);
  ris.aperture_gain = true;
  EXPECT_NEAR(ris.element_gain(lambda), kPi, 1e-12);  // 4π(λ/2)²/λ²
  EXPECT_NEAR(std::abs(with.target(3)) / std::abs(without.target(3)), std::sqrt(kPi), 1e-12);
  EXPECT_EQ(with.direct, without.direct);
}

TEST(LosChannel, SymmetricElementsGetEqualMagnitudes) {
  Placement p = default_placement();
  p.target_position = p.ris_center - 2.0 * p.ris_normal;  // on the panel axis
  p.chest_normal = p.chest_toward(p.ris_center);
  const double lambda = 0.04;
  const RisConfig ris = make_ris_grid(1, 2, lambda / 2.0, p.ris_center, p.ris_normal);
  const LosChannels los = los_channel(p, ArrayConfig::half_wavelength(2, lambda), ris);
  EXPECT_NEAR(std::abs(los.target(0)), std::abs(los.target(1)), 1e-15);
}

TEST(RisGrid, PanelGeometry) {
  const RisConfig ris = make_ris_grid(10, 10, 0.021, {2.707, 1.4606, 1.0}, {0.0, -1.0, 0.0});
  EXPECT_EQ(ris.size(), 100);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& e : ris.element_positions) {
    mean += e;
    EXPECT_NEAR(e.y(), 1.4606, 1e-12);  // in the panel plane
  }
  mean /= 100.0;
  EXPECT_NEAR((mean - Vec3(2.707, 1.4606, 1.0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((ris.element_positions[1] - ris.element_positions[0]).norm(), 0.021, 1e-12);
}

TEST(Focus, SingleElementUsesFormula) {
  const Vec3 radar{0, 0, 1}, target{3, 0, 1};
  const RisConfig ris = make_ris_grid(1, 1, 0.02, {2.0, 1.0, 1.0}, {0.0, -1.0, 0.0});
  const double lambda = 0.04;
  const auto ph = ris_focus_profile(radar, target, ris, lambda);
  const double path = (radar - ris.element_positions[0]).norm() + (ris.element_positions[0] - target).norm();
  EXPECT_NEAR(ph[0], std::fmod(kTwoPi * path / lambda, kTwoPi), 1e-9);
}

TEST(Focus, EquidistantElementsShareAPhase) {
  // Radar and target both on the panel axis: the two elements are mirror images.
  const Vec3 center{0.0, 2.0, 1.0};
  const Vec3 normal{0.0, -1.0, 0.0};
  const RisConfig ris = make_ris_grid(1, 2, 0.02, center, normal);
  const auto ph = ris_focus_profile(Vec3{0.0, 0.0, 1.0}, Vec3{0.0, 0.5, 1.0}, ris, 0.04);
  EXPECT_NEAR(ph[0], ph[1], 1e-9);
}

TEST(Focus, PhasesLieInRangeAndQuantize) {
  const Placement p = default_placement();
  RisConfig ris = make_ris_grid(10, 10, 0.021, p.ris_center, p.ris_normal);
  ris.phase_bits = 2;
  for (double ph : ris_focus_profile(p, ris, 0.042)) {
    EXPECT_GE(ph, 0.0);
    EXPECT_LT(ph, kTwoPi);
    const double q = ph / (kPi / 2.0);
    EXPECT_NEAR(q, std::round(q), 1e-9);
  }
}

TEST(Focus, BeatsRandomProfiles) {
  const Placement p = default_placement();
  const double lambda = wavelength(7.15e9);
  const ArrayConfig cfg = ArrayConfig::half_wavelength(5, lambda);
  RisConfig ris = make_ris_grid(10, 10, lambda / 2.0, p.ris_center, p.ris_normal);
  const LosChannels los = los_channel(p, cfg, ris);
  const CVector a_ris = ula_steering(cfg, angles_from_placement(p).theta_ris).entries;
  auto gain = [&](const std::vector<double>& ph) {
    const CVector v = los.incident * reflection_diagonal(ph).cwiseProduct(los.target);
    return std::abs((a_ris.transpose() * v)(0));
  };
  const double focused = gain(ris_focus_profile(p, ris, lambda));
  Gen g(15);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> ph(100);
    for (double& x : ph) x = g.uniform(0.0, kTwoPi);
    EXPECT_GT(focused, gain(ph));
  }
}

TEST(Gamma, UnitModulusDiagonal) {
  Gen g(16);
  std::vector<double> ph;
  for (int i = 0; i < 50; ++i) ph.push_back(g.uniform(0.0, kTwoPi));
  ChannelRealization ch;
  ch.ris_diag = reflection_diagonal(ph);
  const CMatrix gm = ch.gamma_matrix();
  for (int r = 0; r < 50; ++r)
    for (int c = 0; c < 50; ++c) {
      if (r == c) EXPECT_NEAR(std::abs(gm(r, c)), 1.0, 1e-12);
      else EXPECT_EQ(gm(r, c), cd(0.0, 0.0));
    }
}

TEST(Assemble, TermIsolation) {
  Gen g(17);
  ChannelRealization ch = random_realization(g);
  const CMatrix clutter = ch.clutter;
  ch.clutter.setZero();
  const cd beta{0.3, -0.2}, alpha{-0.1, 0.5};
  const CMatrix hd = assemble_end_to_end(ch, 0.0, beta);
  EXPECT_LE((hd - beta * ch.direct * ch.direct.transpose()).norm(), 1e-12 * hd.norm());
  EXPECT_LT(second_singular_ratio(hd), 1e-10);
  const CMatrix hr = assemble_end_to_end(ch, alpha, 0.0);
  EXPECT_LT(second_singular_ratio(hr), 1e-10);
  ch.clutter = clutter;
  EXPECT_EQ(assemble_end_to_end(ch, 0.0, 0.0), clutter);
}

TEST(Assemble, CascadeMatchesMatrixForm) {
  Gen g(18);
  const ChannelRealization ch = random_realization(g);
  const CVector v = ch.incident * ch.gamma_matrix() * ch.target;
  EXPECT_LE((v - ch.cascade()).norm(), 1e-12 * v.norm());
}

TEST(Assemble, ReciprocityGivesSymmetricChannel) {
  Gen g(19);
  for (int i = 0; i < 50; ++i) {
    const ChannelRealization ch = random_realization(g);
    const CMatrix h = assemble_end_to_end(ch, g.complex(), g.complex());
    EXPECT_LE((h - h.transpose()).norm(), 1e-12 * h.norm());
  }
}

TEST(Assemble, ShapeMismatchThrows) {
  Gen g(20);
  ChannelRealization ch = random_realization(g);
  ch.target = g.cvector(3);
  EXPECT_THROW(assemble_end_to_end(ch, 1.0, 1.0), ShapeMismatch);
}

TEST(Clutter, ZeroStrengthAndDeterminism) {
  EXPECT_EQ(clutter_draw(0.0, 5, 4), CMatrix::Zero(4, 4));
  EXPECT_EQ(clutter_draw(0.2, 5, 4), clutter_draw(0.2, 5, 4));
  const CMatrix c = clutter_draw(0.2, 6, 4);
  EXPECT_EQ(c, c.transpose());
  EXPECT_THROW(clutter_draw(-1.0, 5, 4), InvalidArgument);
}

TEST(Clutter, PerEntryVariance) {
  double acc = 0.0;
  const int seeds = 100000;
  for (int s = 0; s < seeds; ++s) acc += std::norm(clutter_draw(0.25, static_cast<std::uint64_t>(s), 2)(0, 1));
  EXPECT_NEAR(acc / seeds / 0.25, 1.0, 0.03);
}
