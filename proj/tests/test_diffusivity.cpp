#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tdm/diffusivity.hpp"
#include "tdm/phantom.hpp"

using namespace tdm;

TEST(GrayIndicator, EqualsOneAtTheMaximum) {
  const auto a = gray_indicator(ImageGrid(2, 1, std::vector<double>{0.7, 0.35}), 1.5, 0.7);
  EXPECT_DOUBLE_EQ(a[0], 1.0);
}

TEST(GrayIndicator, ZeroAtZeroIntensityForPositiveNu) {
  const auto a = gray_indicator(ImageGrid(2, 1, std::vector<double>{0.0, 0.5}), 2.0, 0.5);
  EXPECT_EQ(a[0], 0.0);
}

TEST(GrayIndicator, NuZeroIsIdentically_One) {
  const auto a = gray_indicator(ImageGrid(3, 1, std::vector<double>{0.0, 0.1, 0.9}), 0.0, 0.9);
  for (double v : a) EXPECT_EQ(v, 1.0);
}

TEST(GrayIndicator, DegenerateMaxGivesOne) {
  const auto a = gray_indicator(ImageGrid(2, 2, 0.0), 1.0, 0.0);
  for (double v : a) EXPECT_EQ(v, 1.0);
}

TEST(GrayIndicator, ThirdOfMaxWithNuOne) {
  const auto a = gray_indicator(ImageGrid(1, 1, 0.3 / 3.0), 1.0, 0.3);
  EXPECT_NEAR(a[0], 0.5, 1e-15);
}

TEST(GrayIndicator, NegativeNuRejected) {
  EXPECT_THROW(gray_indicator(ImageGrid(1, 1, 0.5), -1.0, 0.5), ParameterError);
}

TEST(GrayIndicator, ScaleInvariant) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    const auto g = oracle::random_grid(6, 6, rng);
    const double m = minmax(g).second;
    for (double c : {0.01, 3.0, 255.0}) {
      auto scaled = g;
      for (auto& v : scaled) v *= c;
      const auto a = gray_indicator(g, 1.3, m);
      const auto b = gray_indicator(scaled, 1.3, c * m);
      for (std::size_t k = 0; k < a.size(); ++k) ASSERT_NEAR(a[k], b[k], 1e-12);
    }
  }
}

TEST(ExponentField, AvgGrayOnConstantImage) {
  DiffusivityConfig cfg;
  cfg.exponent = AvgGrayExponent{2.2, 1.0};
  const auto p = exponent_field(ImageGrid(8, 8, 0.6), cfg);
  for (double v : p) EXPECT_NEAR(v, 1.2, 1e-14);
}

TEST(ExponentField, AvgGrayIsSpatiallyConstant) {
  DiffusivityConfig cfg;
  cfg.exponent = AvgGrayExponent{2.2, 2.0};
  const auto p = exponent_field(make_phantom(PhantomKind::Circle, 64, 64), cfg);
  for (double v : p) EXPECT_EQ(v, p[0]);
  EXPECT_GT(p[0], 1.2);
  EXPECT_LT(p[0], 2.2);
}

TEST(ExponentField, GrayAtMaxAndZero) {
  DiffusivityConfig cfg;
  cfg.exponent = GrayExponent{2.6, 2.0};
  const auto p = exponent_field(ImageGrid(2, 1, std::vector<double>{0.0, 0.8}), cfg);
  EXPECT_DOUBLE_EQ(p[0], 2.6);
  EXPECT_DOUBLE_EQ(p[1], 1.6);
}

TEST(ExponentField, GradFlatAndUnitScaledGradient) {
  DiffusivityConfig cfg;
  cfg.exponent = GradExponent{2.0, 2.0, std::nullopt};
  const auto flat = exponent_field(ImageGrid(6, 6, 0.4), cfg);
  for (double v : flat) EXPECT_DOUBLE_EQ(v, 0.0);

  // Ramp with slope s: interior smoothed gradient is s, so k s^2 = 1 gives p0 - 1.
  const double k = 2.0;
  const double s = 1.0 / std::sqrt(k);
  ImageGrid ramp(20, 8);
  for (std::size_t j = 0; j < ramp.height(); ++j)
    for (std::size_t i = 0; i < ramp.width(); ++i) ramp(i, j) = s * static_cast<double>(i);
  const auto p = exponent_field(ramp, cfg);
  EXPECT_NEAR(p(10, 4), 1.0, 1e-12);
}

TEST(ExponentField, GradWithSeparateSigma) {
  DiffusivityConfig cfg;
  cfg.exponent = GradExponent{2.0, 1.0, 2.0};
  std::mt19937_64 rng(2);
  const auto img = oracle::random_grid(16, 16, rng);
  const auto p = exponent_field(img, cfg);
  const auto grad = smoothed_gradient(img, 2.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double s2 = grad.gx[k] * grad.gx[k] + grad.gy[k] * grad.gy[k];
    EXPECT_NEAR(p[k], 2.0 - 2.0 / (1.0 + s2), 1e-14);
  }
}

TEST(DiffusivityField, FlatPixelGivesEpsilonPlusIndicator) {
  DiffusivityConfig cfg;
  cfg.nu = 1.0;
  cfg.exponent = ConstantExponent{2.0};
  const auto f = diffusivity_field(ImageGrid(8, 8, 0.5), cfg);
  for (std::size_t k = 0; k < f.g.size(); ++k) EXPECT_DOUBLE_EQ(f.g[k], cfg.epsilon + f.a[k]);
}

// Holds whenever the exponent is positive; Grad with p0 = 2 is the 0^0 case below.
TEST(DiffusivityField, ConstantImageNuZeroAnyKind) {
  for (const ExponentKind& kind : {ExponentKind{ConstantExponent{1.5}}, ExponentKind{AvgGrayExponent{2.2, 1.0}},
                                   ExponentKind{GrayExponent{2.6, 2.0}}, ExponentKind{GradExponent{2.5, 2.0, {}}}}) {
    DiffusivityConfig cfg;
    cfg.exponent = kind;
    const auto f = diffusivity_field(ImageGrid(8, 8, 0.3), cfg);
    for (double g : f.g) EXPECT_DOUBLE_EQ(g, 1.0 + cfg.epsilon) << exponent_name(kind);
  }
}

// Zero gradient with p exactly 0 uses 0^0 = 1, i.e. the edge factor is 1/2.
TEST(DiffusivityField, ZeroToTheZeroIsOne) {
  DiffusivityConfig cfg;
  cfg.exponent = GradExponent{2.0, 1.0, {}};  // flat image -> p = 0
  const auto f = diffusivity_field(ImageGrid(6, 6, 0.5), cfg);
  for (std::size_t k = 0; k < f.g.size(); ++k) {
    EXPECT_EQ(f.p[k], 0.0);
    EXPECT_DOUBLE_EQ(f.g[k], cfg.epsilon + 0.5);
  }
}

// Edge factor 1 / (1 + (s/K)^p) evaluated over s in {0, K, 2K, 4K} by
// building ramps whose interior smoothed gradient is exactly s.
TEST(DiffusivityField, NonIncreasingInGradient) {
  DiffusivityConfig cfg;
  cfg.K = 0.05;
  cfg.exponent = ConstantExponent{1.7};
  double previous = 2.0;
  for (double mult : {0.0, 1.0, 2.0, 4.0}) {
    const double s = mult * cfg.K;
    ImageGrid ramp(20, 10);
    for (std::size_t j = 0; j < ramp.height(); ++j)
      for (std::size_t i = 0; i < ramp.width(); ++i) ramp(i, j) = 0.1 + s * static_cast<double>(i);
    const auto f = diffusivity_field(ramp, cfg);
    const double g = f.g(10, 5);
    EXPECT_NEAR(g, cfg.epsilon + 1.0 / (1.0 + std::pow(mult, 1.7)), 1e-12);
    EXPECT_LE(g, previous);
    previous = g;
  }
}

TEST(DiffusivityConstantP, CatteReduction) {
  std::mt19937_64 rng(31);
  const auto img = oracle::random_grid(12, 12, rng);
  const double K = 0.2;
  const auto f = diffusivity_constant_p(img, 0.0, K, 2.0);
  const auto mag = smoothed_gradient(img, 1.0).magnitude();
  for (std::size_t k = 0; k < img.size(); ++k) {
    EXPECT_NEAR(f.g[k], 1.0 / (1.0 + (mag[k] / K) * (mag[k] / K)), 1e-14);
  }
}

TEST(DiffusivityConstantP, GradientEqualToKHalvesTheEdgeFactor) {
  const double K = 0.1;
  ImageGrid ramp(20, 6);
  for (std::size_t j = 0; j < ramp.height(); ++j)
    for (std::size_t i = 0; i < ramp.width(); ++i) ramp(i, j) = 0.2 + K * static_cast<double>(i);
  const auto f = diffusivity_constant_p(ramp, 0.0, K, 1.3);
  EXPECT_NEAR(f.g(10, 3), 0.5, 1e-12);
}

TEST(DiffusivityConstantP, IndicatorHalfAtThirdOfMax) {
  // Smoothed constant 0.1 next to smoothed max 0.3: use a grid with two flat
  // halves wide enough that both plateaus survive smoothing.
  ImageGrid g(40, 8, 0.1);
  for (std::size_t j = 0; j < g.height(); ++j)
    for (std::size_t i = 20; i < g.width(); ++i) g(i, j) = 0.3;
  const auto f = diffusivity_constant_p(g, 1.0, 0.1, 2.0);
  EXPECT_NEAR(f.a(2, 4), 0.5, 1e-12);
  EXPECT_NEAR(f.a(37, 4), 1.0, 1e-12);
}

TEST(DiffusivityConfig, Validation) {
  DiffusivityConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = ok;
  bad.epsilon = 0.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  EXPECT_NO_THROW(bad.validate(true));
  bad = ok;
  bad.K = 0.0;
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = ok;
  bad.exponent = ConstantExponent{4.5};
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = ok;
  bad.exponent = AvgGrayExponent{2.0, 0.0};
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = ok;
  bad.exponent = GradExponent{2.0, -1.0, {}};
  EXPECT_THROW(bad.validate(), ParameterError);
  bad = ok;
  bad.nu = -0.5;
  EXPECT_THROW(bad.validate(), ParameterError);
}

// Bounds eps <= g <= 1 + eps, a in [0, 1], p in [p0 - 2, p0] on random data.
TEST(DiffusivityField, BoundsHoldOnRandomImages) {
  std::mt19937_64 rng(77);
  const std::vector<ExponentKind> kinds{ConstantExponent{1.5}, AvgGrayExponent{2.2, 1.0}, GrayExponent{2.6, 2.0},
                                        GradExponent{1.9, 2.0, {}}};
  for (int t = 0; t < 20; ++t) {
    const auto img = oracle::random_grid(16, 16, rng, 0.01, 1.0);
    for (const auto& kind : kinds) {
      DiffusivityConfig cfg;
      cfg.nu = 1.0;
      cfg.exponent = kind;
      const auto f = diffusivity_field(img, cfg);
      const double p0 = base_exponent(kind);
      for (std::size_t k = 0; k < img.size(); ++k) {
        ASSERT_GE(f.g[k], cfg.epsilon);
        ASSERT_LE(f.g[k], 1.0 + cfg.epsilon);
        ASSERT_GE(f.a[k], 0.0);
        ASSERT_LE(f.a[k], 1.0);
        ASSERT_GE(f.p[k], p0 - 2.0);
        ASSERT_LE(f.p[k], p0);
      }
    }
  }
}
