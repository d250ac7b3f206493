#include <gtest/gtest.h>

#include <cmath>

#include "pref/errors.hpp"
#include "pref/phasor_volume.hpp"
#include "pref/transform.hpp"
#include "pref/verify/oracles.hpp"

using namespace pref;

namespace {

SampleGrid constant_field(std::vector<int> extents, double value) {
  SampleGrid grid(std::move(extents), 1);
  for (double& v : grid.values) v = value;
  return grid;
}

}  // namespace

TEST(PhasorVolume, ZeroInitEvaluatesToZero) {
  const auto layout = FrequencyLayout::uniform(2, 8, 3);
  const PhasorVolume v = new_volume(layout, 1);
  Rng rng(1);
  const Matrix coords = verify::random_coords(64, 2, rng);
  EXPECT_EQ(eval_exact(v, coords).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(eval_fast(v, coords).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PhasorVolume, FactorShapes3d) {
  const auto layout = FrequencyLayout::uniform(3, 16, 4);
  const PhasorVolume v = new_volume(layout, 16);
  EXPECT_EQ(v.factor(0).size(), 16u * 4 * 16 * 16);
  EXPECT_EQ(v.factor(1).size(), 16u * 16 * 4 * 16);
  EXPECT_EQ(v.factor(2).size(), 16u * 16 * 16 * 4);
  EXPECT_EQ(v.coefficients().size(), 3u * 16 * 4 * 16 * 16);
  EXPECT_EQ(v.parameter_count(), 2 * v.coefficients().size());
}

TEST(PhasorVolume, ConstantFieldInitIsDcOnly) {
  const auto layout = FrequencyLayout::uniform(2, 8, 3);
  const PhasorVolume v = new_volume(layout, 2, FromField{constant_field({8, 8}, 0.7)});
  const Extents dc{0, 0, 0};
  for (int a = 0; a < 2; ++a) {
    for (int c = 0; c < 2; ++c) {
      const auto f = v.factor(a);
      for (std::size_t i = 0; i < f.size(); ++i) {
        const bool is_dc = i == v.index(a, c, dc) - v.factor_offset(a);
        if (!is_dc && (i / layout.factor_size(a)) == static_cast<std::size_t>(c)) {
          EXPECT_LT(std::abs(f[i]), 1e-15);
        }
      }
      // The constant splits evenly across the two factors.
      EXPECT_NEAR(v.coefficient(a, c, dc).real(), 0.35, 1e-15);
    }
  }
  Rng rng(2);
  const Matrix values = eval_fast(v, verify::random_coords(32, 2, rng));
  EXPECT_LT((values.array() - 0.7).abs().maxCoeff(), 1e-14);
}

TEST(PhasorVolume, FromFieldRejectsMismatchedGrid) {
  const auto layout = FrequencyLayout::uniform(2, 8, 3);
  EXPECT_THROW(new_volume(layout, 1, FromField{constant_field({8, 16}, 1.0)}), DimensionError);
  EXPECT_THROW(new_volume(layout, 0), DomainError);
}

TEST(PhasorVolume, RandomInitIsSeededAndFloatExact) {
  const auto layout = FrequencyLayout::uniform(2, 16, 3);
  const PhasorVolume a = new_volume(layout, 4, RandomInit{0.1, 5});
  const PhasorVolume b = new_volume(layout, 4, RandomInit{0.1, 5});
  const PhasorVolume c = new_volume(layout, 4, RandomInit{0.1, 6});
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  for (const Complex& z : a.coefficients()) {
    EXPECT_EQ(z.real(), static_cast<double>(static_cast<float>(z.real())));
    EXPECT_EQ(z.imag(), static_cast<double>(static_cast<float>(z.imag())));
  }
  // Feature standard deviation is close to the requested one.
  const SampleGrid field = dense_field(a, 32);
  double sum2 = 0.0;
  for (double x : field.values) sum2 += x * x;
  EXPECT_NEAR(std::sqrt(sum2 / field.values.size()), 0.1, 0.02);
}

TEST(GaussianFilter, ZeroSigmaIsIdentity) {
  Rng rng(3);
  const PhasorVolume v = verify::random_volume(FrequencyLayout::uniform(3, 8, 3), 2, rng);
  EXPECT_TRUE(gaussian_filter(v, 0.0) == v);
}

TEST(GaussianFilter, DcIsUnchanged) {
  Rng rng(4);
  const PhasorVolume v = verify::random_volume(FrequencyLayout::uniform(2, 16, 4), 3, rng);
  const PhasorVolume f = gaussian_filter(v, 3.0);
  for (int a = 0; a < 2; ++a) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(f.coefficient(a, c, {0, 0, 0}), v.coefficient(a, c, {0, 0, 0}));
  }
}

TEST(GaussianFilter, ScalesByGaussianOfNormalizedFrequency) {
  const auto layout = FrequencyLayout::uniform(2, 8, 3);
  PhasorVolume v = new_volume(layout, 1);
  // Frequency -4 on axis 0 (index 4 in FFT order); |u / N| = 1/2.
  v.set_coefficient(1, 0, {4, 0, 0}, Complex(1.0, 0.0));
  const PhasorVolume f = gaussian_filter(v, 2.0);
  EXPECT_NEAR(std::abs(f.coefficient(1, 0, {4, 0, 0})), std::exp(-1.0), 1e-15);
}

TEST(GaussianFilter, RejectsNegativeSigma) {
  const PhasorVolume v = new_volume(FrequencyLayout::uniform(2, 8, 3), 1);
  EXPECT_THROW(gaussian_filter(v, -1.0), DomainError);
  EXPECT_THROW(gaussian_filter(v, std::nan("")), DomainError);
}

TEST(GaussianFilter, SemigroupAndEnergyDecayProperties) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int dims = 2 + static_cast<int>(rng.index(2));
    const int n = 8 << rng.index(2);
    const auto layout = FrequencyLayout::uniform(dims, n, 2 + static_cast<int>(rng.index(2)));
    const PhasorVolume v = verify::random_volume(layout, 1 + static_cast<int>(rng.index(3)), rng);
    const double s1 = rng.uniform(0.0, 3.0);
    const double s2 = rng.uniform(0.0, 3.0);
    const PhasorVolume twice = gaussian_filter(gaussian_filter(v, s1), s2);
    const PhasorVolume once = gaussian_filter(v, std::hypot(s1, s2));
    double max_diff = 0.0;
    for (std::size_t i = 0; i < v.coefficients().size(); ++i) {
      max_diff = std::max(max_diff, std::abs(twice.coefficients()[i] - once.coefficients()[i]));
    }
    EXPECT_LT(max_diff, 1e-6);
    EXPECT_LE(coefficient_energy(gaussian_filter(v, s1)), coefficient_energy(v));
  }
}

TEST(GaussianFilter, HighBandEnergyDecreasesWithSigma) {
  Rng rng(12);
  const PhasorVolume v = verify::random_volume(FrequencyLayout::uniform(3, 16, 4), 2, rng);
  double previous = high_band_energy(v, 4);
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    const double e = high_band_energy(gaussian_filter(v, sigma), 4);
    EXPECT_LT(e, previous);
    previous = e;
  }
}

TEST(PhasorVolume, EvaluationIsLinearInCoefficients) {
  Rng rng(13);
  const auto layout = FrequencyLayout::uniform(2, 16, 3);
  const PhasorVolume p1 = verify::random_volume(layout, 2, rng);
  const PhasorVolume p2 = verify::random_volume(layout, 2, rng);
  const double alpha = 0.7;
  const double beta = -1.3;
  PhasorVolume mix = new_volume(layout, 2);
  auto m = mix.mutable_coefficients();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = alpha * p1.coefficients()[i] + beta * p2.coefficients()[i];
  const Matrix coords = verify::random_coords(200, 2, rng);
  const Matrix expected = alpha * eval_fast(p1, coords) + beta * eval_fast(p2, coords);
  EXPECT_LT(verify::relative_error(eval_fast(mix, coords), expected), 1e-6);
}

TEST(PhasorVolume, WritesBumpTheRevision) {
  PhasorVolume v = new_volume(FrequencyLayout::uniform(2, 8, 3), 1);
  const auto r0 = v.revision();
  v.set_coefficient(0, 0, {1, 1, 0}, Complex(1.0, 0.0));
  const auto r1 = v.revision();
  EXPECT_NE(r0, r1);
  v.mutable_coefficients();
  EXPECT_NE(r1, v.revision());
}
