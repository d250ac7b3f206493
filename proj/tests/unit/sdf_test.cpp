#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pref/errors.hpp"
#include "pref/tasks/geometry.hpp"
#include "pref/tasks/sdf.hpp"
#include "pref/transform.hpp"

using namespace pref;
using namespace pref::tasks;

namespace {

// Sphere of radius 0.5 with a ripple of the given amplitude.
double bumpy_sphere(const Vec3& p, double amplitude) {
  const double r = p.norm();
  if (r == 0.0) return -0.5;
  const Vec3 d = p / r;
  return r - 0.5 - amplitude * std::sin(6.0 * d.x()) * std::sin(6.0 * d.y()) * std::sin(6.0 * d.z());
}

// Single-channel checkpoint whose decoder is the identity, so the field is
// the phasor volume itself, initialized from `sdf` sampled on the lattice.
Checkpoint field_checkpoint(int n, int d, double amplitude) {
  const auto layout = FrequencyLayout::uniform(3, n, d);
  SampleGrid grid({n, n, n}, 1);
  std::size_t i = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        const Vec3 unit(static_cast<double>(a) / n, static_cast<double>(b) / n, static_cast<double>(c) / n);
        grid.values[i++] = bumpy_sphere((unit.array() - 0.5) / kSdfDomainScale, amplitude);
      }
    }
  }
  Layer identity;
  identity.weight = Matrix::Ones(1, 1);
  identity.bias = Vector::Zero(1);
  return Checkpoint{new_volume(layout, 1, FromField{grid}), MlpParams({identity}), {TaskKind::Sdf, 0, {}}};
}

}  // namespace

TEST(SdfDomain, MapsThePhysicalCubeInsideTheUnitDomain) {
  Matrix p(2, 3);
  p << -1, 0, 1, 0.5, -0.5, 0;
  const Matrix u = to_unit_domain(p);
  EXPECT_DOUBLE_EQ(u(0, 0), 0.1);
  EXPECT_DOUBLE_EQ(u(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(u(0, 2), 0.9);
  EXPECT_DOUBLE_EQ(u(1, 0), 0.7);
}

TEST(SdfSmooth, ZeroSigmaIsAnExactCopy) {
  const Checkpoint c = field_checkpoint(16, 3, 0.03);
  const Checkpoint s = sdf_smooth(c, 0.0);
  EXPECT_TRUE(s.encoder == c.encoder);
  EXPECT_TRUE(s.mlp == c.mlp);
  EXPECT_EQ(s.metadata, c.metadata);
}

TEST(SdfSmooth, HighBandEnergyDecreasesWithSigma) {
  const Checkpoint c = field_checkpoint(16, 3, 0.03);
  double previous = high_band_energy(std::get<PhasorVolume>(c.encoder), 2);
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    const Checkpoint s = sdf_smooth(c, sigma);
    const double e = high_band_energy(std::get<PhasorVolume>(s.encoder), 2);
    EXPECT_LT(e, previous) << sigma;
    previous = e;
    for (const Complex& z : std::get<PhasorVolume>(s.encoder).coefficients()) {
      EXPECT_EQ(z.real(), static_cast<double>(static_cast<float>(z.real())));
    }
  }
}

TEST(SdfSmooth, RejectsDenseGridCheckpoints) {
  Checkpoint c{DenseGrid(3, {4, 4, 4}, 1), field_checkpoint(16, 3, 0.0).mlp, {}};
  EXPECT_THROW(sdf_smooth(c, 1.0), UsageError);
}

TEST(SdfSmooth, RemovesRipplesFromTheExtractedSurface) {
  const Checkpoint bumpy = field_checkpoint(64, 6, 0.05);
  auto radial_deviation = [](const Checkpoint& c) {
    const Mesh m = marching_cubes(checkpoint_sampler(c), 64);
    double sum = 0.0;
    double sum2 = 0.0;
    for (const Vec3& v : m.vertices) {
      sum += v.norm();
      sum2 += v.squaredNorm();
    }
    const double n = static_cast<double>(m.vertices.size());
    return std::sqrt(std::max(0.0, sum2 / n - (sum / n) * (sum / n)));
  };
  // Spread of vertex radii about their mean; blurring also shrinks the mean radius.
  double previous = radial_deviation(bumpy);
  const double before = previous;
  for (double sigma : {1.0, 2.0, 4.0, 8.0}) {
    const double spread = radial_deviation(sdf_smooth(bumpy, sigma));
    EXPECT_LT(spread, previous) << sigma;
    previous = spread;
  }
  EXPECT_LT(previous, 0.6 * before);
}

TEST(SdfFit, SphereFromFreshSamplesReducesTheError) {
  const SphereShape sphere(0.5);
  SdfFitConfig config;
  config.resolution = 16;
  config.reduced = 3;
  config.channels = 8;
  config.init_std = 0.01;
  config.batch_size = 2048;
  config.epoch_samples = 8192;
  config.fit.loss = LossKind::L1;
  config.fit.iterations = 150;
  config.fit.lr = 1e-3;
  config.fit.lr_schedule = LrSchedule{};
  config.fit.log_every = 50;
  const SdfFitResult r = sdf_fit(sphere, config);
  ASSERT_EQ(r.log.size(), 3u);
  EXPECT_LT(r.log.back().metric, r.log.front().metric);
  EXPECT_LT(r.log.back().metric, 0.05);
  EXPECT_EQ(r.checkpoint.metadata.task, TaskKind::Sdf);
  const Vector origin = checkpoint_sampler(r.checkpoint)(Matrix::Zero(1, 3));
  EXPECT_LT(origin(0), 0.0);
}
