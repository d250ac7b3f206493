#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pref/checkpoint.hpp"
#include "pref/tasks/image.hpp"
#include "pref/tasks/mesh.hpp"
#include "pref/train.hpp"

namespace pref::tasks {

// Physical SDF coordinates p in [-1, 1]^3 map to the encoder's periodic unit
// domain as 0.5 + 0.4 p, keeping a margin so the periodic seam never crosses
// the shape.
inline constexpr double kSdfDomainScale = 0.4;
Matrix to_unit_domain(const Matrix& points);

// Signed distance of each row of a [B, 3] point matrix in [-1, 1]^3; negative inside.
using FieldSampler = std::function<Vector(const Matrix& points)>;

class SdfShape {
 public:
  virtual ~SdfShape() = default;
  virtual double signed_distance(const Vec3& p) const = 0;
  virtual std::vector<Vec3> surface_samples(int count, Rng& rng) const = 0;
};

class SphereShape final : public SdfShape {
 public:
  SphereShape(double radius, const Vec3& center = Vec3::Zero()) : radius_(radius), center_(center) {}
  double signed_distance(const Vec3& p) const override { return (p - center_).norm() - radius_; }
  std::vector<Vec3> surface_samples(int count, Rng& rng) const override;

 private:
  double radius_;
  Vec3 center_;
};

// Exact point-to-mesh distance, signed by winding number (ray-parity vote
// when the mesh is not watertight).
class MeshShape final : public SdfShape {
 public:
  explicit MeshShape(Mesh mesh) : mesh_(std::move(mesh)), query_(mesh_) {}
  double signed_distance(const Vec3& p) const override { return query_.signed_distance(p); }
  std::vector<Vec3> surface_samples(int count, Rng& rng) const override { return sample_surface(mesh_, count, rng); }
  const Mesh& mesh() const { return mesh_; }
  bool watertight() const { return query_.watertight(); }

 private:
  Mesh mesh_;
  MeshQuery query_;
};

FieldSampler shape_sampler(const SdfShape& shape, int threads = 1);

enum class SampleKind : std::uint8_t { Surface = 0, NearSurface = 1, Uniform = 2 };

struct SdfSampleSet {
  Matrix points;  // [N, 3] in [-1, 1]^3
  Vector sdf;     // [N]
  std::vector<SampleKind> kinds;
};

// Half the points on the surface (sdf 0), three eighths on the surface plus
// N(0, sigma^2) noise per coordinate, one eighth uniform in [-1, 1]^3. Noisy
// and uniform points get exact signed distances.
SdfSampleSet sdf_sample(const SdfShape& shape, int count, Rng& rng, double sigma = 0.01, int threads = 1);

struct SdfFitConfig {
  EncoderKind encoder = EncoderKind::Phasor;
  int resolution = 128;
  int reduced = 6;
  int channels = 16;
  int grid_resolution = 0;
  double init_std = 0.1;
  int hidden = 64;
  int hidden_layers = 2;
  int batch_size = 1 << 14;
  int epoch_samples = 1 << 18;  // fresh samples drawn per pass when fitting a shape
  double sigma = 0.01;
  int threads = 1;
  FitConfig fit;

  SdfFitConfig() {
    fit.loss = LossKind::Mape;
    fit.lr = 1e-4;
    fit.adam = AdamConfig{0.9, 0.99, 1e-5, true};
    fit.iterations = 320;  // 20 passes over 2^18 samples at batch 2^14
    fit.lr_schedule.multipliers = {{160, 0.1}};
  }
};

struct SdfFitResult {
  Checkpoint checkpoint;
  std::vector<MetricRecord> log;
};

// Trains on shuffled passes over the sample set. When `metric` is set in the
// fit config it is logged as-is; otherwise the logged metric is the mean
// absolute SDF error over the samples.
SdfFitResult sdf_fit(const SdfSampleSet& samples, const SdfFitConfig& config);

// Same loop, but every pass over `epoch_samples` points is a freshly drawn
// sample set, so uniform and near-surface coverage grows with training. The
// logged metric uses a fixed probe set of 4096 samples.
SdfFitResult sdf_fit(const SdfShape& shape, const SdfFitConfig& config);

// SDF of a trained checkpoint at physical points.
FieldSampler checkpoint_sampler(const Checkpoint& checkpoint, int threads = 1);

// Gaussian-filters the phasor volume of an SDF checkpoint and rounds the
// result to float; the MLP is unchanged. sigma = 0 returns an exact copy.
Checkpoint sdf_smooth(const Checkpoint& checkpoint, double sigma);

}  // namespace pref::tasks
