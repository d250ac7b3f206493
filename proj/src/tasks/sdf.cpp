#include "pref/tasks/sdf.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include "../core/parallel.hpp"
#include "pref/errors.hpp"
#include "pref/tasks/decode.hpp"
#include "pref/tasks/dense_grid.hpp"

namespace pref::tasks {

namespace {

class ShuffledBatches final : public BatchSource {
 public:
  ShuffledBatches(const Matrix& coords, const Vector& targets, int batch_size)
      : coords_(coords), targets_(targets), batch_(std::max(1, batch_size)), order_(coords.rows()) {
    std::iota(order_.begin(), order_.end(), 0);
    cursor_ = order_.size();
  }

  void next(Rng& rng, Matrix& coords, Matrix& targets) override {
    const auto size = static_cast<Eigen::Index>(std::min<std::size_t>(batch_, order_.size()));
    coords.resize(size, coords_.cols());
    targets.resize(size, 1);
    for (Eigen::Index i = 0; i < size; ++i) {
      if (cursor_ == order_.size()) reshuffle(rng);
      const Eigen::Index row = order_[cursor_++];
      coords.row(i) = coords_.row(row);
      targets(i, 0) = targets_(row);
    }
  }

 private:
  void reshuffle(Rng& rng) {
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.index(i)]);
    cursor_ = 0;
  }

  const Matrix& coords_;
  const Vector& targets_;
  std::size_t batch_;
  std::vector<Eigen::Index> order_;
  std::size_t cursor_;
};

class ResampledBatches final : public BatchSource {
 public:
  ResampledBatches(const SdfShape& shape, int epoch_samples, double sigma, int batch_size, int threads)
      : shape_(shape), epoch_(std::max(1, epoch_samples)), sigma_(sigma), threads_(threads),
        batch_(std::max(1, std::min(batch_size, epoch_))) {}

  void next(Rng& rng, Matrix& coords, Matrix& targets) override {
    coords.resize(batch_, 3);
    targets.resize(batch_, 1);
    for (int i = 0; i < batch_; ++i) {
      if (cursor_ == order_.size()) refill(rng);
      const Eigen::Index row = order_[cursor_++];
      coords.row(i) = points_.row(row);
      targets(i, 0) = sdf_(row);
    }
  }

 private:
  void refill(Rng& rng) {
    SdfSampleSet set = sdf_sample(shape_, epoch_, rng, sigma_, threads_);
    points_ = to_unit_domain(set.points);
    sdf_ = std::move(set.sdf);
    order_.resize(epoch_);
    std::iota(order_.begin(), order_.end(), 0);
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.index(i)]);
    cursor_ = 0;
  }

  const SdfShape& shape_;
  int epoch_;
  double sigma_;
  int threads_;
  int batch_;
  Matrix points_;
  Vector sdf_;
  std::vector<Eigen::Index> order_;
  std::size_t cursor_ = 0;
};

}  // namespace

Matrix to_unit_domain(const Matrix& points) { return (points.array() * kSdfDomainScale + 0.5).matrix(); }

std::vector<Vec3> SphereShape::surface_samples(int count, Rng& rng) const {
  std::vector<Vec3> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec3 d(rng.normal(), rng.normal(), rng.normal());
    while (d.squaredNorm() == 0.0) d = Vec3(rng.normal(), rng.normal(), rng.normal());
    points.push_back(center_ + radius_ * d.normalized());
  }
  return points;
}

FieldSampler shape_sampler(const SdfShape& shape, int threads) {
  return [&shape, threads](const Matrix& points) {
    Vector out(points.rows());
    detail::parallel_chunks(static_cast<std::size_t>(points.rows()), threads,
                            [&](std::size_t begin, std::size_t end, int) {
                              for (std::size_t i = begin; i < end; ++i) {
                                const auto r = static_cast<Eigen::Index>(i);
                                out(r) = shape.signed_distance(points.row(r).transpose());
                              }
                            });
    return out;
  };
}

SdfSampleSet sdf_sample(const SdfShape& shape, int count, Rng& rng, double sigma, int threads) {
  if (count < 1) throw DomainError("sdf_sample needs a positive count");
  const int surface = count / 2;
  const int near = count * 3 / 8;
  const int uniform = count - surface - near;
  SdfSampleSet set;
  set.points.resize(count, 3);
  set.sdf = Vector::Zero(count);
  set.kinds.resize(count);

  const std::vector<Vec3> on_surface = shape.surface_samples(surface + near, rng);
  for (int i = 0; i < surface; ++i) {
    set.points.row(i) = on_surface[i].transpose();
    set.kinds[i] = SampleKind::Surface;
  }
  for (int i = 0; i < near; ++i) {
    const Vec3 p = on_surface[surface + i] + sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
    set.points.row(surface + i) = p.cwiseMax(-1.0).cwiseMin(1.0).transpose();
    set.kinds[surface + i] = SampleKind::NearSurface;
  }
  for (int i = 0; i < uniform; ++i) {
    const int row = surface + near + i;
    set.points.row(row) = Eigen::RowVector3d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    set.kinds[row] = SampleKind::Uniform;
  }
  const Matrix off_surface = set.points.bottomRows(count - surface);
  set.sdf.tail(count - surface) = shape_sampler(shape, threads)(off_surface);
  return set;
}

namespace {

SdfFitResult run_sdf_fit(BatchSource& batches, const Matrix& probe_coords, const Vector& probe_sdf,
                         const SdfFitConfig& config) {
  Rng init_rng(config.fit.seed ^ 0x5eedULL);
  std::vector<int> widths{config.channels};
  for (int i = 0; i < config.hidden_layers; ++i) widths.push_back(config.hidden);
  widths.push_back(1);
  MlpParams mlp = MlpParams::create(widths, Activation::Relu, Activation::Identity, init_rng);
  if (config.fit.adam.float32_params) round_to_float(mlp);

  const FrequencyLayout layout = FrequencyLayout::uniform(3, config.resolution, config.reduced);
  std::optional<PhasorVolume> volume;
  std::optional<DenseGrid> grid;
  std::unique_ptr<Encoder> encoder;
  if (config.encoder == EncoderKind::Phasor) {
    volume.emplace(new_volume(layout, config.channels, RandomInit{config.init_std, config.fit.seed}));
    encoder = std::make_unique<PhasorEncoder>(*volume, config.threads);
  } else {
    const int m = config.grid_resolution > 0 ? config.grid_resolution : matched_grid_resolution(layout, config.channels);
    grid.emplace(3, std::vector<int>{m, m, m}, config.channels);
    grid->randomize(config.init_std, config.fit.seed);
    encoder = std::make_unique<DenseGridEncoder>(*grid);
  }

  FitConfig fit_config = config.fit;
  if (!fit_config.metric) {
    fit_config.metric = [&]() -> std::pair<std::string, double> {
      const Matrix pred = forward(mlp, encoder->encode(probe_coords)).first;
      return {"sdf_mae", (pred.col(0) - probe_sdf).cwiseAbs().mean()};
    };
  }

  FitResult fitted = fit(batches, *encoder, mlp, fit_config);
  CheckpointMetadata meta{TaskKind::Sdf, fitted.steps, fitted.loss_tail};
  EncoderState state = volume ? EncoderState(std::move(*volume)) : EncoderState(std::move(*grid));
  return {Checkpoint{std::move(state), std::move(mlp), std::move(meta)}, std::move(fitted.log)};
}

constexpr Eigen::Index kProbe = 4096;

}  // namespace

SdfFitResult sdf_fit(const SdfSampleSet& samples, const SdfFitConfig& config) {
  if (samples.points.rows() == 0 || samples.points.cols() != 3 || samples.sdf.size() != samples.points.rows()) {
    throw DimensionError("sdf_fit: malformed sample set");
  }
  const Matrix coords = to_unit_domain(samples.points);
  const Eigen::Index probe = std::min(kProbe, coords.rows());
  ShuffledBatches batches(coords, samples.sdf, config.batch_size);
  return run_sdf_fit(batches, coords.topRows(probe), samples.sdf.head(probe), config);
}

SdfFitResult sdf_fit(const SdfShape& shape, const SdfFitConfig& config) {
  if (config.epoch_samples < 1) throw DomainError("sdf_fit needs a positive epoch size");
  // The probe set has its own stream so it does not shift the training samples.
  Rng probe_rng(config.fit.seed ^ 0x9a0bULL);
  const SdfSampleSet probe = sdf_sample(shape, static_cast<int>(kProbe), probe_rng, config.sigma, config.threads);
  ResampledBatches batches(shape, config.epoch_samples, config.sigma, config.batch_size, config.threads);
  return run_sdf_fit(batches, to_unit_domain(probe.points), probe.sdf, config);
}

FieldSampler checkpoint_sampler(const Checkpoint& checkpoint, int threads) {
  if (checkpoint.mlp.output_width() != 1) throw DimensionError("SDF checkpoints have a scalar output");
  return [&checkpoint, threads](const Matrix& points) -> Vector {
    return decode(checkpoint, to_unit_domain(points), threads).col(0);
  };
}

Checkpoint sdf_smooth(const Checkpoint& checkpoint, double sigma) {
  const auto* volume = std::get_if<PhasorVolume>(&checkpoint.encoder);
  if (volume == nullptr) throw UsageError("spectral smoothing needs a phasor-volume checkpoint");
  if (sigma == 0.0) return checkpoint;
  PhasorVolume filtered = gaussian_filter(*volume, sigma);
  // Keep the checkpoint in single precision like the trained one.
  for (Complex& c : filtered.mutable_coefficients()) {
    c = round_to_float(c);
  }
  return Checkpoint{std::move(filtered), checkpoint.mlp, checkpoint.metadata};
}

}  // namespace pref::tasks
