#pragma once

#include <climits>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pref/diff.hpp"
#include "pref/errors.hpp"
#include "pref/mlp.hpp"
#include "pref/phasor_volume.hpp"
#include "pref/random.hpp"
#include "pref/tensor.hpp"
#include "pref/transform.hpp"

namespace pref {

// ---------------------------------------------------------------------------
// Losses

enum class LossKind { L1, L2, Mape };

// Denominator floor of the MAPE loss: |p - t| / (|t| + floor).
inline constexpr double kMapeFloor = 1e-2;

struct LossValue {
  double value = 0.0;
  Matrix grad;  // dLoss/dpred, same shape as pred
};

// Mean-reduced over every element of the batch. Throws DimensionError on a
// shape mismatch and NumericError on NaN input.
LossValue loss(LossKind kind, const Matrix& pred, const Matrix& target);

// ---------------------------------------------------------------------------
// Parseval regularizer

struct RegularizerValue {
  double value = 0.0;
  std::vector<double> axis_terms;  // sqrt(sum |2 pi freq_axis c|^2) per axis
  VolumeGradient grad;
};

// sum over axes a of || 2 pi freq_a * c ||_2 over every stored coefficient.
// The gradient of an all-zero axis term is taken as zero.
RegularizerValue parseval_reg(const PhasorVolume& volume);

// ---------------------------------------------------------------------------
// Schedules

// Coarse-to-fine frequency unlocking: a step function from training step to
// the largest |frequency| component that may be nonzero.
class UnlockSchedule {
 public:
  UnlockSchedule() = default;
  // Entries (step, max_frequency); steps must be strictly increasing.
  explicit UnlockSchedule(std::vector<std::pair<std::uint64_t, int>> entries);

  // 128 at step 0, then 2000/3000/4000/5500/7000 reaching 256, with the
  // intermediate limits spaced geometrically.
  static UnlockSchedule coarse_to_fine_256();
  // "s1:f1,s2:f2,...". Throws UsageError on malformed text.
  static UnlockSchedule parse(std::string_view text);

  bool empty() const { return entries_.empty(); }
  const std::vector<std::pair<std::uint64_t, int>>& entries() const { return entries_; }

  // INT_MAX when the schedule is empty. Steps before the first entry use the
  // first entry's limit.
  int max_frequency(std::uint64_t step) const;

 private:
  std::vector<std::pair<std::uint64_t, int>> entries_;
};

// Zeroes every coefficient with a frequency component of magnitude above
// max_frequency.
void apply_frequency_mask(PhasorVolume& volume, int max_frequency);
void mask_gradient(const PhasorVolume& volume, VolumeGradient& grad, int max_frequency);

// Step function of learning-rate multipliers: (first step, multiplier).
struct LrSchedule {
  std::vector<std::pair<std::uint64_t, double>> multipliers;

  // "s1:m1,s2:m2,..." with strictly increasing steps; empty text gives no decay.
  static LrSchedule parse(std::string_view text);

  double at(std::uint64_t step) const {
    double m = 1.0;
    for (const auto& [from, value] : multipliers) {
      if (step >= from) m = value;
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Round parameters to the nearest float after each update, so checkpoints
  // store them without loss.
  bool float32_params = false;
};

// A parameter tensor viewed as flat doubles, with its gradient.
struct ParamTensor {
  std::span<double> values;
  std::span<const double> grads;
  double lr_scale = 1.0;
};

class TrainState {
 public:
  explicit TrainState(AdamConfig adam = {}, UnlockSchedule unlock = {}, LrSchedule lr = {})
      : adam_(adam), unlock_(std::move(unlock)), lr_(std::move(lr)) {}

  std::uint64_t step() const { return step_; }
  const AdamConfig& adam() const { return adam_; }
  const UnlockSchedule& unlock() const { return unlock_; }
  const LrSchedule& lr_schedule() const { return lr_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  friend void adam_step(TrainState&, std::span<const ParamTensor>, double);

  AdamConfig adam_;
  UnlockSchedule unlock_;
  LrSchedule lr_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Rounds every MLP parameter to the nearest float.
void round_to_float(MlpParams& mlp);

// Bias-corrected Adam update over every tensor, then step += 1. Moments are
// allocated on the first call and must keep their shapes afterwards. Throws
// NumericError (leaving everything untouched) if any gradient is not finite.
void adam_step(TrainState& state, std::span<const ParamTensor> tensors, double lr);

// ---------------------------------------------------------------------------
// Encoders and the training loop

// Maps coordinates in the unit domain to k-channel features and exposes its
// parameters as flat doubles.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual int dims() const = 0;
  virtual int channels() const = 0;
  virtual std::size_t parameter_count() const = 0;

  virtual Matrix encode(const Matrix& coords) = 0;
  // Accumulates dL/dparams into grad (same order as parameters()).
  virtual void backprop(const Matrix& coords, const Matrix& grad_features,
                        std::span<double> grad) = 0;
  // Writable parameter view; marks the encoder modified.
  virtual std::span<double> parameters() = 0;

  // Adds lambda * d(regularizer) to grad and returns the regularizer value.
  virtual double regularize(double /*lambda*/, std::span<double> /*grad*/) { return 0.0; }
  // Enforces the frequency limit on parameters and gradient.
  virtual void restrict(int /*max_frequency*/, std::span<double> /*grad*/) {}
};

// Encoder backed by a PhasorVolume and the fast evaluator.
class PhasorEncoder final : public Encoder {
 public:
  explicit PhasorEncoder(PhasorVolume& volume, int threads = 1)
      : volume_(volume), evaluator_(threads), threads_(threads) {}

  int dims() const override { return volume_.dims(); }
  int channels() const override { return volume_.channels(); }
  std::size_t parameter_count() const override { return volume_.parameter_count(); }
  Matrix encode(const Matrix& coords) override { return evaluator_.evaluate(volume_, coords); }
  void backprop(const Matrix& coords, const Matrix& grad_features, std::span<double> grad) override;
  std::span<double> parameters() override;
  double regularize(double lambda, std::span<double> grad) override;
  void restrict(int max_frequency, std::span<double> grad) override;

  PhasorVolume& volume() { return volume_; }

 private:
  PhasorVolume& volume_;
  FieldEvaluator evaluator_;
  int threads_;
};

// Supplies training batches: coords [B, n] in the unit domain, targets [B, m].
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual void next(Rng& rng, Matrix& coords, Matrix& targets) = 0;
};

struct MetricRecord {
  std::uint64_t step = 0;
  double loss = 0.0;
  std::string metric_name;
  double metric = 0.0;
  double elapsed_seconds = 0.0;
};

struct FitConfig {
  std::uint64_t iterations = 1000;
  double lr = 1e-4;
  double encoder_lr_scale = 1.0;
  LossKind loss = LossKind::L1;
  double lambda_parseval = 0.0;
  UnlockSchedule unlock;
  LrSchedule lr_schedule;
  AdamConfig adam{0.9, 0.999, 1e-8, true};
  std::uint64_t log_every = 100;
  std::uint64_t seed = 0;
  // Optional task metric evaluated at every log point.
  std::function<std::pair<std::string, double>()> metric;
  std::function<void(const MetricRecord&)> on_record;
};

struct FitResult {
  std::vector<MetricRecord> log;
  std::uint64_t steps = 0;
  double final_loss = 0.0;
  std::vector<double> loss_tail;  // last losses, oldest first
};

// Raised when the loss stops being finite. Carries the step and recent losses.
class DivergenceError : public NumericError {
 public:
  DivergenceError(std::uint64_t step, std::vector<double> recent);
  std::uint64_t step() const { return step_; }
  const std::vector<double>& recent_losses() const { return recent_; }

 private:
  std::uint64_t step_;
  std::vector<double> recent_;
};

// Joint gradient descent on encoder and MLP:
//   batch -> encode -> MLP -> loss (+ lambda * regularizer) -> MLP backward ->
//   encoder backward -> Adam on both parameter groups, with unlock masking.
FitResult fit(BatchSource& source, Encoder& encoder, MlpParams& mlp, const FitConfig& config);

FitResult fit(BatchSource& source, PhasorVolume& volume, MlpParams& mlp, const FitConfig& config,
              int threads = 1);

}  // namespace pref
