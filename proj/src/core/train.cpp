#include "pref/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <numbers>
#include <sstream>
#include <string>

namespace pref {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Calls fn(flat_index, frequency) for every stored coefficient.
template <typename Fn>
void for_each_coefficient(const PhasorVolume& volume, Fn&& fn) {
  const FrequencyLayout& layout = volume.layout();
  std::size_t flat = 0;
  for (int a = 0; a < layout.dims(); ++a) {
    const Extents ext = layout.factor_extents(a);
    for (int c = 0; c < volume.channels(); ++c) {
      Extents pos{0, 0, 0};
      for (pos[0] = 0; pos[0] < ext[0]; ++pos[0]) {
        for (pos[1] = 0; pos[1] < ext[1]; ++pos[1]) {
          for (pos[2] = 0; pos[2] < ext[2]; ++pos[2]) {
            fn(flat++, layout.frequency(a, pos));
          }
        }
      }
    }
  }
}

int max_abs_component(const std::array<int, kMaxDims>& freq, int dims) {
  int m = 0;
  for (int i = 0; i < dims; ++i) m = std::max(m, std::abs(freq[i]));
  return m;
}

std::span<double> as_doubles(std::span<Complex> values) {
  return {reinterpret_cast<double*>(values.data()), values.size() * 2};
}

}  // namespace

LossValue loss(LossKind kind, const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("loss: prediction and target shapes differ");
  }
  if (pred.hasNaN() || target.hasNaN()) throw NumericError("loss: NaN input");
  const auto count = static_cast<double>(pred.size());
  LossValue out;
  out.grad.resize(pred.rows(), pred.cols());
  if (pred.size() == 0) return out;
  const Matrix diff = pred - target;
  switch (kind) {
    case LossKind::L1:
      out.value = diff.cwiseAbs().sum() / count;
      out.grad = diff.unaryExpr([](double d) { return d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0); }) / count;
      break;
    case LossKind::L2:
      out.value = diff.squaredNorm() / count;
      out.grad = diff * (2.0 / count);
      break;
    case LossKind::Mape: {
      const Matrix denom = target.cwiseAbs().array() + kMapeFloor;
      out.value = (diff.cwiseAbs().array() / denom.array()).sum() / count;
      out.grad = diff.unaryExpr([](double d) { return d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0); })
                     .cwiseQuotient(denom) /
                 count;
      break;
    }
  }
  return out;
}

RegularizerValue parseval_reg(const PhasorVolume& volume) {
  const int n = volume.dims();
  const auto coefs = volume.coefficients();
  RegularizerValue out;
  out.axis_terms.assign(n, 0.0);
  out.grad.assign(coefs.size(), Complex(0.0, 0.0));

  std::vector<std::array<int, kMaxDims>> freqs(coefs.size());
  for_each_coefficient(volume, [&](std::size_t i, const std::array<int, kMaxDims>& f) { freqs[i] = f; });

  for (int a = 0; a < n; ++a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < coefs.size(); ++i) {
      const double w = kTwoPi * freqs[i][a];
      sum += w * w * std::norm(coefs[i]);
    }
    out.axis_terms[a] = std::sqrt(sum);
    out.value += out.axis_terms[a];
  }
  for (int a = 0; a < n; ++a) {
    const double term = out.axis_terms[a];
    if (term == 0.0) continue;
    for (std::size_t i = 0; i < coefs.size(); ++i) {
      const double w = kTwoPi * freqs[i][a];
      out.grad[i] += (w * w / term) * coefs[i];
    }
  }
  return out;
}

UnlockSchedule::UnlockSchedule(std::vector<std::pair<std::uint64_t, int>> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].second < 0) throw UsageError("unlock schedule: negative frequency limit");
    if (i > 0 && entries_[i].first <= entries_[i - 1].first) {
      throw UsageError("unlock schedule: steps must be strictly increasing");
    }
  }
}

UnlockSchedule UnlockSchedule::coarse_to_fine_256() {
  return UnlockSchedule({{0, 128}, {2000, 147}, {3000, 169}, {4000, 194}, {5500, 223}, {7000, 256}});
}

UnlockSchedule UnlockSchedule::parse(std::string_view text) {
  std::vector<std::pair<std::uint64_t, int>> entries;
  std::stringstream stream{std::string(text)};
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("unlock schedule: expected step:freq, got '" + item + "'");
    try {
      std::size_t used_step = 0;
      std::size_t used_freq = 0;
      const std::string step_text = item.substr(0, colon);
      const std::string freq_text = item.substr(colon + 1);
      const unsigned long long step = std::stoull(step_text, &used_step);
      const int freq = std::stoi(freq_text, &used_freq);
      if (used_step != step_text.size() || used_freq != freq_text.size() ||
          step_text.find('-') != std::string::npos) {
        throw std::invalid_argument(item);
      }
      entries.emplace_back(step, freq);
    } catch (const std::logic_error&) {
      throw UsageError("unlock schedule: malformed entry '" + item + "'");
    }
  }
  return UnlockSchedule(std::move(entries));
}

LrSchedule LrSchedule::parse(std::string_view text) {
  LrSchedule schedule;
  std::stringstream stream{std::string(text)};
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("lr schedule: expected step:multiplier, got '" + item + "'");
    try {
      std::size_t used_step = 0;
      std::size_t used_mult = 0;
      const std::string step_text = item.substr(0, colon);
      const std::string mult_text = item.substr(colon + 1);
      const unsigned long long step = std::stoull(step_text, &used_step);
      const double mult = std::stod(mult_text, &used_mult);
      if (used_step != step_text.size() || used_mult != mult_text.size() ||
          step_text.find('-') != std::string::npos || !(mult > 0.0) || !std::isfinite(mult)) {
        throw std::invalid_argument(item);
      }
      if (!schedule.multipliers.empty() && step <= schedule.multipliers.back().first) {
        throw UsageError("lr schedule: steps must be strictly increasing");
      }
      schedule.multipliers.emplace_back(step, mult);
    } catch (const std::logic_error&) {
      throw UsageError("lr schedule: malformed entry '" + item + "'");
    }
  }
  return schedule;
}

int UnlockSchedule::max_frequency(std::uint64_t step) const {
  if (entries_.empty()) return INT_MAX;
  int limit = entries_.front().second;
  for (const auto& [from, value] : entries_) {
    if (step >= from) limit = value;
  }
  return limit;
}

void apply_frequency_mask(PhasorVolume& volume, int max_frequency) {
  std::vector<std::size_t> masked;
  const auto coefs = volume.coefficients();
  for_each_coefficient(volume, [&](std::size_t i, const std::array<int, kMaxDims>& f) {
    if (max_abs_component(f, volume.dims()) > max_frequency && coefs[i] != Complex(0.0, 0.0)) {
      masked.push_back(i);
    }
  });
  if (masked.empty()) return;
  auto out = volume.mutable_coefficients();
  for (std::size_t i : masked) out[i] = Complex(0.0, 0.0);
}

void mask_gradient(const PhasorVolume& volume, VolumeGradient& grad, int max_frequency) {
  if (grad.size() != volume.coefficients().size()) throw DimensionError("mask_gradient: size mismatch");
  for_each_coefficient(volume, [&](std::size_t i, const std::array<int, kMaxDims>& f) {
    if (max_abs_component(f, volume.dims()) > max_frequency) grad[i] = Complex(0.0, 0.0);
  });
}

void round_to_float(MlpParams& mlp) {
  for (std::size_t l = 0; l < mlp.depth(); ++l) {
    Layer& layer = mlp.mutable_layer(l);
    layer.weight = layer.weight.unaryExpr([](double v) { return round_to_float(v); });
    layer.bias = layer.bias.unaryExpr([](double v) { return round_to_float(v); });
  }
}

void adam_step(TrainState& state, std::span<const ParamTensor> tensors, double lr) {
  for (const ParamTensor& t : tensors) {
    if (t.values.size() != t.grads.size()) throw DimensionError("adam: parameter/gradient size mismatch");
    for (double g : t.grads) {
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient, step aborted");
    }
  }
  if (state.m_.empty()) {
    for (const ParamTensor& t : tensors) {
      state.m_.emplace_back(t.values.size(), 0.0);
      state.v_.emplace_back(t.values.size(), 0.0);
    }
  } else {
    if (state.m_.size() != tensors.size()) throw DimensionError("adam: tensor count changed");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      if (state.m_[i].size() != tensors[i].values.size()) throw DimensionError("adam: tensor shape changed");
    }
  }

  const AdamConfig& cfg = state.adam_;
  const double t = static_cast<double>(state.step_ + 1);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const ParamTensor& tensor = tensors[i];
    std::vector<double>& m = state.m_[i];
    std::vector<double>& v = state.v_[i];
    const double step_lr = lr * tensor.lr_scale;
    for (std::size_t j = 0; j < tensor.values.size(); ++j) {
      const double g = tensor.grads[j];
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      double value = tensor.values[j] - step_lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      if (cfg.float32_params) value = round_to_float(value);
      tensor.values[j] = value;
    }
  }
  ++state.step_;
}

void PhasorEncoder::backprop(const Matrix& coords, const Matrix& grad_features, std::span<double> grad) {
  const VolumeGradient g = backprop_to_volume(volume_, coords, grad_features, threads_);
  if (grad.size() != 2 * g.size()) throw DimensionError("phasor encoder: gradient size mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) {
    grad[2 * i] += g[i].real();
    grad[2 * i + 1] += g[i].imag();
  }
}

std::span<double> PhasorEncoder::parameters() { return as_doubles(volume_.mutable_coefficients()); }

double PhasorEncoder::regularize(double lambda, std::span<double> grad) {
  if (lambda == 0.0) return 0.0;
  const RegularizerValue reg = parseval_reg(volume_);
  for (std::size_t i = 0; i < reg.grad.size(); ++i) {
    grad[2 * i] += lambda * reg.grad[i].real();
    grad[2 * i + 1] += lambda * reg.grad[i].imag();
  }
  return reg.value;
}

void PhasorEncoder::restrict(int max_frequency, std::span<double> grad) {
  if (max_frequency == INT_MAX) return;
  apply_frequency_mask(volume_, max_frequency);
  for_each_coefficient(volume_, [&](std::size_t i, const std::array<int, kMaxDims>& f) {
    if (max_abs_component(f, volume_.dims()) > max_frequency) {
      grad[2 * i] = 0.0;
      grad[2 * i + 1] = 0.0;
    }
  });
}

namespace {

std::string divergence_message(std::uint64_t step, const std::vector<double>& recent) {
  std::ostringstream out;
  out << "training diverged at step " << step << " (recent losses:";
  for (double v : recent) out << ' ' << v;
  out << ')';
  return out.str();
}

}  // namespace

DivergenceError::DivergenceError(std::uint64_t step, std::vector<double> recent)
    : NumericError(divergence_message(step, recent)), step_(step), recent_(std::move(recent)) {}

FitResult fit(BatchSource& source, Encoder& encoder, MlpParams& mlp, const FitConfig& config) {
  if (encoder.channels() != mlp.input_width()) {
    throw DimensionError("fit: encoder channels do not match the MLP input width");
  }
  constexpr std::size_t kTail = 100;
  FitResult result;
  Rng rng(config.seed);
  TrainState state(config.adam, config.unlock, config.lr_schedule);
  std::vector<double> encoder_grad(encoder.parameter_count());
  std::deque<double> tail;
  const auto start = std::chrono::steady_clock::now();
  Matrix coords;
  Matrix targets;

  if (config.iterations > 0) encoder.restrict(config.unlock.max_frequency(0), encoder_grad);

  for (std::uint64_t step = 0; step < config.iterations; ++step) {
    source.next(rng, coords, targets);
    if (coords.cols() != encoder.dims()) throw DimensionError("fit: batch coordinate width mismatch");
    if (targets.cols() != mlp.output_width()) throw DimensionError("fit: batch target width mismatch");

    const Matrix features = encoder.encode(coords);
    auto [pred, tape] = forward(mlp, features);
    LossValue data_loss;
    try {
      data_loss = loss(config.loss, pred, targets);
    } catch (const NumericError&) {
      throw DivergenceError(step, {tail.begin(), tail.end()});
    }
    auto [mlp_grad, feature_grad] = backward(mlp, tape, data_loss.grad);

    std::fill(encoder_grad.begin(), encoder_grad.end(), 0.0);
    encoder.backprop(coords, feature_grad, encoder_grad);
    const double reg = encoder.regularize(config.lambda_parseval, encoder_grad);
    const double total = data_loss.value + config.lambda_parseval * reg;
    if (!std::isfinite(total)) {
      std::vector<double> recent(tail.begin(), tail.end());
      recent.push_back(total);
      throw DivergenceError(step, std::move(recent));
    }
    encoder.restrict(state.unlock().max_frequency(step), encoder_grad);

    std::vector<ParamTensor> tensors;
    tensors.push_back({encoder.parameters(), encoder_grad, config.encoder_lr_scale});
    for (std::size_t i = 0; i < mlp.depth(); ++i) {
      Layer& layer = mlp.mutable_layer(i);
      tensors.push_back({{layer.weight.data(), static_cast<std::size_t>(layer.weight.size())},
                         {mlp_grad.weights[i].data(), static_cast<std::size_t>(mlp_grad.weights[i].size())},
                         1.0});
      tensors.push_back({{layer.bias.data(), static_cast<std::size_t>(layer.bias.size())},
                         {mlp_grad.biases[i].data(), static_cast<std::size_t>(mlp_grad.biases[i].size())},
                         1.0});
    }
    try {
      adam_step(state, tensors, config.lr * state.lr_schedule().at(step));
    } catch (const NumericError&) {
      throw DivergenceError(step, {tail.begin(), tail.end()});
    }
    // Keep masked coefficients at exactly zero, including after the float
    // rounding of the update.
    encoder.restrict(state.unlock().max_frequency(step + 1), encoder_grad);

    tail.push_back(total);
    if (tail.size() > kTail) tail.pop_front();
    result.final_loss = total;
    result.steps = step + 1;

    const bool last = step + 1 == config.iterations;
    if (config.log_every > 0 && ((step + 1) % config.log_every == 0 || last)) {
      MetricRecord record;
      record.step = step + 1;
      record.loss = total;
      if (config.metric) {
        auto [name, value] = config.metric();
        record.metric_name = std::move(name);
        record.metric = value;
      }
      record.elapsed_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (config.on_record) config.on_record(record);
      result.log.push_back(std::move(record));
    }
  }
  result.loss_tail.assign(tail.begin(), tail.end());
  return result;
}

FitResult fit(BatchSource& source, PhasorVolume& volume, MlpParams& mlp, const FitConfig& config,
              int threads) {
  PhasorEncoder encoder(volume, threads);
  return fit(source, encoder, mlp, config);
}

}  // namespace pref
