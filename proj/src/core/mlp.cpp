#include "pref/mlp.hpp"

#include <cmath>
#include <string>

#include "pref/errors.hpp"
#include "revision.hpp"

namespace pref {

namespace {

void apply(Activation act, const Matrix& z, Matrix& out) {
  switch (act) {
    case Activation::Identity:
      out = z;
      break;
    case Activation::Relu:
      out = z.cwiseMax(0.0);
      break;
    case Activation::Sigmoid:
      out = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      break;
    case Activation::Softplus:
      out = z.unaryExpr([](double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); });
      break;
  }
}

// grad_z = grad_a * act'(z), in place on grad.
void apply_derivative(Activation act, const Matrix& z, Matrix& grad) {
  switch (act) {
    case Activation::Identity:
      break;
    case Activation::Relu:
      grad = grad.cwiseProduct(z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
      break;
    case Activation::Sigmoid:
      grad = grad.cwiseProduct(z.unaryExpr([](double v) {
        const double s = 1.0 / (1.0 + std::exp(-v));
        return s * (1.0 - s);
      }));
      break;
    case Activation::Softplus:
      grad = grad.cwiseProduct(z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }));
      break;
  }
}

}  // namespace

MlpParams::MlpParams(std::vector<Layer> layers) : layers_(std::move(layers)), revision_(next_revision()) {
  if (layers_.empty()) throw DimensionError("MLP needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (layer.bias.size() != layer.weight.rows()) {
      throw DimensionError("layer " + std::to_string(i) + " bias length does not match weight rows");
    }
    if (i > 0 && layer.weight.cols() != layers_[i - 1].weight.rows()) {
      throw DimensionError("layer " + std::to_string(i) + " input width does not chain");
    }
  }
}

MlpParams MlpParams::create(std::span<const int> widths, Activation hidden, Activation output,
                            Rng& rng) {
  if (widths.size() < 2) throw DimensionError("MLP widths need input and output");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int in = widths[i];
    const int out = widths[i + 1];
    if (in < 1 || out < 1) throw DimensionError("MLP widths must be positive");
    const double bound = std::sqrt(6.0 / in);
    Layer layer;
    layer.weight = Matrix(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = Vector::Zero(out);
    layer.activation = i + 2 == widths.size() ? output : hidden;
    layers.push_back(std::move(layer));
  }
  return MlpParams(std::move(layers));
}

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for (const Layer& layer : layers_) count += layer.weight.size() + layer.bias.size();
  return count;
}

Layer& MlpParams::mutable_layer(std::size_t i) {
  revision_ = next_revision();
  return layers_.at(i);
}

bool MlpParams::operator==(const MlpParams& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& a = layers_[i];
    const Layer& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight || a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

std::pair<Matrix, ActivationTape> forward(const MlpParams& params, const Matrix& features) {
  if (features.cols() != params.input_width()) {
    throw DimensionError("MLP expects " + std::to_string(params.input_width()) +
                         " input features, got " + std::to_string(features.cols()));
  }
  ActivationTape tape;
  tape.revision = params.revision();
  Matrix current = features;
  for (const Layer& layer : params.layers()) {
    Matrix z(current.rows(), layer.weight.rows());
    z.noalias() = current * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    Matrix next;
    apply(layer.activation, z, next);
    tape.inputs.push_back(std::move(current));
    tape.pre_activations.push_back(std::move(z));
    current = std::move(next);
  }
  return {std::move(current), std::move(tape)};
}

std::pair<MlpGradient, Matrix> backward(const MlpParams& params, const ActivationTape& tape,
                                        const Matrix& grad_out) {
  if (tape.revision != params.revision() || tape.inputs.size() != params.depth()) {
    throw UsageError("activation tape does not belong to the current parameters");
  }
  const auto& layers = params.layers();
  if (grad_out.cols() != params.output_width() || grad_out.rows() != tape.inputs.front().rows()) {
    throw DimensionError("output gradient shape does not match the forward batch");
  }
  MlpGradient grads;
  grads.weights.resize(layers.size());
  grads.biases.resize(layers.size());
  Matrix grad = grad_out;
  for (std::size_t i = layers.size(); i-- > 0;) {
    apply_derivative(layers[i].activation, tape.pre_activations[i], grad);
    grads.weights[i].noalias() = grad.transpose() * tape.inputs[i];
    grads.biases[i] = grad.colwise().sum().transpose();
    Matrix grad_in(grad.rows(), layers[i].weight.cols());
    grad_in.noalias() = grad * layers[i].weight;
    grad = std::move(grad_in);
  }
  return {std::move(grads), std::move(grad)};
}

}  // namespace pref
