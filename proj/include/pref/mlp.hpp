#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pref/random.hpp"
#include "pref/tensor.hpp"

namespace pref {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1, Sigmoid = 2, Softplus = 3 };

struct Layer {
  Matrix weight;  // [out, in]
  Vector bias;    // [out]
  Activation activation = Activation::Identity;
};

// Parameters of the fully-connected decoder head.
class MlpParams {
 public:
  // Throws DimensionError when consecutive layer shapes do not chain.
  explicit MlpParams(std::vector<Layer> layers);

  // widths = {in, hidden..., out}. Weights uniform in +-sqrt(6 / fan_in),
  // biases zero.
  static MlpParams create(std::span<const int> widths, Activation hidden, Activation output,
                          Rng& rng);

  int input_width() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_width() const { return static_cast<int>(layers_.back().weight.rows()); }
  std::size_t depth() const { return layers_.size(); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  // Writable access; invalidates outstanding activation tapes.
  Layer& mutable_layer(std::size_t i);

  std::uint64_t revision() const { return revision_; }

  bool operator==(const MlpParams& other) const;

 private:
  std::vector<Layer> layers_;
  std::uint64_t revision_;
};

// Per-layer inputs and pre-activations recorded by forward().
struct ActivationTape {
  std::uint64_t revision = 0;
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
};

struct MlpGradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Affine + activation chain. Returns [B, out] and the tape for backward().
std::pair<Matrix, ActivationTape> forward(const MlpParams& params, const Matrix& features);

// Reverse-mode gradients of sum(outputs * grad_out) with respect to every
// parameter and the input features. Throws UsageError if the parameters
// changed after the tape was recorded.
std::pair<MlpGradient, Matrix> backward(const MlpParams& params, const ActivationTape& tape,
                                        const Matrix& grad_out);

}  // namespace pref
