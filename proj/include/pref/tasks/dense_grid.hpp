#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pref/layout.hpp"
#include "pref/tensor.hpp"
#include "pref/train.hpp"

namespace pref::tasks {

// Real k-channel feature grid over the periodic unit domain, sampled by
// multilinear interpolation. Node (i0, i1[, i2]) sits at (i0/M0, i1/M1[, i2/M2]).
// Values are stored node-major: values[node * k + channel].
class DenseGrid {
 public:
  DenseGrid(int dims, std::vector<int> resolution, int channels);

  // Node values drawn from N(0, stddev^2), rounded to float.
  void randomize(double stddev, std::uint64_t seed);

  int dims() const { return dims_; }
  int channels() const { return channels_; }
  const std::vector<int>& resolution() const { return resolution_; }
  std::size_t nodes() const;
  std::size_t parameter_count() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }

  Matrix evaluate(const Matrix& coords) const;
  // Accumulates dL/dvalues for dL/dfeatures = grad_features.
  void backprop(const Matrix& coords, const Matrix& grad_features, std::span<double> grad) const;

  bool operator==(const DenseGrid&) const = default;

 private:
  int dims_;
  std::vector<int> resolution_;
  int channels_;
  std::vector<double> values_;
};

// Per-axis resolution of a uniform dense grid whose parameter count is
// closest to that of a PhasorVolume with the given layout and channels.
int matched_grid_resolution(const FrequencyLayout& layout, int channels);

class DenseGridEncoder final : public Encoder {
 public:
  explicit DenseGridEncoder(DenseGrid& grid) : grid_(grid) {}

  int dims() const override { return grid_.dims(); }
  int channels() const override { return grid_.channels(); }
  std::size_t parameter_count() const override { return grid_.parameter_count(); }
  Matrix encode(const Matrix& coords) override { return grid_.evaluate(coords); }
  void backprop(const Matrix& coords, const Matrix& grad_features, std::span<double> grad) override {
    grid_.backprop(coords, grad_features, grad);
  }
  std::span<double> parameters() override { return grid_.mutable_values(); }

  DenseGrid& grid() { return grid_; }

 private:
  DenseGrid& grid_;
};

}  // namespace pref::tasks
