#include "pref/layout.hpp"

#include <string>

#include "pref/errors.hpp"

namespace pref {

FrequencyLayout::FrequencyLayout(int dims, std::vector<int> resolution, int reduced_size)
    : dims_(dims), resolution_(std::move(resolution)), reduced_size_(reduced_size) {
  if (dims_ < 2 || dims_ > kMaxDims) {
    throw LayoutError("layout dims must be 2 or 3, got " + std::to_string(dims_));
  }
  if (static_cast<int>(resolution_.size()) != dims_) {
    throw LayoutError("layout needs one resolution per axis");
  }
  if (reduced_size_ < 1 || reduced_size_ > 30) {
    throw LayoutError("reduced size must be in [1, 30], got " + std::to_string(reduced_size_));
  }
  reduced_freqs_.reserve(reduced_size_);
  for (int i = 0; i < reduced_size_; ++i) reduced_freqs_.push_back(reduced_frequency(i));
  const int top = reduced_freqs_.back();
  for (int axis = 0; axis < dims_; ++axis) {
    const int n = resolution_[axis];
    if (n < 2) {
      throw LayoutError("axis " + std::to_string(axis) + " resolution must be >= 2");
    }
    // Reduced frequencies must be representable on the full axis: max < N/2.
    if (2 * top >= n) {
      throw LayoutError("reduced frequency " + std::to_string(top) +
                        " is not below N/2 for axis " + std::to_string(axis) +
                        " (N = " + std::to_string(n) + ")");
    }
  }
}

FrequencyLayout FrequencyLayout::uniform(int dims, int resolution, int reduced_size) {
  return FrequencyLayout(dims, std::vector<int>(dims > 0 ? dims : 0, resolution), reduced_size);
}

int FrequencyLayout::full_freq(int axis, int index) const {
  return signed_frequency(index, resolution_[axis]);
}

std::vector<int> FrequencyLayout::full_freqs(int axis) const {
  std::vector<int> out(resolution_[axis]);
  for (int i = 0; i < resolution_[axis]; ++i) out[i] = full_freq(axis, i);
  return out;
}

Extents FrequencyLayout::factor_extents(int factor) const {
  Extents ext{1, 1, 1};
  for (int axis = 0; axis < dims_; ++axis) {
    ext[axis] = axis == factor ? reduced_size_ : resolution_[axis];
  }
  return ext;
}

std::size_t FrequencyLayout::factor_size(int factor) const {
  const Extents ext = factor_extents(factor);
  return static_cast<std::size_t>(ext[0]) * ext[1] * ext[2];
}

std::array<int, kMaxDims> FrequencyLayout::frequency(int factor, const Extents& index) const {
  std::array<int, kMaxDims> freq{0, 0, 0};
  for (int axis = 0; axis < dims_; ++axis) {
    freq[axis] = axis == factor ? reduced_freqs_[index[axis]] : full_freq(axis, index[axis]);
  }
  return freq;
}

}  // namespace pref
