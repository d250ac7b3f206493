#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace pref {

// Largest supported spatial dimensionality.
inline constexpr int kMaxDims = 3;

// Extents of a multi-dimensional array, padded with 1 beyond the used axes.
using Extents = std::array<int, kMaxDims>;

// Frequency support of a factorized phasor volume.
//
// Every spatial axis carries a full signed frequency set of size N (stored in
// FFT order: 0, 1, ..., then the negative frequencies). Factor `a` replaces
// the full set along axis `a` by the D log-sampled frequencies
// {0, 1, 2, 4, ..., 2^(D-2)}.
class FrequencyLayout {
 public:
  // Throws LayoutError when the invariants do not hold.
  FrequencyLayout(int dims, std::vector<int> resolution, int reduced_size);

  // Same resolution on every axis.
  static FrequencyLayout uniform(int dims, int resolution, int reduced_size);

  int dims() const { return dims_; }
  int resolution(int axis) const { return resolution_[axis]; }
  const std::vector<int>& resolutions() const { return resolution_; }
  int reduced_size() const { return reduced_size_; }
  const std::vector<int>& reduced_freqs() const { return reduced_freqs_; }

  // Signed frequency (cycles per unit domain) of storage index `index` on a
  // full axis. Covers {-N/2, ..., N/2 - 1} for even N.
  int full_freq(int axis, int index) const;
  // Full signed set of `axis` in storage order.
  std::vector<int> full_freqs(int axis) const;

  // Extents of factor `factor`'s coefficient block for one channel.
  Extents factor_extents(int factor) const;
  std::size_t factor_size(int factor) const;

  // Frequency vector of a stored coefficient.
  std::array<int, kMaxDims> frequency(int factor, const Extents& index) const;

  bool operator==(const FrequencyLayout&) const = default;

 private:
  int dims_;
  std::vector<int> resolution_;
  int reduced_size_;
  std::vector<int> reduced_freqs_;
};

// Frequency stored at position `i` of a reduced axis.
constexpr int reduced_frequency(int i) { return i == 0 ? 0 : 1 << (i - 1); }

// Signed frequency for FFT-ordered index `index` of an axis with `n` bins.
constexpr int signed_frequency(int index, int n) {
  return index <= (n - 1) / 2 ? index : index - n;
}

}  // namespace pref
