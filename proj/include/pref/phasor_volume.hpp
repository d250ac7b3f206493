#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "pref/layout.hpp"
#include "pref/tensor.hpp"

namespace pref {

// Multi-channel factorized phasor volume.
//
// Factor `a` holds complex coefficients of shape [k, E0, E1(, E2)] where
// E_a = D (reduced axis) and every other extent is the full resolution N.
// All factors live in one contiguous buffer so optimizers can treat the
// volume as a flat array of (real, imag) pairs.
//
// The represented field is f(x) = Re sum_a sum_u P_a[u] exp(j 2 pi <u, x>).
// No 1/N factor is applied on synthesis.
class PhasorVolume {
 public:
  PhasorVolume(FrequencyLayout layout, int channels);

  const FrequencyLayout& layout() const { return layout_; }
  int dims() const { return layout_.dims(); }
  int channels() const { return channels_; }

  std::span<const Complex> coefficients() const { return coefficients_; }
  // Writable view of every coefficient. Invalidates cached transforms.
  std::span<Complex> mutable_coefficients();

  std::span<const Complex> factor(int a) const;
  std::span<Complex> mutable_factor(int a);
  std::size_t factor_offset(int a) const { return offsets_[a]; }

  // Flat position of one coefficient inside coefficients().
  std::size_t index(int factor, int channel, const Extents& position) const;

  Complex coefficient(int factor, int channel, const Extents& position) const {
    return coefficients_[index(factor, channel, position)];
  }
  void set_coefficient(int factor, int channel, const Extents& position, Complex value);

  // Changes whenever coefficients may have been written. Copies share the
  // revision of their source until one of them is modified.
  std::uint64_t revision() const { return revision_; }
  void touch();

  // Count of real scalars (two per complex coefficient).
  std::size_t parameter_count() const { return 2 * coefficients_.size(); }

  bool operator==(const PhasorVolume& other) const {
    return layout_ == other.layout_ && channels_ == other.channels_ &&
           coefficients_ == other.coefficients_;
  }

 private:
  FrequencyLayout layout_;
  int channels_;
  std::vector<std::size_t> offsets_;
  std::vector<Complex> coefficients_;
  std::uint64_t revision_;
};

// Coefficients are zero.
struct ZeroInit {};

// Coefficients come from the forward DFT of `field`, sampled on the layout's
// lattice (extents equal to the resolution on every axis). A single-channel
// field initializes every channel identically.
struct FromField {
  SampleGrid field;
};

// Independent Gaussian coefficients scaled so that the synthesized field of
// each channel has standard deviation `field_std`. Values are rounded to
// float. With zero-initialized MLP biases and ReLU units an all-zero volume
// receives no gradient, so training starts from this mode.
struct RandomInit {
  double field_std = 0.1;
  std::uint64_t seed = 0;
};

using InitMode = std::variant<ZeroInit, FromField, RandomInit>;

// Throws DimensionError for a field whose extents or channel count do not
// match, DomainError for channels < 1.
PhasorVolume new_volume(const FrequencyLayout& layout, int channels,
                        const InitMode& init = ZeroInit{});

// Scales every coefficient by exp(-|k|^2 sigma^2) with k = [u0/N0, u1/N1, ...].
// Throws DomainError for negative or non-finite sigma.
PhasorVolume gaussian_filter(const PhasorVolume& volume, double sigma);

// Sum of |c|^2 over coefficients with any |frequency component| > cutoff.
double high_band_energy(const PhasorVolume& volume, int cutoff);

// Sum of |c|^2 over all stored coefficients.
double coefficient_energy(const PhasorVolume& volume);

// True when every coefficient is finite.
bool all_finite(const PhasorVolume& volume);

}  // namespace pref
