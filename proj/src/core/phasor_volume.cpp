#include "pref/phasor_volume.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "pref/errors.hpp"
#include "pref/fft.hpp"
#include "pref/random.hpp"
#include "revision.hpp"

namespace pref {

std::uint64_t next_revision() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

PhasorVolume::PhasorVolume(FrequencyLayout layout, int channels)
    : layout_(std::move(layout)), channels_(channels), revision_(next_revision()) {
  if (channels_ < 1) throw DomainError("phasor volume needs at least one channel");
  std::size_t total = 0;
  for (int a = 0; a < layout_.dims(); ++a) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(channels_) * layout_.factor_size(a);
  }
  offsets_.push_back(total);
  coefficients_.assign(total, Complex(0.0, 0.0));
}

std::span<Complex> PhasorVolume::mutable_coefficients() {
  touch();
  return coefficients_;
}

std::span<const Complex> PhasorVolume::factor(int a) const {
  return std::span<const Complex>(coefficients_).subspan(offsets_[a], offsets_[a + 1] - offsets_[a]);
}

std::span<Complex> PhasorVolume::mutable_factor(int a) {
  touch();
  return std::span<Complex>(coefficients_).subspan(offsets_[a], offsets_[a + 1] - offsets_[a]);
}

std::size_t PhasorVolume::index(int factor, int channel, const Extents& position) const {
  const Extents ext = layout_.factor_extents(factor);
  for (int axis = 0; axis < kMaxDims; ++axis) {
    if (position[axis] < 0 || position[axis] >= ext[axis]) {
      throw DimensionError("coefficient position out of range on axis " + std::to_string(axis));
    }
  }
  if (channel < 0 || channel >= channels_) throw DimensionError("channel out of range");
  return offsets_[factor] +
         ((static_cast<std::size_t>(channel) * ext[0] + position[0]) * ext[1] + position[1]) * ext[2] +
         position[2];
}

void PhasorVolume::set_coefficient(int factor, int channel, const Extents& position, Complex value) {
  coefficients_[index(factor, channel, position)] = value;
  touch();
}

void PhasorVolume::touch() { revision_ = next_revision(); }

namespace {

// Number of factors that store the frequency vector `freq`.
int factor_multiplicity(const FrequencyLayout& layout, const std::array<int, kMaxDims>& freq) {
  int count = 0;
  for (int a = 0; a < layout.dims(); ++a) {
    for (int r : layout.reduced_freqs()) {
      if (r == freq[a]) {
        ++count;
        break;
      }
    }
  }
  return count;
}

int wrap_index(int freq, int n) { return ((freq % n) + n) % n; }

PhasorVolume volume_from_field(const FrequencyLayout& layout, int channels, const SampleGrid& field) {
  const int dims = layout.dims();
  if (static_cast<int>(field.extents.size()) != dims) {
    throw DimensionError("field grid dimensionality does not match layout");
  }
  for (int axis = 0; axis < dims; ++axis) {
    if (field.extents[axis] != layout.resolution(axis)) {
      throw DimensionError("field grid extent " + std::to_string(field.extents[axis]) +
                           " does not match layout resolution " +
                           std::to_string(layout.resolution(axis)) + " on axis " +
                           std::to_string(axis));
    }
  }
  if (field.channels != 1 && field.channels != channels) {
    throw DimensionError("field grid must have 1 or " + std::to_string(channels) + " channels");
  }
  if (field.values.size() != field.points() * field.channels) {
    throw DimensionError("field grid value count does not match its extents");
  }

  PhasorVolume volume(layout, channels);
  const std::size_t points = field.points();
  const std::vector<int>& shape = field.extents;
  double norm = 1.0;
  for (int e : shape) norm *= e;

  auto spectrum_of = [&](int grid_channel) {
    std::vector<Complex> spectrum(points);
    for (std::size_t p = 0; p < points; ++p) spectrum[p] = field.at(grid_channel, p);
    for (int axis = 0; axis < dims; ++axis) fft::forward_axis(spectrum, shape, axis);
    for (Complex& z : spectrum) z /= norm;
    return spectrum;
  };

  auto flat_bin = [&](const std::array<int, kMaxDims>& freq) {
    std::size_t flat = 0;
    for (int axis = 0; axis < dims; ++axis) {
      flat = flat * shape[axis] + wrap_index(freq[axis], shape[axis]);
    }
    return flat;
  };

  std::vector<Complex> spectrum;
  for (int c = 0; c < channels; ++c) {
    if (c == 0 || field.channels > 1) spectrum = spectrum_of(field.channels > 1 ? c : 0);
    for (int a = 0; a < dims; ++a) {
      const Extents ext = layout.factor_extents(a);
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2) {
            const Extents pos{i0, i1, i2};
            const auto freq = layout.frequency(a, pos);
            std::array<int, kMaxDims> partner{0, 0, 0};
            for (int axis = 0; axis < dims; ++axis) {
              const int n = layout.resolution(axis);
              partner[axis] = signed_frequency(wrap_index(-freq[axis], n), n);
            }
            Complex value = spectrum[flat_bin(freq)];
            // The real part is taken on synthesis, so a bin whose conjugate
            // partner is not stored anywhere must carry both halves.
            if (partner != freq && factor_multiplicity(layout, partner) == 0) value *= 2.0;
            value /= static_cast<double>(factor_multiplicity(layout, freq));
            volume.set_coefficient(a, c, pos, value);
          }
        }
      }
    }
  }
  return volume;
}

}  // namespace

PhasorVolume new_volume(const FrequencyLayout& layout, int channels, const InitMode& init) {
  if (channels < 1) throw DomainError("phasor volume needs at least one channel");
  if (const auto* from_field = std::get_if<FromField>(&init)) {
    return volume_from_field(layout, channels, from_field->field);
  }
  PhasorVolume volume(layout, channels);
  if (const auto* random = std::get_if<RandomInit>(&init)) {
    if (!(random->field_std >= 0.0) || !std::isfinite(random->field_std)) {
      throw DomainError("random init standard deviation must be finite and non-negative");
    }
    auto coefs = volume.mutable_coefficients();
    // Re(c e^{j theta}) has variance sigma^2 when both parts of c do.
    const double per_channel = static_cast<double>(coefs.size()) / channels;
    const double sigma = random->field_std / std::sqrt(per_channel);
    Rng rng(random->seed);
    for (Complex& c : coefs) {
      const double re = round_to_float(sigma * rng.normal());
      const double im = round_to_float(sigma * rng.normal());
      c = Complex(re, im);
    }
  }
  return volume;
}

PhasorVolume gaussian_filter(const PhasorVolume& volume, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw DomainError("gaussian filter sigma must be finite and non-negative");
  }
  PhasorVolume out = volume;
  if (sigma == 0.0) return out;
  const FrequencyLayout& layout = volume.layout();
  std::span<Complex> coefs = out.mutable_coefficients();
  const double sigma2 = sigma * sigma;
  for (int a = 0; a < volume.dims(); ++a) {
    const Extents ext = layout.factor_extents(a);
    for (int c = 0; c < volume.channels(); ++c) {
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2) {
            const Extents pos{i0, i1, i2};
            const auto freq = layout.frequency(a, pos);
            double kk = 0.0;
            for (int axis = 0; axis < volume.dims(); ++axis) {
              const double k = static_cast<double>(freq[axis]) / layout.resolution(axis);
              kk += k * k;
            }
            coefs[volume.index(a, c, pos)] *= std::exp(-kk * sigma2);
          }
        }
      }
    }
  }
  return out;
}

double high_band_energy(const PhasorVolume& volume, int cutoff) {
  const FrequencyLayout& layout = volume.layout();
  double energy = 0.0;
  for (int a = 0; a < volume.dims(); ++a) {
    const Extents ext = layout.factor_extents(a);
    for (int c = 0; c < volume.channels(); ++c) {
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2) {
            const Extents pos{i0, i1, i2};
            const auto freq = layout.frequency(a, pos);
            bool high = false;
            for (int axis = 0; axis < volume.dims(); ++axis) high |= std::abs(freq[axis]) > cutoff;
            if (high) energy += std::norm(volume.coefficient(a, c, pos));
          }
        }
      }
    }
  }
  return energy;
}

double coefficient_energy(const PhasorVolume& volume) {
  double energy = 0.0;
  for (const Complex& z : volume.coefficients()) energy += std::norm(z);
  return energy;
}

bool all_finite(const PhasorVolume& volume) {
  for (const Complex& z : volume.coefficients()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

}  // namespace pref
