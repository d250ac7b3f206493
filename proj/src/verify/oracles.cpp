#include "pref/verify/oracles.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "pref/errors.hpp"

namespace pref::verify {

namespace {

template <class Keep>
PhasorVolume fill_random(const FrequencyLayout& layout, int channels, Rng& rng, double scale, Keep keep) {
  PhasorVolume volume(layout, channels);
  auto coefs = volume.mutable_coefficients();
  std::size_t flat = 0;
  for (int a = 0; a < layout.dims(); ++a) {
    const Extents ext = layout.factor_extents(a);
    for (int c = 0; c < channels; ++c) {
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2, ++flat) {
            const double re = rng.uniform(-scale, scale);
            const double im = rng.uniform(-scale, scale);
            if (keep(a, layout.frequency(a, {i0, i1, i2}))) coefs[flat] = Complex(re, im);
          }
        }
      }
    }
  }
  return volume;
}

}  // namespace

PhasorVolume random_volume(const FrequencyLayout& layout, int channels, Rng& rng, double scale) {
  return fill_random(layout, channels, rng, scale, [](int, const auto&) { return true; });
}

PhasorVolume random_single_factor(const FrequencyLayout& layout, int channels, int factor, Rng& rng) {
  return fill_random(layout, channels, rng, 1.0, [factor](int a, const auto&) { return a == factor; });
}

PhasorVolume random_band_limited(const FrequencyLayout& layout, int channels, int band, Rng& rng) {
  const int dims = layout.dims();
  return fill_random(layout, channels, rng, 1.0, [band, dims](int, const std::array<int, kMaxDims>& f) {
    for (int axis = 0; axis < dims; ++axis) {
      if (std::abs(f[axis]) > band) return false;
    }
    return true;
  });
}

Matrix random_coords(int count, int dims, Rng& rng) {
  Matrix coords(count, dims);
  for (int s = 0; s < count; ++s) {
    for (int axis = 0; axis < dims; ++axis) coords(s, axis) = rng.uniform();
  }
  return coords;
}

Matrix lattice_coords(const FrequencyLayout& layout, int count, Rng& rng) {
  Matrix coords(count, layout.dims());
  for (int s = 0; s < count; ++s) {
    for (int axis = 0; axis < layout.dims(); ++axis) {
      const int n = layout.resolution(axis);
      coords(s, axis) = static_cast<double>(rng.index(n)) / n;
    }
  }
  return coords;
}

Matrix dense_spectrum_eval(const PhasorVolume& volume, const Matrix& coords) {
  const FrequencyLayout& layout = volume.layout();
  const int dims = layout.dims();
  if (coords.cols() != dims) throw DimensionError("oracle: coordinate width mismatch");
  // Zero-padded spectrum keyed by signed frequency vector.
  std::vector<std::map<std::array<int, kMaxDims>, Complex>> spectrum(volume.channels());
  for (int a = 0; a < dims; ++a) {
    const Extents ext = layout.factor_extents(a);
    for (int c = 0; c < volume.channels(); ++c) {
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2) {
            spectrum[c][layout.frequency(a, {i0, i1, i2})] += volume.coefficient(a, c, {i0, i1, i2});
          }
        }
      }
    }
  }
  Matrix out = Matrix::Zero(coords.rows(), volume.channels());
  for (Eigen::Index s = 0; s < coords.rows(); ++s) {
    for (int c = 0; c < volume.channels(); ++c) {
      double acc = 0.0;
      for (const auto& [freq, value] : spectrum[c]) {
        double phase = 0.0;
        for (int axis = 0; axis < dims; ++axis) phase += freq[axis] * coords(s, axis);
        const double angle = 2.0 * std::numbers::pi * phase;
        acc += value.real() * std::cos(angle) - value.imag() * std::sin(angle);
      }
      out(s, c) = acc;
    }
  }
  return out;
}

double relative_error(const Matrix& value, const Matrix& reference) {
  if (value.rows() != reference.rows() || value.cols() != reference.cols()) {
    throw DimensionError("relative_error: shape mismatch");
  }
  if (value.size() == 0) return 0.0;
  const double diff = (value - reference).cwiseAbs().maxCoeff();
  const double scale = reference.cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

Matrix central_difference(const Field& field, const Matrix& coords, int axis, int order, double h) {
  Matrix plus = coords;
  Matrix minus = coords;
  plus.col(axis).array() += h;
  minus.col(axis).array() -= h;
  const Matrix fp = field(plus);
  const Matrix fm = field(minus);
  if (order == 1) return (fp - fm) / (2.0 * h);
  if (order == 2) return (fp - 2.0 * field(coords) + fm) / (h * h);
  throw DomainError("central_difference supports order 1 or 2");
}

}  // namespace pref::verify
