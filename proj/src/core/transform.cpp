#include "pref/transform.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "parallel.hpp"
#include "pref/errors.hpp"
#include "pref/fft.hpp"
#include "stencil.hpp"

namespace pref {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_coords(const PhasorVolume& volume, const Matrix& coords) {
  if (coords.cols() != volume.dims()) {
    throw DimensionError("coordinates have " + std::to_string(coords.cols()) +
                         " columns, volume has " + std::to_string(volume.dims()) + " dims");
  }
}

Complex phasor(double cycles) {
  const double angle = kTwoPi * cycles;
  return Complex(std::cos(angle), std::sin(angle));
}

// Shape of factor `a` including the leading channel axis.
std::vector<int> factor_shape(const PhasorVolume& volume, int a) {
  const Extents ext = volume.layout().factor_extents(a);
  std::vector<int> shape{volume.channels()};
  for (int axis = 0; axis < volume.dims(); ++axis) shape.push_back(ext[axis]);
  return shape;
}

}  // namespace

Eigen::MatrixXcd eval_exact_complex(const PhasorVolume& volume, const Matrix& coords) {
  check_coords(volume, coords);
  const FrequencyLayout& layout = volume.layout();
  const int dims = volume.dims();
  const int k = volume.channels();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(coords.rows(), k);

  for (Eigen::Index s = 0; s < coords.rows(); ++s) {
    double x[kMaxDims] = {0.0, 0.0, 0.0};
    for (int axis = 0; axis < dims; ++axis) x[axis] = detail::wrap_unit(coords(s, axis));
    for (int a = 0; a < dims; ++a) {
      const Extents ext = layout.factor_extents(a);
      // Per-axis exponentials for every stored index.
      std::array<std::vector<Complex>, kMaxDims> axis_phasor;
      for (int axis = 0; axis < kMaxDims; ++axis) {
        axis_phasor[axis].assign(ext[axis], Complex(1.0, 0.0));
        if (axis >= dims) continue;
        for (int i = 0; i < ext[axis]; ++i) {
          Extents pos{0, 0, 0};
          pos[axis] = i;
          axis_phasor[axis][i] = phasor(layout.frequency(a, pos)[axis] * x[axis]);
        }
      }
      for (int c = 0; c < k; ++c) {
        Complex acc = 0.0;
        for (int i0 = 0; i0 < ext[0]; ++i0) {
          for (int i1 = 0; i1 < ext[1]; ++i1) {
            const Complex p01 = axis_phasor[0][i0] * axis_phasor[1][i1];
            for (int i2 = 0; i2 < ext[2]; ++i2) {
              acc += volume.coefficient(a, c, {i0, i1, i2}) * (p01 * axis_phasor[2][i2]);
            }
          }
        }
        out(s, c) += acc;
      }
    }
  }
  return out;
}

Matrix eval_exact(const PhasorVolume& volume, const Matrix& coords) {
  return eval_exact_complex(volume, coords).real();
}

void FieldEvaluator::prepare(const PhasorVolume& volume) {
  if (valid_ && revision_ == volume.revision() &&
      static_cast<int>(maps_.size()) == volume.dims()) {
    return;
  }
  const FrequencyLayout& layout = volume.layout();
  const int k = volume.channels();
  const int d_size = layout.reduced_size();
  maps_.assign(volume.dims(), {});
  for (int a = 0; a < volume.dims(); ++a) {
    const std::vector<int> shape = factor_shape(volume, a);
    std::vector<Complex> work(volume.factor(a).begin(), volume.factor(a).end());
    for (int axis = 0; axis < volume.dims(); ++axis) {
      if (axis != a) fft::inverse_axis(work, shape, axis + 1);
    }
    // Reorder [channel][e0][e1][e2] -> [lattice][channel][reduced].
    const Extents ext = layout.factor_extents(a);
    const std::size_t lattice = detail::lattice_size(layout, a);
    std::vector<Complex>& map = maps_[a];
    map.assign(lattice * k * d_size, Complex(0.0, 0.0));
    std::size_t src = 0;
    for (int c = 0; c < k; ++c) {
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2, ++src) {
            const int pos[kMaxDims] = {i0, i1, i2};
            std::size_t lat = 0;
            for (int axis = 0; axis < volume.dims(); ++axis) {
              if (axis != a) lat = lat * ext[axis] + pos[axis];
            }
            map[(lat * k + c) * d_size + pos[a]] = work[src];
          }
        }
      }
    }
  }
  revision_ = volume.revision();
  valid_ = true;
  ++rebuilds_;
}

Matrix FieldEvaluator::evaluate(const PhasorVolume& volume, const Matrix& coords) {
  check_coords(volume, coords);
  prepare(volume);
  const FrequencyLayout& layout = volume.layout();
  const int dims = volume.dims();
  const int k = volume.channels();
  const int d_size = layout.reduced_size();
  const std::vector<int>& reduced = layout.reduced_freqs();
  Matrix out = Matrix::Zero(coords.rows(), k);

  detail::parallel_chunks(
      static_cast<std::size_t>(coords.rows()), threads_,
      [&](std::size_t begin, std::size_t end, int) {
        std::vector<Complex> interp(static_cast<std::size_t>(k) * d_size);
        std::vector<Complex> ni(d_size);
        for (std::size_t s = begin; s < end; ++s) {
          double x[kMaxDims] = {0.0, 0.0, 0.0};
          for (int axis = 0; axis < dims; ++axis) x[axis] = detail::wrap_unit(coords(s, axis));
          for (int a = 0; a < dims; ++a) {
            const detail::Stencil st = detail::make_stencil(layout, a, x);
            const std::vector<Complex>& map = maps_[a];
            std::fill(interp.begin(), interp.end(), Complex(0.0, 0.0));
            for (int corner = 0; corner < st.corners; ++corner) {
              const double w = st.weight[corner];
              const Complex* block = map.data() + st.lattice[corner] * k * d_size;
              for (std::size_t i = 0; i < interp.size(); ++i) interp[i] += w * block[i];
            }
            for (int d = 0; d < d_size; ++d) ni[d] = phasor(reduced[d] * x[a]);
            for (int c = 0; c < k; ++c) {
              double acc = 0.0;
              const Complex* row = interp.data() + static_cast<std::size_t>(c) * d_size;
              for (int d = 0; d < d_size; ++d) {
                acc += ni[d].real() * row[d].real() - ni[d].imag() * row[d].imag();
              }
              out(s, c) += acc;
            }
          }
        }
      });
  return out;
}

Matrix eval_fast(const PhasorVolume& volume, const Matrix& coords, int threads) {
  FieldEvaluator evaluator(threads);
  return evaluator.evaluate(volume, coords);
}

PhasorVolume derivative_volume(const PhasorVolume& volume, int axis, int order) {
  if (order != 1 && order != 2) {
    throw DomainError("derivative order must be 1 or 2, got " + std::to_string(order));
  }
  if (axis < 0 || axis >= volume.dims()) {
    throw DimensionError("derivative axis " + std::to_string(axis) + " out of range");
  }
  const FrequencyLayout& layout = volume.layout();
  PhasorVolume out = volume;
  std::span<Complex> coefs = out.mutable_coefficients();
  for (int a = 0; a < volume.dims(); ++a) {
    const Extents ext = layout.factor_extents(a);
    for (int c = 0; c < volume.channels(); ++c) {
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2) {
            const Extents pos{i0, i1, i2};
            const Complex factor(0.0, kTwoPi * layout.frequency(a, pos)[axis]);
            const Complex scale = order == 1 ? factor : factor * factor;
            coefs[volume.index(a, c, pos)] *= scale;
          }
        }
      }
    }
  }
  return out;
}

Matrix eval_derivative(const PhasorVolume& volume, const Matrix& coords, int axis, int order,
                       Evaluation mode) {
  const PhasorVolume derived = derivative_volume(volume, axis, order);
  return mode == Evaluation::Exact ? eval_exact(derived, coords) : eval_fast(derived, coords);
}

namespace {

// Real-field energy of a merged spectrum held on the N^n bin grid.
double merged_energy(const FrequencyLayout& layout, const std::vector<Complex>& bins) {
  const int dims = layout.dims();
  std::vector<int> n(dims);
  for (int axis = 0; axis < dims; ++axis) n[axis] = layout.resolution(axis);
  double energy = 0.0;
  const std::size_t total = bins.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    const Complex value = bins[flat];
    if (value == Complex(0.0, 0.0)) continue;
    energy += 0.5 * std::norm(value);
    // Locate the bin of the negated frequency vector, if it is in the set.
    std::size_t rest = flat;
    std::array<int, kMaxDims> idx{0, 0, 0};
    for (int axis = dims - 1; axis >= 0; --axis) {
      idx[axis] = static_cast<int>(rest % n[axis]);
      rest /= n[axis];
    }
    bool has_partner = true;
    std::size_t partner = 0;
    for (int axis = 0; axis < dims; ++axis) {
      const int f = -signed_frequency(idx[axis], n[axis]);
      if (signed_frequency(((f % n[axis]) + n[axis]) % n[axis], n[axis]) != f) {
        has_partner = false;
        break;
      }
      partner = partner * n[axis] + static_cast<std::size_t>(((f % n[axis]) + n[axis]) % n[axis]);
    }
    if (has_partner) energy += 0.5 * (value * bins[partner]).real();
  }
  return energy;
}

double spectrum_energy(const PhasorVolume& volume, int only_factor) {
  const FrequencyLayout& layout = volume.layout();
  const int dims = volume.dims();
  std::size_t total = 1;
  for (int axis = 0; axis < dims; ++axis) total *= layout.resolution(axis);
  double energy = 0.0;
  std::vector<Complex> bins(total);
  for (int c = 0; c < volume.channels(); ++c) {
    std::fill(bins.begin(), bins.end(), Complex(0.0, 0.0));
    for (int a = 0; a < dims; ++a) {
      if (only_factor >= 0 && a != only_factor) continue;
      const Extents ext = layout.factor_extents(a);
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2) {
            const Extents pos{i0, i1, i2};
            const auto freq = layout.frequency(a, pos);
            std::size_t flat = 0;
            for (int axis = 0; axis < dims; ++axis) {
              const int n = layout.resolution(axis);
              flat = flat * n + static_cast<std::size_t>(((freq[axis] % n) + n) % n);
            }
            bins[flat] += volume.coefficient(a, c, pos);
          }
        }
      }
    }
    energy += merged_energy(layout, bins);
  }
  return energy;
}

}  // namespace

double spectral_energy(const PhasorVolume& volume) { return spectrum_energy(volume, -1); }

double factor_spectral_energy(const PhasorVolume& volume, int factor) {
  if (factor < 0 || factor >= volume.dims()) throw DimensionError("factor index out of range");
  return spectrum_energy(volume, factor);
}

std::vector<Complex> dense_complex_field(const PhasorVolume& volume, int grid_res) {
  const FrequencyLayout& layout = volume.layout();
  const int dims = volume.dims();
  for (int axis = 0; axis < dims; ++axis) {
    if (grid_res < layout.resolution(axis)) {
      throw DomainError("dense grid resolution must be at least the layout resolution");
    }
  }
  std::vector<int> shape(dims, grid_res);
  std::size_t points = 1;
  for (int axis = 0; axis < dims; ++axis) points *= grid_res;
  std::vector<Complex> out(points * volume.channels());
  std::vector<Complex> work(points);
  for (int c = 0; c < volume.channels(); ++c) {
    std::fill(work.begin(), work.end(), Complex(0.0, 0.0));
    for (int a = 0; a < dims; ++a) {
      const Extents ext = layout.factor_extents(a);
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2) {
            const Extents pos{i0, i1, i2};
            const auto freq = layout.frequency(a, pos);
            std::size_t flat = 0;
            for (int axis = 0; axis < dims; ++axis) {
              flat = flat * grid_res + static_cast<std::size_t>(((freq[axis] % grid_res) + grid_res) % grid_res);
            }
            work[flat] += volume.coefficient(a, c, pos);
          }
        }
      }
    }
    for (int axis = 0; axis < dims; ++axis) fft::inverse_axis(work, shape, axis);
    std::copy(work.begin(), work.end(), out.begin() + static_cast<std::ptrdiff_t>(c * points));
  }
  return out;
}

SampleGrid dense_field(const PhasorVolume& volume, int grid_res) {
  const std::vector<Complex> complex_field = dense_complex_field(volume, grid_res);
  SampleGrid grid(std::vector<int>(volume.dims(), grid_res), volume.channels());
  for (std::size_t i = 0; i < complex_field.size(); ++i) grid.values[i] = complex_field[i].real();
  return grid;
}

double spatial_energy(const PhasorVolume& volume, int grid_res) {
  const SampleGrid grid = dense_field(volume, grid_res);
  double sum = 0.0;
  for (double v : grid.values) sum += v * v;
  return sum / static_cast<double>(grid.points());
}

}  // namespace pref
