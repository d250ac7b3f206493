#include "pref/diff.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "parallel.hpp"
#include "pref/errors.hpp"
#include "pref/fft.hpp"
#include "stencil.hpp"

namespace pref {

VolumeGradient backprop_to_volume(const PhasorVolume& volume, const Matrix& coords,
                                  const Matrix& grad_features, int threads) {
  const FrequencyLayout& layout = volume.layout();
  const int dims = volume.dims();
  const int k = volume.channels();
  if (coords.cols() != dims) throw DimensionError("coordinate width does not match volume dims");
  if (grad_features.rows() != coords.rows() || grad_features.cols() != k) {
    throw DimensionError("feature gradient must be [" + std::to_string(coords.rows()) + ", " +
                         std::to_string(k) + "]");
  }
  const int d_size = layout.reduced_size();
  const std::vector<int>& reduced = layout.reduced_freqs();
  const std::size_t samples = static_cast<std::size_t>(coords.rows());
  const int workers = detail::worker_count(samples, threads);

  VolumeGradient gradient(volume.coefficients().size(), Complex(0.0, 0.0));
  for (int a = 0; a < dims; ++a) {
    const std::size_t map_size = detail::lattice_size(layout, a) * k * d_size;
    std::vector<std::vector<Complex>> partial(workers, std::vector<Complex>(map_size));

    detail::parallel_chunks(samples, threads, [&](std::size_t begin, std::size_t end, int worker) {
      std::vector<Complex>& grad_map = partial[worker];
      std::vector<Complex> grad_interp(static_cast<std::size_t>(k) * d_size);
      std::vector<Complex> conj_ni(d_size);
      for (std::size_t s = begin; s < end; ++s) {
        double x[kMaxDims] = {0.0, 0.0, 0.0};
        for (int axis = 0; axis < dims; ++axis) x[axis] = detail::wrap_unit(coords(s, axis));
        for (int d = 0; d < d_size; ++d) {
          const double angle = 2.0 * std::numbers::pi * reduced[d] * x[a];
          conj_ni[d] = Complex(std::cos(angle), -std::sin(angle));
        }
        for (int c = 0; c < k; ++c) {
          const double g = grad_features(s, c);
          for (int d = 0; d < d_size; ++d) grad_interp[c * d_size + d] = g * conj_ni[d];
        }
        const detail::Stencil st = detail::make_stencil(layout, a, x);
        for (int corner = 0; corner < st.corners; ++corner) {
          const double w = st.weight[corner];
          Complex* block = grad_map.data() + st.lattice[corner] * k * d_size;
          for (std::size_t i = 0; i < grad_interp.size(); ++i) block[i] += w * grad_interp[i];
        }
      }
    });
    for (int w = 1; w < workers; ++w) {
      for (std::size_t i = 0; i < map_size; ++i) partial[0][i] += partial[w][i];
    }
    const std::vector<Complex>& grad_map = partial[0];

    // [lattice][channel][reduced] -> [channel][e0][e1][e2], then the adjoint
    // of the synthesis FFT along every non-reduced axis.
    const Extents ext = layout.factor_extents(a);
    std::vector<int> shape{k};
    for (int axis = 0; axis < dims; ++axis) shape.push_back(ext[axis]);
    std::vector<Complex> work(volume.factor(a).size());
    std::size_t dst = 0;
    for (int c = 0; c < k; ++c) {
      for (int i0 = 0; i0 < ext[0]; ++i0) {
        for (int i1 = 0; i1 < ext[1]; ++i1) {
          for (int i2 = 0; i2 < ext[2]; ++i2, ++dst) {
            const int pos[kMaxDims] = {i0, i1, i2};
            std::size_t lat = 0;
            for (int axis = 0; axis < dims; ++axis) {
              if (axis != a) lat = lat * ext[axis] + pos[axis];
            }
            work[dst] = grad_map[(lat * k + c) * d_size + pos[a]];
          }
        }
      }
    }
    for (int axis = 0; axis < dims; ++axis) {
      if (axis != a) fft::forward_axis(work, shape, axis + 1);
    }
    std::copy(work.begin(), work.end(),
              gradient.begin() + static_cast<std::ptrdiff_t>(volume.factor_offset(a)));
  }
  return gradient;
}

}  // namespace pref
