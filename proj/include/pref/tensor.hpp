#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace pref {

using Complex = std::complex<double>;

// Row-major dense matrix. Batches are stored one sample per row: coordinates
// are [B, n], features [B, k], network outputs [B, m].
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Rounds to the nearest single-precision value. The empty asm keeps the
// vectorizer of some GCC releases from folding the round trip away.
inline double round_to_float(double x) {
  float f = static_cast<float>(x);
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  asm("" : "+x"(f));
#elif defined(__GNUC__)
  asm("" : "+r"(f));
#endif
  return f;
}

inline Complex round_to_float(Complex z) { return Complex(round_to_float(z.real()), round_to_float(z.imag())); }

// Values of a k-channel field sampled on a regular lattice covering the unit
// domain. Lattice point (i0, i1[, i2]) sits at coordinate (i0/E0, i1/E1[, i2/E2]).
// Storage is channel-major then row-major over the axes.
struct SampleGrid {
  std::vector<int> extents;
  int channels = 1;
  std::vector<double> values;

  SampleGrid() = default;
  SampleGrid(std::vector<int> extents_in, int channels_in)
      : extents(std::move(extents_in)), channels(channels_in),
        values(static_cast<std::size_t>(channels_in) * points(), 0.0) {}

  std::size_t points() const {
    std::size_t total = 1;
    for (int e : extents) total *= static_cast<std::size_t>(e);
    return total;
  }

  double& at(int channel, std::size_t point) {
    return values[static_cast<std::size_t>(channel) * points() + point];
  }
  double at(int channel, std::size_t point) const {
    return values[static_cast<std::size_t>(channel) * points() + point];
  }
};

}  // namespace pref
