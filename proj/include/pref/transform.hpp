#pragma once

#include <cstdint>
#include <vector>

#include "pref/phasor_volume.hpp"
#include "pref/tensor.hpp"

namespace pref {

enum class Evaluation { Exact, Fast };

// Brute-force synthesis: for every factor, Re sum over all stored frequencies
// of coef * exp(j 2 pi <freq, x>), summed over factors. Cost is
// O(B k N^(n-1) D n); meant for tests and tiny problems.
// Coordinates outside [0, 1) wrap periodically. Returns [B, k].
Matrix eval_exact(const PhasorVolume& volume, const Matrix& coords);

// Complex-valued brute-force synthesis before the real part is taken.
Eigen::MatrixXcd eval_exact_complex(const PhasorVolume& volume, const Matrix& coords);

// FFT + interpolation + numerical integration evaluator.
//
// Per factor, an inverse FFT over every non-reduced axis produces the
// intermediate map on the lattice x* = m / N. Each sample interpolates that
// map multilinearly (periodic) at its non-reduced coordinates and sums the D
// reduced frequencies explicitly. Agrees with eval_exact when the non-reduced
// coordinates are lattice points.
//
// Intermediate maps are cached per volume revision and rebuilt whenever the
// volume is modified. prepare() fills the cache; evaluate() calls it first, so
// a prepared evaluator can be shared by concurrent readers of one snapshot.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(int threads = 1) : threads_(threads) {}

  void prepare(const PhasorVolume& volume);
  Matrix evaluate(const PhasorVolume& volume, const Matrix& coords);

  // Number of times the intermediate maps were (re)built.
  int rebuild_count() const { return rebuilds_; }

  // Intermediate map of `factor`, laid out [lattice][channel][reduced index].
  const std::vector<Complex>& intermediate_map(int factor) const { return maps_[factor]; }

 private:
  int threads_;
  std::uint64_t revision_ = 0;
  bool valid_ = false;
  int rebuilds_ = 0;
  std::vector<std::vector<Complex>> maps_;
};

// One-shot fast evaluation. Returns [B, k].
Matrix eval_fast(const PhasorVolume& volume, const Matrix& coords, int threads = 1);

// Volume whose coefficients are (j 2 pi freq_axis)^order * coef; its field is
// the order-th partial derivative along `axis`.
PhasorVolume derivative_volume(const PhasorVolume& volume, int axis, int order);

// d^order f / dx_axis^order. Throws DomainError for order outside {1, 2} and
// DimensionError for an axis outside the volume.
Matrix eval_derivative(const PhasorVolume& volume, const Matrix& coords, int axis, int order,
                       Evaluation mode = Evaluation::Fast);

// Energy of the real field (sum over channels of the integral of f^2 over the
// unit domain), computed from the coefficients. Coefficients of coinciding
// frequencies in different factors are merged first; the real-part convention
// gives E = 1/2 sum |C_u|^2 + 1/2 Re sum C_u C_(-u).
double spectral_energy(const PhasorVolume& volume);

// The same quantity for the field of a single factor.
double factor_spectral_energy(const PhasorVolume& volume, int factor);

// Mean of f^2 over a dense grid_res^n lattice (times the unit domain volume),
// summed over channels. Throws DomainError unless grid_res >= N on every axis.
double spatial_energy(const PhasorVolume& volume, int grid_res);

// Complex field sum_a sum_u P_a[u] exp(j 2 pi <u, x>) on the lattice
// x = m / grid_res, computed exactly by a zero-padded inverse FFT.
// Layout [channel][lattice point].
std::vector<Complex> dense_complex_field(const PhasorVolume& volume, int grid_res);

// Real part of dense_complex_field as a SampleGrid.
SampleGrid dense_field(const PhasorVolume& volume, int grid_res);

}  // namespace pref
