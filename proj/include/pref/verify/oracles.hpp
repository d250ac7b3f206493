#pragma once

#include <functional>

#include "pref/layout.hpp"
#include "pref/phasor_volume.hpp"
#include "pref/random.hpp"
#include "pref/tensor.hpp"

// Independent reference computations used by the self-test and the test
// suites. Nothing here is on a training path.
namespace pref::verify {

// Coefficients with real and imaginary parts uniform in [-scale, scale].
PhasorVolume random_volume(const FrequencyLayout& layout, int channels, Rng& rng, double scale = 1.0);

// As random_volume, with every factor other than `factor` zero.
PhasorVolume random_single_factor(const FrequencyLayout& layout, int channels, int factor, Rng& rng);

// Random coefficients only where every frequency component satisfies |f| <= band.
PhasorVolume random_band_limited(const FrequencyLayout& layout, int channels, int band, Rng& rng);

Matrix random_coords(int count, int dims, Rng& rng);

// Coordinates whose every component is a lattice point m / N_axis.
Matrix lattice_coords(const FrequencyLayout& layout, int count, Rng& rng);

// Merges all factors into one zero-padded spectrum and evaluates the real
// part of its inverse DFT directly at each coordinate.
Matrix dense_spectrum_eval(const PhasorVolume& volume, const Matrix& coords);

// max |value - reference| / max |reference| (absolute when the reference is 0).
double relative_error(const Matrix& value, const Matrix& reference);

using Field = std::function<Matrix(const Matrix&)>;

// Central finite difference of `field` along `axis`: first order uses
// (f(x+h) - f(x-h)) / 2h, second order (f(x+h) - 2 f(x) + f(x-h)) / h^2.
Matrix central_difference(const Field& field, const Matrix& coords, int axis, int order, double h);

}  // namespace pref::verify
