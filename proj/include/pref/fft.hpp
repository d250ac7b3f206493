#pragma once

#include <span>

#include "pref/tensor.hpp"

namespace pref::fft {

// Unnormalized synthesis transform along `axis` of a row-major array with the
// given shape, in place:
//   X[m] = sum_i x[i] exp(+j 2 pi i m / n).
void inverse_axis(std::span<Complex> data, std::span<const int> shape, int axis);

// Analysis transform X[u] = sum_m x[m] exp(-j 2 pi u m / n) along `axis`,
// computed as conj(inverse(conj(x))) so both directions share one kernel.
void forward_axis(std::span<Complex> data, std::span<const int> shape, int axis);

}  // namespace pref::fft
