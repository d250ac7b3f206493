#pragma once

#include <vector>

#include "pref/phasor_volume.hpp"
#include "pref/tensor.hpp"

namespace pref {

// Gradient with respect to every coefficient of a PhasorVolume, in the same
// flat order as PhasorVolume::coefficients(). Each entry packs the pair
// (dL/dRe c, dL/dIm c) as real and imaginary part.
using VolumeGradient = std::vector<Complex>;

// Adjoint of eval_fast: given dL/df for every sample, returns dL/dc for every
// stored coefficient. Composes the numerical-integration adjoint (conjugate
// exponential weights), the interpolation adjoint (periodic multilinear
// scatter) and the FFT adjoint (the analysis transform). Per-worker scatter
// buffers are reduced in worker order, so results are deterministic for a
// fixed thread count.
VolumeGradient backprop_to_volume(const PhasorVolume& volume, const Matrix& coords,
                                  const Matrix& grad_features, int threads = 1);

}  // namespace pref
