#pragma once

#include "pref/checkpoint.hpp"
#include "pref/tensor.hpp"

namespace pref::tasks {

// Encoder features at unit-domain coordinates, [B, k].
Matrix encode(const EncoderState& encoder, const Matrix& coords, int threads = 1);

// MLP(encoder(coords)), [B, out].
Matrix decode(const Checkpoint& checkpoint, const Matrix& coords, int threads = 1);

}  // namespace pref::tasks
