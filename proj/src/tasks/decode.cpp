#include "pref/tasks/decode.hpp"

#include <algorithm>

#include "pref/transform.hpp"

namespace pref::tasks {

Matrix encode(const EncoderState& encoder, const Matrix& coords, int threads) {
  if (const auto* volume = std::get_if<PhasorVolume>(&encoder)) return eval_fast(*volume, coords, threads);
  return std::get<DenseGrid>(encoder).evaluate(coords);
}

Matrix decode(const Checkpoint& checkpoint, const Matrix& coords, int threads) {
  constexpr Eigen::Index kChunk = 16384;
  Matrix out(coords.rows(), checkpoint.mlp.output_width());
  for (Eigen::Index begin = 0; begin < coords.rows(); begin += kChunk) {
    const Eigen::Index count = std::min(kChunk, coords.rows() - begin);
    const Matrix features = encode(checkpoint.encoder, coords.middleRows(begin, count), threads);
    out.middleRows(begin, count) = forward(checkpoint.mlp, features).first;
  }
  return out;
}

}  // namespace pref::tasks
