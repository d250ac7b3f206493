#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "pref/mlp.hpp"
#include "pref/phasor_volume.hpp"
#include "pref/tasks/dense_grid.hpp"

namespace pref {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class TaskKind : std::uint8_t { None = 0, Image = 1, Sdf = 2 };

struct CheckpointMetadata {
  TaskKind task = TaskKind::None;
  std::uint64_t step = 0;
  std::vector<double> loss_tail;

  bool operator==(const CheckpointMetadata&) const = default;
};

using EncoderState = std::variant<PhasorVolume, tasks::DenseGrid>;

struct Checkpoint {
  EncoderState encoder;
  MlpParams mlp;
  CheckpointMetadata metadata;
};

// Byte layout is described in docs/checkpoint_format.md. Values are written
// as 32-bit floats when every value is exactly representable in that width
// (the trainer keeps parameters float-representable), otherwise as 64-bit
// doubles, so load(save(x)) == x always.
std::vector<std::uint8_t> serialize(const Checkpoint& checkpoint);
// Throws FormatError with the byte offset of the first problem.
Checkpoint deserialize(std::span<const std::uint8_t> bytes);

// Throws IoError when the file cannot be written or read.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void save(const PhasorVolume& volume, const MlpParams& mlp, const std::filesystem::path& path);
// Throws FormatError if the checkpoint does not hold a phasor volume.
std::pair<PhasorVolume, MlpParams> load(const std::filesystem::path& path);

}  // namespace pref
