#pragma once

#include <cstdint>
#include <filesystem>

#include "mlkit/model.hpp"

namespace mlkit {

// Binary layout, little-endian throughout:
//   "MLKITCKPT"                      9 bytes
//   format version                   uint32
//   architecture (0 linear, 1 mlp)   uint32
//   dimension count                  uint32
//   dimensions                       uint64 each
//   parameters                       float64 each, layer by layer, W then b,
//                                    row-major
inline constexpr char kCheckpointMagic[] = "MLKITCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Throws IoFailure.
void checkpoint_save(const EmbedderModel& model, const std::filesystem::path& path);

// Throws IoFailure (unreadable) or CorruptCheckpoint (bad magic, version,
// descriptor, truncation or trailing bytes).
EmbedderModel checkpoint_load(const std::filesystem::path& path);

}  // namespace mlkit
