#pragma once

#include <filesystem>

#include "dopamine/model.hpp"

namespace dopamine {

/// DPMN checkpoint: magic "DPMN", u32 version (1), u32 num_layers,
/// u32 channels, u32 tensor count, then per tensor a u16 name length,
/// the UTF-8 name, u8 rank, u64 extents and a little-endian f32 payload.
/// Only weights are stored; masks and shifts are fixed by the architecture.
void save_checkpoint(const std::filesystem::path& path, const DopamineModel& model);

/// Validates magic, version, architecture descriptor, every record and the
/// total file size. Throws std::runtime_error on any mismatch.
DopamineModel load_checkpoint(const std::filesystem::path& path);

}  // namespace dopamine
