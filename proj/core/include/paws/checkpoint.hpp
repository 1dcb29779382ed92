#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "paws/encoder.hpp"
#include "paws/optim.hpp"

namespace paws {

/// Binary checkpoint, little-endian throughout:
///   "PAWS" magic, u32 format version, u32 array count,
///   u32 trunk layers, u32 projection layers, u32 prediction layers,
///   u32 has-optimizer flag, u64 step count,
///   then per array: u64 rows, u64 cols, rows*cols f64 payload.
/// Arrays are the encoder parameters in canonical order (weight before bias,
/// trunk then projection then prediction), followed, when the optimizer flag
/// is set, by the velocity buffers in the same order. Save -> load -> save is
/// bit-identical.
struct Checkpoint {
    EncoderParams params;
    std::optional<std::vector<Matrix>> velocity;
    std::uint64_t step_count = 0;
};

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params,
                     const OptimizerState* optimizer = nullptr, std::uint64_t step_count = 0);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace paws
