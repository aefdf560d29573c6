#pragma once

#include <filesystem>
#include <span>

#include "argrid/io.hpp"
#include "argrid/model.hpp"

namespace argrid {

// Layout: 8-byte magic "ARCKPT01", u32 LE header length, UTF-8 JSON header
// (config, seed, tensor table, optional normalization), then f32 LE tensors
// in layer order, weights (C_out, C_in, K, K) then bias.

struct CheckpointLoadOptions {
    /// Reject files whose weights are nonzero at masked taps.
    bool verify_masks = true;
};

Bytes save_checkpoint(const ArModel<float>& model);
ArModel<float> load_checkpoint(std::span<const std::uint8_t> bytes, const CheckpointLoadOptions& options = {});

void write_checkpoint(const std::filesystem::path& path, const ArModel<float>& model);
ArModel<float> read_checkpoint(const std::filesystem::path& path, const CheckpointLoadOptions& options = {});

/// Byte offset of a flat weight entry inside a checkpoint produced by save_checkpoint.
std::size_t checkpoint_weight_offset(std::span<const std::uint8_t> bytes, std::size_t layer, Index flat_index);

} // namespace argrid
