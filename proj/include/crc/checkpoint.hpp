#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crc/training.hpp"

namespace crc {

// Binary checkpoint: "CRC1", little-endian u32 section count, then per
// section u32 name length, name, u64 payload length, payload. Tensor
// payloads are u32 count followed by (u32 rank, u32 dims..., f64 values).
//
// Sections: config, state, extractor, decomposer, cic, memory,
// adam_m, adam_v, and clusters once k-means has run.
std::vector<std::uint8_t> encode_checkpoint(const TrainState& state);
TrainState decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const TrainState& state);
TrainState load_checkpoint(const std::string& path);

}  // namespace crc
