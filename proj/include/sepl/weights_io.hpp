#pragma once

// SEPN weight files, all integers and floats little-endian:
//   "SEPN" | u32 version (1) | u32 layer count | u32 input channels |
//   u32 input height | u32 input width | per layer:
//     u8 kind tag | shape u32s | f32 parameters
// Shape fields per kind: conv (kernel, in, out, stride, pad); multiscale conv
// (narrow kernel, wide kernel, in, out); skip_add (source layer); others none.

#include "sepl/network.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sepl {

inline constexpr std::uint32_t kWeightsVersion = 1;

std::vector<std::uint8_t> encode_weights(const Network& net);
Network decode_weights(std::span<const std::uint8_t> bytes);
void save_weights(const std::filesystem::path& path, const Network& net);
Network load_weights(const std::filesystem::path& path);

}  // namespace sepl
