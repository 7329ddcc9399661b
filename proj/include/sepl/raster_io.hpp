#pragma once

// Raster file formats:
//  - 8-bit binary NetPBM: PGM (P5) for one channel, PPM (P6) for RGB. Values
//    map to [0,1] floats as v / 255 and are quantized back by rounding.
//  - LKM1 likelihood maps: magic "LKM1", u32 width, u32 height, then
//    width*height f32 row-major, all little-endian. Lossless.

#include "sepl/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sepl {

std::vector<std::uint8_t> encode_lkm1(const Raster& map);
Raster decode_lkm1(std::span<const std::uint8_t> bytes);
void write_lkm1(const std::filesystem::path& path, const Raster& map);
Raster read_lkm1(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const Raster& gray);
Raster read_pgm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Raster& rgb);
Raster read_ppm(const std::filesystem::path& path);

/// RGB+NIR images are stored as a PPM/PGM pair and combined into one
/// 4-channel raster (R, G, B, NIR).
void write_rgbn(const std::filesystem::path& rgb_path, const std::filesystem::path& nir_path,
                const Raster& image);
Raster read_rgbn(const std::filesystem::path& rgb_path, const std::filesystem::path& nir_path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace sepl
