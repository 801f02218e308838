#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace slambench::ingest {

// Decoded raster. 16-bit samples are stored little-endian, two bytes per sample.
struct Raster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;        // 1 or 3
  std::uint32_t bytes_per_sample = 0;  // 1 or 2
  std::vector<std::uint8_t> data;
};

// Reads binary PGM/PPM (P5/P6, 8 or 16 bit) and PNG. Throws MissingRaster when the file is
// absent or cannot be decoded.
Raster read_raster(const std::filesystem::path& path);

// Writes a binary PGM/PPM; used by fixtures.
void write_pnm(const std::filesystem::path& path, const Raster& raster);

// Conversions into the datafile pixel formats.
std::vector<std::uint8_t> to_rgb8(const Raster& r);
std::vector<std::uint8_t> to_grey8(const Raster& r);
std::vector<std::uint8_t> to_depth16(const Raster& r);

}  // namespace slambench::ingest
