#pragma once

#include <array>
#include <filesystem>

#include "holo/field.hpp"

namespace holo::io {

/// Decoded PNG as three planes with values in [0, 1].
///
/// 8-bit files keep their sRGB encoding (linear == false); 16-bit files are
/// taken as linear light, which is how this project writes them.
struct DecodedImage {
  std::array<RealGrid, 3> rgb;
  bool linear = false;
};

DecodedImage read_png(const std::filesystem::path& path);  // throws IoError

/// 16-bit grayscale PNG of values already in [0, 1] (clamped).
void write_png16(const std::filesystem::path& path, const RealGrid& unit_values);

/// Grayscale little-endian PFM ("Pf"), float32, rows stored bottom to top.
void write_pfm(const std::filesystem::path& path, const RealGrid& values);
RealGrid read_pfm(const std::filesystem::path& path);

}  // namespace holo::io
