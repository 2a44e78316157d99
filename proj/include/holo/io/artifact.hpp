#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "holo/modulation.hpp"

namespace holo::io {

/// Persisted expander.
///
/// Layout, little-endian: "NEEXPAND" | u32 version | u32 mode | u32 rows |
/// u32 cols | f64 slm_pitch | f64 expander_pitch | f64 wavelength |
/// u64 config_digest | f64 grid_a[rows*cols] | f64 grid_b[rows*cols] (complex
/// mode only) | u32 CRC-32 of everything before it.
struct ExpanderArtifact {
  ExpanderParams params;
  double slm_pitch = 0;
  double expander_pitch = 0;
  double wavelength = 0;
  std::uint64_t config_digest = 0;
};

inline constexpr std::uint32_t kArtifactVersion = 1;

std::vector<unsigned char> encode_expander(const ExpanderArtifact& artifact);
ExpanderArtifact decode_expander(const std::vector<unsigned char>& bytes);  // throws IntegrityError

void save_expander(const std::filesystem::path& path, const ExpanderArtifact& artifact);
ExpanderArtifact load_expander(const std::filesystem::path& path);

/// 64-bit FNV-1a, used to fingerprint the training configuration.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace holo::io
