#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "holo/color.hpp"
#include "holo/trainer.hpp"

namespace holo::io {

/// sRGB electro-optical transfer function on [0, 1].
double srgb_to_linear(double encoded);

/// Box-filter resampling of a square grid to side x side with exact pixel-area weights.
RealGrid area_downsample(const RealGrid& square, Eigen::Index side);

/// Largest centered square.
RealGrid center_crop(const RealGrid& img);

struct Dataset {
  std::vector<NamedImage> mono;        // channels == 1
  std::vector<NamedColorImage> color;  // channels == 3
  std::vector<std::string> warnings;   // skipped files

  std::size_t size() const { return mono.size() + color.size(); }
};

/// PNG files of `dir` in sorted filename order: linearize, Rec.709 luma when
/// channels == 1, center crop, area downsample, normalize to peak 1 (jointly
/// across channels for color). Unreadable files are skipped with a warning;
/// an empty result throws IoError.
Dataset load_dataset(const std::filesystem::path& dir, Eigen::Index side, int channels, std::size_t limit = 0);

/// Loads a single image file with the same pipeline.
Dataset load_image(const std::filesystem::path& file, Eigen::Index side, int channels);

}  // namespace holo::io
