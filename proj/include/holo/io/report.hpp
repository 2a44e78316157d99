#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "holo/field.hpp"

namespace holo::io {

/// Creates `dir` if needed and proves it writable; throws IoError otherwise.
void preflight_output_dir(const std::filesystem::path& dir);

struct MetricsRow {
  std::string id;
  std::string mode;
  int m = 1;
  double filtered_psnr_db = 0;
  double raw_psnr_db = 0;
  double final_loss = 0;
};

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

enum class Tone { Linear, Log };

struct EmittedImage {
  std::string stem;
  double scale = 0;  // grid maximum; PNG value = tone(grid / scale)
  Tone tone = Tone::Linear;
};

/// Writes <stem>.pfm (raw values) and <stem>.png (16-bit, max-normalized).
/// Log tone maps v/scale to log1p(1000 v/scale) / log1p(1000).
EmittedImage emit_grid(const std::filesystem::path& dir, const std::string& stem, const RealGrid& grid,
                       Tone tone = Tone::Linear);

nlohmann::json to_json(const EmittedImage& img);

/// Version string from `git describe` at build time.
std::string version();

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace holo::io
