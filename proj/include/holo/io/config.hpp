#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "holo/color.hpp"
#include "holo/geometry.hpp"
#include "holo/trainer.hpp"

namespace holo::io {

struct DataConfig {
  std::filesystem::path train_dir;
  std::filesystem::path test_dir;
  int channels = 1;
  std::size_t max_train = 0;  // 0 keeps every file
  std::size_t max_test = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  Mode mode = Mode::Complex;
  DisplayGeometry geometry;
  TrainConfig train;
  DataConfig data;
  std::filesystem::path output_dir = "out";
  ColorConfig color;
  int finetune_epochs = 0;  // trichromatic epochs after red-only pretraining

  /// Cross-field checks (geometry ratio, mode/channel compatibility).
  void validate() const;  // throws ValidationError
};

/// Parses TOML text. Relative paths resolve against `base_dir`.
/// Unknown keys and ill-typed values raise ValidationError naming the key.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Reads a .toml config, or the config echo embedded in a run manifest (.json).
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical TOML echo; parse_config(to_toml(c)) reproduces c.
std::string to_toml(const ExperimentConfig& cfg);

/// FNV-1a digest of the canonical echo.
std::uint64_t config_digest(const ExperimentConfig& cfg);

}  // namespace holo::io
