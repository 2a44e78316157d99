#pragma once

// Trichromatic operation of a phase expander through its surface-relief height map.

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "holo/trainer.hpp"

namespace holo {

/// Refractive index of the expander material per wavelength (meters).
struct DispersionTable {
  std::map<double, double> index;
  double reference = 660e-9;

  /// n(660) = 1.456, n(517) = 1.461, n(450) = 1.466.
  static DispersionTable fused_silica_like();

  double at(double wavelength) const;  // throws ParameterError when absent
  void validate() const;                // throws ValidationError
};

/// Scale taking reference-wavelength phase to phase at `wavelength` for the same height map.
double phase_scale(double wavelength, const DispersionTable& disp);

/// phi * (lambda_ref / lambda) * (n(lambda) - 1) / (n(lambda_ref) - 1), without wrapping.
RealGrid phase_to_wavelength(const RealGrid& phase_ref, double wavelength, const DispersionTable& disp);

struct ColorConfig {
  std::array<double, 3> wavelengths{660e-9, 517e-9, 450e-9};
  DispersionTable dispersion = DispersionTable::fused_silica_like();

  void validate() const;
};

/// Co-registered channels in the order of ColorConfig::wavelengths.
struct ColorTargets {
  std::array<IntensityImage, 3> channels;
};

struct NamedColorImage {
  std::string id;
  ColorTargets targets;
};

/// Realized expander field seen by each color channel.
std::array<ComplexField, 3> channel_expanders(const ExpanderParams& expander, const ColorConfig& color);

struct ColorGradients {
  double loss = 0;                     // sum of the channel losses
  std::array<double, 3> channel_loss{};
  RealGrid d_phase;                    // gradient on the reference phase grid
  std::array<RealGrid, 3> d_slm;
};

/// Summed channel loss and its gradients for fixed per-channel SLM frames.
ColorGradients color_loss_and_grads(const ExpanderParams& expander, const std::array<SlmParams, 3>& frames,
                                    const ColorTargets& targets, const RetinalFilter& filter, int m,
                                    const ColorConfig& color, Exposure exposure = Exposure::Matched);

struct ColorTrainResult {
  ExpanderParams expander;
  std::array<SlmBank, 3> banks;  // one time-multiplexed frame per channel and image
  std::vector<EpochMetrics> history;
  std::vector<std::array<double, 3>> channel_history;  // mean loss per channel per epoch
};

/// Fine-tunes a phase expander for all channels; the loss sums the per-channel terms.
ColorTrainResult train_trichromatic(ExpanderParams initial, std::span<const ColorTargets> dataset,
                                    const TrainConfig& cfg, const DisplayGeometry& geom, const ColorConfig& color,
                                    const EpochCallback& on_epoch = {});

struct ColorEvalTable {
  std::array<EvalTable, 3> channels;
  std::vector<double> combined_psnr;  // per image, filtered MSE pooled over channels
  double mean_combined_psnr = 0;
  double min_channel_mean_psnr = 0;
};

ColorEvalTable evaluate_color(const ExpanderParams& expander, std::span<const NamedColorImage> test_set,
                              const TrainConfig& cfg, const DisplayGeometry& geom, const ColorConfig& color);

/// Same channel fields as above but for an arbitrary fixed expander (no conversion).
ColorEvalTable evaluate_color(const std::array<ComplexField, 3>& fields, std::span<const NamedColorImage> test_set,
                              const TrainConfig& cfg, const DisplayGeometry& geom);

}  // namespace holo
