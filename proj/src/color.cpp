#include "holo/color.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "holo/errors.hpp"

namespace holo {

DispersionTable DispersionTable::fused_silica_like() {
  DispersionTable d;
  d.index = {{450e-9, 1.466}, {517e-9, 1.461}, {660e-9, 1.456}};
  d.reference = 660e-9;
  return d;
}

double DispersionTable::at(double wavelength) const {
  for (const auto& [lambda, n] : index) {
    if (std::abs(lambda - wavelength) <= 1e-9 * wavelength) return n;
  }
  throw ParameterError("no refractive index for wavelength " + std::to_string(wavelength * 1e9) + " nm");
}

void DispersionTable::validate() const {
  for (const auto& [lambda, n] : index) {
    if (!(lambda > 0)) throw ValidationError("color.dispersion", "wavelengths must be positive");
    if (!(n > 1)) throw ValidationError("color.dispersion", "refractive indices must exceed 1");
  }
  try {
    at(reference);
  } catch (const ParameterError&) {
    throw ValidationError("color.reference_nm", "reference wavelength missing from dispersion table");
  }
}

double phase_scale(double wavelength, const DispersionTable& disp) {
  const double n = disp.at(wavelength);
  const double n_ref = disp.at(disp.reference);
  return (disp.reference / wavelength) * ((n - 1.0) / (n_ref - 1.0));
}

RealGrid phase_to_wavelength(const RealGrid& phase_ref, double wavelength, const DispersionTable& disp) {
  return phase_ref * phase_scale(wavelength, disp);
}

void ColorConfig::validate() const {
  dispersion.validate();
  for (double lambda : wavelengths) {
    try {
      dispersion.at(lambda);
    } catch (const ParameterError& e) {
      throw ValidationError("color.wavelengths_nm", e.what());
    }
  }
}

std::array<ComplexField, 3> channel_expanders(const ExpanderParams& expander, const ColorConfig& color) {
  if (expander.mode != Mode::Phase) {
    throw ParameterError("trichromatic conversion requires a phase-mode expander, got " +
                         std::string(to_string(expander.mode)));
  }
  std::array<ComplexField, 3> out;
  for (int c = 0; c < 3; ++c) {
    ExpanderParams converted{Mode::Phase, phase_to_wavelength(expander.grid_a, color.wavelengths[c], color.dispersion), {}};
    out[c] = realize(converted);
  }
  return out;
}

namespace {

ColorGradients accumulate(const std::array<ComplexField, 3>& fields, const std::array<double, 3>& scale,
                          const std::array<const SlmParams*, 3>& frames, const ColorTargets& targets,
                          const RetinalFilter& filter, int m, Exposure exposure) {
  ColorGradients out;
  out.d_phase = RealGrid::Zero(fields[0].rows(), fields[0].cols());
  for (int c = 0; c < 3; ++c) {
    const FieldGradients g = field_loss_and_grads(fields[c], *frames[c], targets.channels[c], filter, m, exposure);
    // Chain through phi_c = scale_c * phi_ref.
    out.d_phase += scale[c] * (g.d_field * fields[c].conjugate()).imag();
    out.channel_loss[c] = g.loss;
    out.loss += g.loss;
    out.d_slm[c] = g.d_slm;
  }
  return out;
}

std::array<double, 3> channel_scales(const ColorConfig& color) {
  std::array<double, 3> scale{};
  for (int c = 0; c < 3; ++c) scale[c] = phase_scale(color.wavelengths[c], color.dispersion);
  return scale;
}

}  // namespace

ColorGradients color_loss_and_grads(const ExpanderParams& expander, const std::array<SlmParams, 3>& frames,
                                    const ColorTargets& targets, const RetinalFilter& filter, int m,
                                    const ColorConfig& color, Exposure exposure) {
  return accumulate(channel_expanders(expander, color), channel_scales(color), {&frames[0], &frames[1], &frames[2]},
                    targets, filter, m, exposure);
}

ColorTrainResult train_trichromatic(ExpanderParams initial, std::span<const ColorTargets> dataset,
                                    const TrainConfig& cfg, const DisplayGeometry& geom, const ColorConfig& color,
                                    const EpochCallback& on_epoch) {
  cfg.validate();
  geom.validate();
  color.validate();
  if (initial.mode != Mode::Phase) {
    throw ParameterError("trichromatic fine-tuning requires a phase-mode expander, got " +
                         std::string(to_string(initial.mode)));
  }
  initial.validate();
  if (dataset.empty()) throw ParameterError("train_trichromatic: empty dataset");
  const int m = geom.upsampling_factor();
  const Eigen::Index side = geom.expander_pixels();
  for (const ColorTargets& t : dataset) {
    for (const IntensityImage& ch : t.channels) {
      if (ch.rows() != side || ch.cols() != side) throw DimensionError("color target does not match expander grid");
    }
  }
  if (initial.rows() != side || initial.cols() != side) {
    throw DimensionError("initial expander does not match the expander grid");
  }

  // Shared cutoff: the retinal limit is set by SLM pixel count, not wavelength.
  const RetinalFilter filter = retinal_filter_for(geom, cfg);
  const std::array<double, 3> scale = channel_scales(color);

  ColorTrainResult result;
  result.expander = std::move(initial);
  for (auto& bank : result.banks) bank = SlmBank::initial(dataset.size(), geom.slm_pixels, cfg);
  AdamState state(cfg.expander_hyper(), side, side);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  std::array<ComplexField, 3> fields = channel_expanders(result.expander, color);
  const double pixels = static_cast<double>(side * side);

  for (int epoch = 0; epoch < cfg.outer_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0, psnr_sum = 0;
    std::array<double, 3> channel_sum{};
    for (const std::size_t k : order) {
      try {
        for (int c = 0; c < 3; ++c) {
          SlmParams& frame = result.banks[c].frames[k];
          for (int j = 0; j < cfg.inner_slm_steps; ++j) {
            const FieldGradients g =
                field_loss_and_grads(fields[c], frame, dataset[k].channels[c], filter, m, cfg.exposure);
            adam_step(result.banks[c].states[k], frame.phase, g.d_slm);
          }
        }
        const ColorGradients g = accumulate(fields, scale,
                                            {&result.banks[0].frames[k], &result.banks[1].frames[k],
                                             &result.banks[2].frames[k]},
                                            dataset[k], filter, m, cfg.exposure);
        for (int c = 0; c < 3; ++c) channel_sum[c] += g.channel_loss[c];
        const double image_loss = g.loss;
        adam_step(state, result.expander.grid_a, g.d_phase);
        fields = channel_expanders(result.expander, color);
        loss_sum += image_loss;
        psnr_sum += psnr_from_mse(image_loss / (3.0 * pixels));
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", image " + std::to_string(k) + ": " + e.what());
      }
    }
    const double count = static_cast<double>(dataset.size());
    EpochMetrics metrics{epoch, loss_sum / count, psnr_sum / count};
    result.history.push_back(metrics);
    result.channel_history.push_back({channel_sum[0] / count, channel_sum[1] / count, channel_sum[2] / count});
    if (on_epoch) on_epoch(metrics, result.expander);
  }
  return result;
}

ColorEvalTable evaluate_color(const std::array<ComplexField, 3>& fields, std::span<const NamedColorImage> test_set,
                              const TrainConfig& cfg, const DisplayGeometry& geom) {
  ColorEvalTable table;
  std::vector<double> pooled(test_set.size(), 0.0);
  for (int c = 0; c < 3; ++c) {
    std::vector<NamedImage> channel;
    for (const NamedColorImage& img : test_set) channel.push_back({img.id, img.targets.channels[c]});
    table.channels[c] = evaluate(fields[c], channel, cfg, geom);
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      pooled[i] += std::pow(10.0, -table.channels[c].rows[i].filtered_psnr / 10.0);
    }
  }
  double sum = 0;
  for (double mse_sum : pooled) {
    table.combined_psnr.push_back(psnr_from_mse(mse_sum / 3.0));
    sum += table.combined_psnr.back();
  }
  table.mean_combined_psnr = test_set.empty() ? 0.0 : sum / static_cast<double>(test_set.size());
  table.min_channel_mean_psnr = std::min({table.channels[0].mean_filtered_psnr, table.channels[1].mean_filtered_psnr,
                                          table.channels[2].mean_filtered_psnr});
  return table;
}

ColorEvalTable evaluate_color(const ExpanderParams& expander, std::span<const NamedColorImage> test_set,
                              const TrainConfig& cfg, const DisplayGeometry& geom, const ColorConfig& color) {
  color.validate();
  return evaluate_color(channel_expanders(expander, color), test_set, cfg, geom);
}

}  // namespace holo
