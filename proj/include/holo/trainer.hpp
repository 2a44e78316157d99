#pragma once

// Joint expander/SLM optimization and test-time hologram synthesis.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holo/adam.hpp"
#include "holo/geometry.hpp"
#include "holo/gradients.hpp"
#include "holo/modulation.hpp"

namespace holo {

enum class SlmInit { Zero, Random };

struct TrainConfig {
  int outer_epochs = 200;
  int inner_slm_steps = 8;  // SLM-only ADAM steps per image visit
  double lr_slm = 1e-1;
  double lr_expander = 1e-2;  // 0 freezes the expander
  int solve_steps = 200;      // test-time SLM iterations
  std::uint64_t seed = 0;
  std::optional<double> cutoff;  // cycles per aperture; default N / sqrt(pi)
  double tolerance = 0;          // relative epoch-loss change that ends training; 0 disables
  Exposure exposure = Exposure::Matched;
  // Starting SLM frame. Zero phase is always scored as a candidate iterate,
  // so a random start only helps expanders for which zero phase is stationary.
  SlmInit slm_init = SlmInit::Zero;
  int checkpoint_every = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;  // throws ValidationError
  AdamHyper slm_hyper() const { return {lr_slm, beta1, beta2, epsilon}; }
  AdamHyper expander_hyper() const { return {lr_expander, beta1, beta2, epsilon}; }
};

struct NamedImage {
  std::string id;
  IntensityImage pixels;
};

/// Retinal filter on the expander grid for this geometry and config.
RetinalFilter retinal_filter_for(const DisplayGeometry& geom, const TrainConfig& cfg);

/// Per-target SLM frames with their optimizer state.
struct SlmBank {
  std::vector<SlmParams> frames;
  std::vector<AdamState> states;

  static SlmBank initial(std::size_t count, Eigen::Index side, const TrainConfig& cfg);
};

struct EpochMetrics {
  int epoch = 0;
  double mean_loss = 0;
  double mean_filtered_psnr = 0;
};

struct TrainResult {
  ExpanderParams expander;
  SlmBank bank;
  std::vector<EpochMetrics> history;
};

using EpochCallback = std::function<void(const EpochMetrics&, const ExpanderParams&)>;

/// Nested schedule: per image visit, inner SLM steps on that image with the
/// expander frozen, then one expander step at the refreshed SLM frame.
TrainResult train_expander(std::span<const IntensityImage> dataset, const TrainConfig& cfg,
                           const DisplayGeometry& geom, ExpanderParams initial,
                           const EpochCallback& on_epoch = {});

TrainResult train_expander(std::span<const IntensityImage> dataset, const TrainConfig& cfg,
                           const DisplayGeometry& geom, Mode mode, const EpochCallback& on_epoch = {});

struct SolveResult {
  SlmParams slm;  // best iterate
  double best_loss = 0;
  double initial_loss = 0;
  double final_loss = 0;  // last iterate
  IntensityImage image;   // rendered at the best iterate
  double filtered_psnr = 0;
  double raw_psnr = 0;
};

SlmParams initial_slm(Eigen::Index side, SlmInit init, std::uint64_t seed);

/// ADAM on SLM phases against a frozen expander field; returns the best iterate.
SolveResult solve_slm(const ComplexField& expander, const IntensityImage& target, const TrainConfig& cfg,
                      const DisplayGeometry& geom);

SolveResult solve_slm(const ComplexField& expander, const IntensityImage& target, const TrainConfig& cfg,
                      const DisplayGeometry& geom, const RetinalFilter& filter);

struct EvalRow {
  std::string id;
  double filtered_psnr = 0;
  double raw_psnr = 0;
  double final_loss = 0;
};

struct EvalTable {
  std::vector<EvalRow> rows;
  double mean_filtered_psnr = 0;
  double min_filtered_psnr = 0;
  double mean_raw_psnr = 0;
};

EvalTable evaluate(const ComplexField& expander, std::span<const NamedImage> test_set, const TrainConfig& cfg,
                   const DisplayGeometry& geom, std::vector<SolveResult>* solves = nullptr);

void summarize(EvalTable& table);

}  // namespace holo
