#include "holo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "holo/errors.hpp"
#include "holo/random.hpp"

namespace holo {

void TrainConfig::validate() const {
  if (outer_epochs < 1) throw ValidationError("train.outer_epochs", "outer_epochs must be >= 1");
  if (inner_slm_steps < 1) throw ValidationError("train.inner_slm_steps", "inner_slm_steps must be >= 1");
  if (solve_steps < 1) throw ValidationError("train.solve_steps", "solve_steps must be >= 1");
  if (!(lr_slm > 0)) throw ValidationError("train.lr_slm", "lr_slm must be positive");
  if (!(lr_expander >= 0)) throw ValidationError("train.lr_expander", "lr_expander must be non-negative");
  if (cutoff && !(*cutoff > 0)) throw ValidationError("train.cutoff", "cutoff must be positive");
  if (!(tolerance >= 0)) throw ValidationError("train.tolerance", "tolerance must be non-negative");
  if (checkpoint_every < 0) throw ValidationError("train.checkpoint_every", "checkpoint_every must be >= 0");
  if (!(beta1 >= 0 && beta1 < 1)) throw ValidationError("train.beta1", "beta1 must lie in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) throw ValidationError("train.beta2", "beta2 must lie in [0, 1)");
  if (!(epsilon > 0)) throw ValidationError("train.epsilon", "epsilon must be positive");
}

RetinalFilter retinal_filter_for(const DisplayGeometry& geom, const TrainConfig& cfg) {
  const Eigen::Index side = geom.expander_pixels();
  return build_retinal_filter<double>(side, side, cfg.cutoff.value_or(default_cutoff(geom.slm_pixels)));
}

SlmParams initial_slm(Eigen::Index side, SlmInit init, std::uint64_t seed) {
  SlmParams s = SlmParams::zero_phase(side);
  if (init == SlmInit::Random) {
    Rng rng(seed);
    for (Eigen::Index i = 0; i < s.phase.size(); ++i) s.phase.data()[i] = 2.0 * std::numbers::pi * uniform01(rng);
  }
  return s;
}

SlmBank SlmBank::initial(std::size_t count, Eigen::Index side, const TrainConfig& cfg) {
  SlmBank bank;
  for (std::size_t k = 0; k < count; ++k) {
    bank.frames.push_back(initial_slm(side, cfg.slm_init, cfg.seed + 1 + k));
    bank.states.emplace_back(cfg.slm_hyper(), side, side);
  }
  return bank;
}

namespace {

void check_targets(std::span<const IntensityImage> images, const DisplayGeometry& geom) {
  const Eigen::Index side = geom.expander_pixels();
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (images[k].rows() != side || images[k].cols() != side) {
      throw DimensionError("target " + std::to_string(k) + " is " + std::to_string(images[k].rows()) + "x" +
                           std::to_string(images[k].cols()) + ", expected " + std::to_string(side) + "x" +
                           std::to_string(side));
    }
  }
}

double filtered_psnr_from_loss(double loss, Eigen::Index pixels) {
  return psnr_from_mse(loss / static_cast<double>(pixels));
}

}  // namespace

TrainResult train_expander(std::span<const IntensityImage> dataset, const TrainConfig& cfg,
                           const DisplayGeometry& geom, ExpanderParams initial, const EpochCallback& on_epoch) {
  cfg.validate();
  geom.validate();
  if (dataset.empty()) throw ParameterError("train_expander: empty dataset");
  check_targets(dataset, geom);
  initial.validate();
  const int m = geom.upsampling_factor();
  const Eigen::Index side = geom.expander_pixels();
  if (initial.rows() != side || initial.cols() != side) {
    throw DimensionError("initial expander does not match the expander grid");
  }

  const RetinalFilter filter = retinal_filter_for(geom, cfg);
  TrainResult result;
  result.expander = std::move(initial);
  result.bank = SlmBank::initial(dataset.size(), geom.slm_pixels, cfg);
  AdamState state_a(cfg.expander_hyper(), side, side);
  AdamState state_b(cfg.expander_hyper(), side, side);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  ComplexField field = realize(result.expander);

  for (int epoch = 0; epoch < cfg.outer_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0, psnr_sum = 0;
    for (const std::size_t k : order) {
      try {
        SlmParams& frame = result.bank.frames[k];
        for (int j = 0; j < cfg.inner_slm_steps; ++j) {
          const FieldGradients g = field_loss_and_grads(field, frame, dataset[k], filter, m, cfg.exposure);
          adam_step(result.bank.states[k], frame.phase, g.d_slm);
        }
        const FieldGradients g = field_loss_and_grads(field, frame, dataset[k], filter, m, cfg.exposure);
        RealGrid d_a, d_b;
        expander_param_gradient(result.expander, field, g.d_field, d_a, d_b);
        adam_step(state_a, result.expander.grid_a, d_a);
        if (result.expander.mode == Mode::Complex) adam_step(state_b, result.expander.grid_b, d_b);
        field = realize(result.expander);
        if (!all_finite(field)) throw NumericError("expander update produced non-finite values");
        loss_sum += g.loss;
        psnr_sum += filtered_psnr_from_loss(g.loss, g.image.size());
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", image " + std::to_string(k) + ": " + e.what());
      }
    }
    EpochMetrics metrics{epoch, loss_sum / static_cast<double>(dataset.size()),
                         psnr_sum / static_cast<double>(dataset.size())};
    const bool converged = cfg.tolerance > 0 && !result.history.empty() &&
                           std::abs(result.history.back().mean_loss - metrics.mean_loss) <=
                               cfg.tolerance * result.history.back().mean_loss;
    result.history.push_back(metrics);
    if (on_epoch) on_epoch(metrics, result.expander);
    if (converged) break;
  }
  return result;
}

TrainResult train_expander(std::span<const IntensityImage> dataset, const TrainConfig& cfg,
                           const DisplayGeometry& geom, Mode mode, const EpochCallback& on_epoch) {
  geom.validate();
  return train_expander(dataset, cfg, geom, ExpanderParams::initial(mode, geom.expander_pixels(), cfg.seed),
                        on_epoch);
}

SolveResult solve_slm(const ComplexField& expander, const IntensityImage& target, const TrainConfig& cfg,
                      const DisplayGeometry& geom) {
  return solve_slm(expander, target, cfg, geom, retinal_filter_for(geom, cfg));
}

SolveResult solve_slm(const ComplexField& expander, const IntensityImage& target, const TrainConfig& cfg,
                      const DisplayGeometry& geom, const RetinalFilter& filter) {
  cfg.validate();
  geom.validate();
  const int m = geom.upsampling_factor();
  check_targets(std::span<const IntensityImage>(&target, 1), geom);
  require_same_shape(expander, target, "solve_slm expander");

  SolveResult out;
  out.slm = SlmParams::zero_phase(geom.slm_pixels);
  out.image = render(expander, out.slm, target, m, cfg.exposure);
  out.initial_loss = filtered_loss(out.image, target, filter);
  double best = out.initial_loss;

  SlmParams current = initial_slm(geom.slm_pixels, cfg.slm_init, cfg.seed);
  AdamState state(cfg.slm_hyper(), geom.slm_pixels, geom.slm_pixels);
  for (int it = 0; it <= cfg.solve_steps; ++it) {
    FieldGradients g = field_loss_and_grads(expander, current, target, filter, m, cfg.exposure);
    if (g.loss < best) {
      best = g.loss;
      out.slm = current;
      out.image = std::move(g.image);
    }
    out.final_loss = g.loss;
    if (it < cfg.solve_steps) adam_step(state, current.phase, g.d_slm);
  }
  out.best_loss = best;
  out.filtered_psnr = psnr<double>(out.image, target, &filter);
  out.raw_psnr = psnr<double>(out.image, target);
  return out;
}

void summarize(EvalTable& table) {
  if (table.rows.empty()) return;
  double sum_f = 0, sum_r = 0, min_f = std::numeric_limits<double>::infinity();
  for (const EvalRow& r : table.rows) {
    sum_f += r.filtered_psnr;
    sum_r += r.raw_psnr;
    min_f = std::min(min_f, r.filtered_psnr);
  }
  const double n = static_cast<double>(table.rows.size());
  table.mean_filtered_psnr = sum_f / n;
  table.mean_raw_psnr = sum_r / n;
  table.min_filtered_psnr = min_f;
}

EvalTable evaluate(const ComplexField& expander, std::span<const NamedImage> test_set, const TrainConfig& cfg,
                   const DisplayGeometry& geom, std::vector<SolveResult>* solves) {
  const RetinalFilter filter = retinal_filter_for(geom, cfg);
  EvalTable table;
  for (const NamedImage& img : test_set) {
    SolveResult s = solve_slm(expander, img.pixels, cfg, geom, filter);
    table.rows.push_back({img.id, s.filtered_psnr, s.raw_psnr, s.best_loss});
    if (solves) solves->push_back(std::move(s));
  }
  summarize(table);
  return table;
}

}  // namespace holo
