#include "holo/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "holo/errors.hpp"

namespace holo {

namespace {

void check_stage(const char* stage, const auto& grid) {
  if (!all_finite(grid)) throw NumericError(std::string("non-finite values at stage '") + stage + "'");
}

void check_target(const IntensityImage& target, const ComplexField& expander) {
  require_same_shape(target, expander, "target vs expander");
}

// beta such that sum(beta P) == sum(T).
double exposure_scale(const IntensityImage& power, const IntensityImage& target, Exposure exposure) {
  if (exposure == Exposure::None) return 1.0;
  const double total = power.sum();
  if (!(total > 0)) throw NumericError("matched exposure: expander transmits no light");
  return target.sum() / total;
}

}  // namespace

std::string_view to_string(Exposure exposure) {
  return exposure == Exposure::Matched ? "matched" : "none";
}

Exposure parse_exposure(std::string_view name) {
  if (name == "matched") return Exposure::Matched;
  if (name == "none") return Exposure::None;
  throw ParameterError("unknown exposure '" + std::string(name) + "'");
}

IntensityImage render(const ComplexField& expander, const SlmParams& slm, const IntensityImage& target,
                      int m, Exposure exposure) {
  check_target(target, expander);
  IntensityImage power = forward_model<double>(expander, realize(slm), m);
  if (exposure == Exposure::None) return power;
  const double beta = exposure_scale(power, target, exposure);
  return power * beta;
}

double reconstruction_loss(const ComplexField& expander, const SlmParams& slm, const IntensityImage& target,
                           const RetinalFilter& filter, int m, Exposure exposure) {
  return filtered_loss<double>(render(expander, slm, target, m, exposure), target, filter);
}

FieldGradients field_loss_and_grads(const ComplexField& expander, const SlmParams& slm,
                                    const IntensityImage& target, const RetinalFilter& filter, int m,
                                    Exposure exposure) {
  check_target(target, expander);
  require_same_shape(target, filter.response, "target vs retinal filter");

  const ComplexField slm_field = realize(slm);
  const ComplexField upsampled = upsample_zeroth(slm_field, m);
  const ComplexField x = modulated_field<double>(expander, slm_field, m);
  const ComplexField spectrum = fft2<double>(x);
  const IntensityImage power = spectrum.abs2();
  check_stage("forward field", power);

  const double beta = exposure_scale(power, target, exposure);
  FieldGradients out;
  out.image = exposure == Exposure::None ? power : IntensityImage(power * beta);

  const RealGrid residual = out.image - target;
  const auto filtered = detail::filter_with_spectrum(residual, filter);
  out.loss = filtered.filtered.abs2().sum();
  check_stage("filtered loss", filtered.filtered);

  // dL/dI = 2 H^2 (I - T); H is self-adjoint with response^2 as its square.
  const ComplexField shaped = filtered.spectrum * filter.response.square();
  const RealGrid d_image = 2.0 * ifft2<double>(shaped).real();

  RealGrid d_power;
  if (exposure == Exposure::None) {
    d_power = d_image;
  } else {
    const double projection = (d_image * power).sum() / power.sum();
    d_power = beta * (d_image - projection);
  }
  check_stage("intensity adjoint", d_power);

  // |y|^2 Wirtinger step, then the adjoint of the unnormalized DFT (n ifft2).
  const double n = static_cast<double>(x.size());
  const ComplexField d_x = (2.0 * n) * ifft2<double>(ComplexField(d_power * spectrum));
  check_stage("field adjoint", d_x);

  out.d_field = upsampled.conjugate() * d_x;
  const ComplexField d_upsampled = expander.conjugate() * d_x;
  const ComplexField d_slm_field = block_sum(d_upsampled, m);
  out.d_slm = (d_slm_field * slm_field.conjugate()).imag();
  check_stage("SLM gradient", out.d_slm);
  return out;
}

void expander_param_gradient(const ExpanderParams& params, const ComplexField& expander,
                             const ComplexField& d_field, RealGrid& d_a, RealGrid& d_b) {
  switch (params.mode) {
    case Mode::Amplitude: {
      const RealGrid s = expander.real();
      d_a = d_field.real() * s * (1.0 - s);
      d_b.resize(0, 0);
      break;
    }
    case Mode::Phase:
      d_a = (d_field * expander.conjugate()).imag();
      d_b.resize(0, 0);
      break;
    case Mode::Complex:
      d_a = d_field.real();
      d_b = d_field.imag();
      break;
  }
}

GradPair loss_and_grads(const ExpanderParams& expander, const SlmParams& slm, const IntensityImage& target,
                        const RetinalFilter& filter, int m, Exposure exposure) {
  const ComplexField field = realize(expander);
  FieldGradients g = field_loss_and_grads(field, slm, target, filter, m, exposure);
  GradPair out;
  out.loss = g.loss;
  out.d_slm = std::move(g.d_slm);
  expander_param_gradient(expander, field, g.d_field, out.d_expander_a, out.d_expander_b);
  check_stage("expander gradient", out.d_expander_a);
  return out;
}

double finite_diff_check(const GradientInstance& inst, const FiniteDiffOptions& options,
                         const GradientFn& analytic_fn) {
  const GradPair analytic = analytic_fn
                                ? analytic_fn(inst)
                                : loss_and_grads(inst.expander, inst.slm, inst.target, inst.filter, inst.m,
                                                 inst.exposure);

  // Coordinates: (which grid, flat index). 0 = expander a, 1 = expander b, 2 = SLM.
  std::vector<std::pair<int, Eigen::Index>> coords;
  for (Eigen::Index i = 0; i < inst.expander.grid_a.size(); ++i) coords.emplace_back(0, i);
  for (Eigen::Index i = 0; i < inst.expander.grid_b.size(); ++i) coords.emplace_back(1, i);
  for (Eigen::Index i = 0; i < inst.slm.phase.size(); ++i) coords.emplace_back(2, i);
  if (options.max_coords > 0 && coords.size() > options.max_coords) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
  }

  auto loss_at = [&](int which, Eigen::Index idx, double delta) {
    ExpanderParams e = inst.expander;
    SlmParams s = inst.slm;
    RealGrid& g = which == 0 ? e.grid_a : which == 1 ? e.grid_b : s.phase;
    g.data()[idx] += delta;
    return reconstruction_loss(realize(e), s, inst.target, inst.filter, inst.m, inst.exposure);
  };

  std::vector<double> numeric(coords.size()), exact(coords.size());
  double scale = 0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const auto [which, idx] = coords[k];
    numeric[k] = (loss_at(which, idx, options.step) - loss_at(which, idx, -options.step)) / (2 * options.step);
    const RealGrid& a = which == 0 ? analytic.d_expander_a : which == 1 ? analytic.d_expander_b : analytic.d_slm;
    exact[k] = a.data()[idx];
    scale = std::max(scale, std::abs(numeric[k]));
  }

  double worst = 0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double diff = std::abs(exact[k] - numeric[k]);
    if (diff <= options.abs_tol) continue;
    const double denom = std::max({std::abs(exact[k]), std::abs(numeric[k]), 1e-3 * scale});
    worst = std::max(worst, diff / denom);
  }
  return worst;
}

}  // namespace holo
