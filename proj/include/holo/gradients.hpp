#pragma once

// Reverse-mode gradients of the retinal-filtered reconstruction loss.
//
// Chain for one target T:
//   x = E .* U(exp(i phi)),  P = |fft2(x)|^2,  I = beta P,  L = ||filter(I - T)||^2
// with beta = sum(T) / sum(P) under matched exposure and beta = 1 otherwise.

#include <cstdint>
#include <functional>
#include <string_view>

#include "holo/field.hpp"
#include "holo/modulation.hpp"
#include "holo/perception.hpp"

namespace holo {

/// How source power is set for a frame.
///
/// None renders |fft2(x)|^2 as is. Matched scales the source so that the
/// displayed image carries the same total power as the target; since the SLM
/// is phase-only this scale depends on the expander alone.
enum class Exposure { None, Matched };

std::string_view to_string(Exposure exposure);
Exposure parse_exposure(std::string_view name);

/// Displayed intensity for expander field E and SLM frame S.
IntensityImage render(const ComplexField& expander, const SlmParams& slm, const IntensityImage& target,
                      int m, Exposure exposure);

/// Loss value only, via the perception module.
double reconstruction_loss(const ComplexField& expander, const SlmParams& slm, const IntensityImage& target,
                           const RetinalFilter& filter, int m, Exposure exposure);

/// Gradients with respect to the realized expander field and the SLM phases.
struct FieldGradients {
  double loss = 0;
  ComplexField d_field;  // dL = Re sum conj(d_field) dE
  RealGrid d_slm;
  IntensityImage image;
};

FieldGradients field_loss_and_grads(const ComplexField& expander, const SlmParams& slm,
                                    const IntensityImage& target, const RetinalFilter& filter, int m,
                                    Exposure exposure);

struct GradPair {
  RealGrid d_expander_a;
  RealGrid d_expander_b;  // complex mode only
  RealGrid d_slm;
  double loss = 0;
};

/// Maps a field-space gradient onto the real expander parameters.
void expander_param_gradient(const ExpanderParams& params, const ComplexField& expander,
                             const ComplexField& d_field, RealGrid& d_a, RealGrid& d_b);

GradPair loss_and_grads(const ExpanderParams& expander, const SlmParams& slm, const IntensityImage& target,
                        const RetinalFilter& filter, int m, Exposure exposure = Exposure::Matched);

struct GradientInstance {
  ExpanderParams expander;
  SlmParams slm;
  IntensityImage target;
  RetinalFilter filter;
  int m = 1;
  Exposure exposure = Exposure::Matched;
};

using GradientFn = std::function<GradPair(const GradientInstance&)>;

struct FiniteDiffOptions {
  double step = 1e-5;
  double abs_tol = 1e-9;   // |analytic - numeric| below this counts as exact
  std::size_t max_coords = 0;  // 0 checks every coordinate, else a seeded subsample
  std::uint64_t seed = 0;
};

/// Max relative deviation between analytic and central-difference gradients.
///
/// Deviations are measured relative to max(|analytic|, |numeric|), floored at
/// 1e-3 of the largest numeric component so that near-zero coordinates are
/// judged on the gradient's own scale.
double finite_diff_check(const GradientInstance& instance, const FiniteDiffOptions& options = {},
                         const GradientFn& analytic = {});

}  // namespace holo
