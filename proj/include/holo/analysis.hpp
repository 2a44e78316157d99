#pragma once

// Baseline scatterers and diagnostics of expander spectra.

#include <cstdint>
#include <string>
#include <string_view>

#include "holo/trainer.hpp"

namespace holo {

enum class BaselineKind { RandomAmplitude, RandomPhase, RandomComplex, AllOnes };

std::string_view to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view name);

struct BaselineSpec {
  BaselineKind kind = BaselineKind::RandomPhase;
  std::uint64_t seed = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

/// Seeded random mask (uniform phase in [0, 2pi), uniform amplitude in [0, 1]) or all ones.
ComplexField make_baseline(const BaselineSpec& spec);

struct VirtualModulation {
  ComplexField spectrum;  // fft2(|fft2(E)|^2)
  RealGrid magnitude;
};

VirtualModulation virtual_frequency_modulation(const ComplexField& expander);

/// Zero-phase bound on the optimized loss and its Parseval form.
struct BoundReport {
  double lhs = 0;           // best loss found by solve_slm
  double rhs_spatial = 0;   // loss at the zero-phase SLM
  double rhs_parseval = 0;  // (1/n) ||(beta V - fft2(T)) .* response||^2
  bool forms_agree = false; // rhs forms equal to 1e-9 relative
  bool bounded = false;     // lhs <= rhs_spatial (1 + 1e-12)

  bool ok() const { return forms_agree && bounded; }
  std::string describe() const;
};

BoundReport zero_phase_bound_check(const ComplexField& expander, const IntensityImage& target,
                                   const RetinalFilter& filter, const TrainConfig& cfg, const DisplayGeometry& geom);

}  // namespace holo
