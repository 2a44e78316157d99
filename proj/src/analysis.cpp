#include "holo/analysis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "holo/errors.hpp"
#include "holo/random.hpp"

namespace holo {

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::RandomAmplitude:
      return "random_amplitude";
    case BaselineKind::RandomPhase:
      return "random_phase";
    case BaselineKind::RandomComplex:
      return "random_complex";
    case BaselineKind::AllOnes:
      return "all_ones";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "random_amplitude") return BaselineKind::RandomAmplitude;
  if (name == "random_phase") return BaselineKind::RandomPhase;
  if (name == "random_complex") return BaselineKind::RandomComplex;
  if (name == "all_ones" || name == "conventional") return BaselineKind::AllOnes;
  throw ParameterError("unknown baseline kind '" + std::string(name) + "'");
}

ComplexField make_baseline(const BaselineSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw DimensionError("baseline dimensions must be positive");
  ComplexField out(spec.rows, spec.cols);
  Rng rng(spec.seed);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    switch (spec.kind) {
      case BaselineKind::RandomAmplitude:
        out.data()[i] = uniform01(rng);
        break;
      case BaselineKind::RandomPhase:
        out.data()[i] = std::polar(1.0, 2.0 * std::numbers::pi * uniform01(rng));
        break;
      case BaselineKind::RandomComplex: {
        const double amplitude = uniform01(rng);
        out.data()[i] = std::polar(amplitude, 2.0 * std::numbers::pi * uniform01(rng));
        break;
      }
      case BaselineKind::AllOnes:
        out.data()[i] = 1.0;
        break;
    }
  }
  return out;
}

VirtualModulation virtual_frequency_modulation(const ComplexField& expander) {
  VirtualModulation v;
  const RealGrid zero_phase_image = fft2<double>(expander).abs2();
  v.spectrum = fft2<double>(zero_phase_image);
  v.magnitude = v.spectrum.abs();
  return v;
}

std::string BoundReport::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "lhs=" << lhs << " rhs_spatial=" << rhs_spatial << " rhs_parseval=" << rhs_parseval
     << " forms_agree=" << forms_agree << " bounded=" << bounded;
  return os.str();
}

BoundReport zero_phase_bound_check(const ComplexField& expander, const IntensityImage& target,
                                   const RetinalFilter& filter, const TrainConfig& cfg, const DisplayGeometry& geom) {
  require_same_shape(expander, target, "zero_phase_bound_check");
  require_same_shape(target, filter.response, "zero_phase_bound_check filter");
  const int m = geom.upsampling_factor();

  BoundReport report;
  const SlmParams zero = SlmParams::zero_phase(geom.slm_pixels);
  report.rhs_spatial = reconstruction_loss(expander, zero, target, filter, m, cfg.exposure);

  const VirtualModulation v = virtual_frequency_modulation(expander);
  double beta = 1.0;
  if (cfg.exposure == Exposure::Matched) {
    // DC of the virtual modulation is the total zero-phase image power.
    beta = target.sum() / v.spectrum(0, 0).real();
  }
  const ComplexField diff = beta * v.spectrum - fft2<double>(target);
  report.rhs_parseval = (diff * filter.response).abs2().sum() / static_cast<double>(target.size());

  report.lhs = solve_slm(expander, target, cfg, geom, filter).best_loss;

  const double scale = std::max(std::abs(report.rhs_spatial), std::abs(report.rhs_parseval));
  // The absolute floor only matters when both forms vanish up to rounding.
  const double floor = 1e-20 * target.abs2().sum();
  report.forms_agree = std::abs(report.rhs_spatial - report.rhs_parseval) <= 1e-9 * scale + floor;
  report.bounded = report.lhs <= report.rhs_spatial * (1.0 + 1e-12);
  return report;
}

}  // namespace holo
