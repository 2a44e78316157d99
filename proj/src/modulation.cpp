#include "holo/modulation.hpp"

#include <numbers>

#include "holo/errors.hpp"
#include "holo/random.hpp"

namespace holo {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Amplitude:
      return "amplitude";
    case Mode::Phase:
      return "phase";
    case Mode::Complex:
      return "complex";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "amplitude") return Mode::Amplitude;
  if (name == "phase") return Mode::Phase;
  if (name == "complex") return Mode::Complex;
  throw ParameterError("unknown modulation mode '" + std::string(name) + "'");
}

ExpanderParams ExpanderParams::initial(Mode mode, Eigen::Index side, std::uint64_t seed) {
  ExpanderParams p;
  p.mode = mode;
  Rng rng(seed);
  if (mode == Mode::Amplitude) {
    // logit of uniform (0,1) transmissions; a constant start is a saddle of the loss.
    p.grid_a.resize(side, side);
    for (Eigen::Index i = 0; i < p.grid_a.size(); ++i) {
      const double u = (uniform01(rng) + 0x1.0p-54) * (1.0 - 0x1.0p-53);
      p.grid_a.data()[i] = std::log(u / (1.0 - u));
    }
    return p;
  }
  RealGrid angles(side, side);
  for (Eigen::Index i = 0; i < angles.size(); ++i) angles.data()[i] = 2.0 * std::numbers::pi * uniform01(rng);
  if (mode == Mode::Phase) {
    p.grid_a = std::move(angles);
  } else {
    p.grid_a = angles.cos();
    p.grid_b = angles.sin();
  }
  return p;
}

void ExpanderParams::validate() const {
  if (grid_a.size() == 0) throw DimensionError("expander parameters are empty");
  if (mode == Mode::Complex) {
    require_same_shape(grid_a, grid_b, "complex expander parameters");
  } else if (grid_b.size() != 0) {
    throw DimensionError("only complex-mode expanders carry a second grid");
  }
}

ComplexField realize(const ExpanderParams& params) {
  params.validate();
  switch (params.mode) {
    case Mode::Amplitude:
      return params.grid_a.unaryExpr([](double a) { return std::complex<double>(sigmoid(a), 0.0); });
    case Mode::Phase:
      return params.grid_a.unaryExpr([](double a) { return std::polar(1.0, a); });
    case Mode::Complex: {
      ComplexField out(params.rows(), params.cols());
      out.real() = params.grid_a;
      out.imag() = params.grid_b;
      return out;
    }
  }
  throw ParameterError("invalid modulation mode");
}

}  // namespace holo
