#pragma once

// Trainable parameterizations of the expander and the phase-only SLM.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "holo/field.hpp"

namespace holo {

enum class Mode { Amplitude, Phase, Complex };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);  // throws ParameterError

/// Real parameter grids behind the expander modulation.
///
/// amplitude: E = sigmoid(a), phase: E = exp(i a), complex: E = a + i b.
struct ExpanderParams {
  Mode mode = Mode::Phase;
  RealGrid grid_a;
  RealGrid grid_b;  // complex mode only, empty otherwise

  Eigen::Index rows() const { return grid_a.rows(); }
  Eigen::Index cols() const { return grid_a.cols(); }

  /// Seeded initialization: uniform random phases (phase, complex) or uniform
  /// random transmissions (amplitude).
  static ExpanderParams initial(Mode mode, Eigen::Index side, std::uint64_t seed);

  /// Consistency of grid shapes with the mode.
  void validate() const;
};

/// Phase angles of one SLM frame. Realized modulation is exp(i phase).
struct SlmParams {
  RealGrid phase;

  static SlmParams zero_phase(Eigen::Index side) { return {RealGrid::Zero(side, side)}; }
};

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

ComplexField realize(const ExpanderParams& params);

inline ComplexField realize(const SlmParams& params) {
  return params.phase.unaryExpr([](double p) { return std::polar(1.0, p); });
}

}  // namespace holo
