#include "holo/geometry.hpp"

#include <cmath>
#include <string>

#include "holo/errors.hpp"
#include "holo/field.hpp"

namespace holo {

namespace {

double sin_angle(double wavelength, double pitch) {
  if (!(wavelength > 0) || !(pitch > 0)) {
    throw DomainError("diffraction angle: wavelength and pitch must be positive");
  }
  const double s = wavelength / (2.0 * pitch);
  if (s >= 1.0) {
    throw DomainError("diffraction angle undefined: wavelength " + std::to_string(wavelength) +
                      " >= 2 x pitch " + std::to_string(pitch));
  }
  return s;
}

}  // namespace

void DisplayGeometry::validate() const {
  if (!(slm_pitch > 0)) throw ValidationError("geometry.slm_pitch_um", "SLM pitch must be positive");
  if (!(expander_pitch > 0)) {
    throw ValidationError("geometry.expander_pitch_um", "expander pitch must be positive");
  }
  if (!(wavelength > 0)) throw ValidationError("geometry.wavelength_nm", "wavelength must be positive");
  if (slm_pixels < 1 || !is_power_of_two(slm_pixels)) {
    throw ValidationError("geometry.slm_pixels", "SLM pixel count must be a power of two, got " +
                                                     std::to_string(slm_pixels));
  }
  if (expander_pitch > slm_pitch) {
    throw ValidationError("geometry.expander_pitch_um", "expander pitch must not exceed SLM pitch");
  }
  upsampling_factor();
  if (wavelength >= 2.0 * expander_pitch) {
    throw ValidationError("geometry.wavelength_nm",
                          "wavelength must be below twice the expander pitch");
  }
}

int DisplayGeometry::upsampling_factor() const {
  const double ratio = slm_pitch / expander_pitch;
  const double rounded = std::round(ratio);
  if (rounded < 1 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw ValidationError("geometry.expander_pitch_um",
                          "SLM pitch must be an integer multiple of the expander pitch (ratio " +
                              std::to_string(ratio) + ")");
  }
  const int m = static_cast<int>(rounded);
  if (!is_power_of_two(m)) {
    throw ValidationError("geometry.expander_pitch_um",
                          "upsampling factor must be a power of two, got " + std::to_string(m));
  }
  return m;
}

double diffraction_angle(double wavelength, double pitch) {
  return std::asin(sin_angle(wavelength, pitch));
}

double etendue(const DisplayGeometry& geom, double pitch) {
  const double s = sin_angle(geom.wavelength, pitch);
  return 4.0 * geom.area() * s * s;
}

double expansion_ratio(const DisplayGeometry& geom) {
  // Both etendues share 4 A (lambda/2)^2, which cancels; the squared pitch
  // ratio avoids rounding in the two products.
  sin_angle(geom.wavelength, geom.expander_pitch);
  const double r = geom.slm_pitch / geom.expander_pitch;
  return r * r;
}

}  // namespace holo
