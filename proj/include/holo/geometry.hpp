#pragma once

namespace holo {

/// Pixel pitches and wavelength of an SLM + expander display, in meters.
struct DisplayGeometry {
  double slm_pitch = 16e-6;
  double expander_pitch = 8e-6;
  int slm_pixels = 32;  // per side
  double wavelength = 660e-9;

  double area() const { return (slm_pixels * slm_pitch) * (slm_pixels * slm_pitch); }

  // Throws ValidationError on any violated invariant.
  void validate() const;

  /// Integer ratio slm_pitch / expander_pitch.
  int upsampling_factor() const;

  int expander_pixels() const { return slm_pixels * upsampling_factor(); }
};

/// arcsin(lambda / (2 pitch)). Throws DomainError when lambda >= 2 pitch.
double diffraction_angle(double wavelength, double pitch);

/// 4 A sin^2(theta) for the given pitch, with sin(theta) = lambda / (2 pitch).
double etendue(const DisplayGeometry& geom, double pitch);

/// etendue at the expander pitch over etendue at the SLM pitch.
double expansion_ratio(const DisplayGeometry& geom);

}  // namespace holo
