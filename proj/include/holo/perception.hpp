#pragma once

// Retinal low-pass filtering and perceptual error metrics.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "holo/field.hpp"

namespace holo {

/// Butterworth-shaped transfer function sampled on the DFT grid, origin at (0,0).
template <typename Scalar>
struct RetinalFilterT {
  Grid<Scalar> response;
  Scalar cutoff{};

  Eigen::Index rows() const { return response.rows(); }
  Eigen::Index cols() const { return response.cols(); }
};

using RetinalFilter = RetinalFilterT<double>;

/// Signed DFT frequency of bin k on an n-point axis.
inline double wrapped_frequency(Eigen::Index k, Eigen::Index n) {
  return static_cast<double>(k <= n / 2 ? k : k - n);
}

/// response(k) = 1 / (1 + (|k|^2 / c^2)^5), |k| in cycles per aperture.
template <typename Scalar = double>
RetinalFilterT<Scalar> build_retinal_filter(Eigen::Index height, Eigen::Index width, Scalar cutoff) {
  if (!(cutoff > 0)) throw ParameterError("retinal filter cutoff must be positive");
  if (!is_power_of_two(height) || !is_power_of_two(width)) {
    throw DimensionError("retinal filter: dimensions must be powers of two");
  }
  RetinalFilterT<Scalar> f;
  f.cutoff = cutoff;
  f.response.resize(height, width);
  const Scalar c2 = cutoff * cutoff;
  for (Eigen::Index r = 0; r < height; ++r) {
    const Scalar fy = static_cast<Scalar>(wrapped_frequency(r, height));
    for (Eigen::Index c = 0; c < width; ++c) {
      const Scalar fx = static_cast<Scalar>(wrapped_frequency(c, width));
      const Scalar q = (fy * fy + fx * fx) / c2;
      const Scalar q2 = q * q;
      f.response(r, c) = Scalar(1) / (Scalar(1) + q2 * q2 * q);
    }
  }
  return f;
}

/// N / sqrt(pi): the radius whose disc area equals the SLM's N^2 frequency cells.
inline double default_cutoff(int slm_pixels) {
  if (slm_pixels < 1) throw ParameterError("default_cutoff: pixel count must be >= 1");
  return static_cast<double>(slm_pixels) / std::sqrt(std::numbers::pi);
}

namespace detail {

template <typename Scalar>
struct FilteredResidual {
  Field<Scalar> spectrum;  // fft2 of the unfiltered input
  Grid<Scalar> filtered;   // real part of ifft2(response .* spectrum)
};

template <typename Scalar>
FilteredResidual<Scalar> filter_with_spectrum(const Grid<Scalar>& x, const RetinalFilterT<Scalar>& f) {
  require_same_shape(x, f.response, "apply_filter");
  FilteredResidual<Scalar> out;
  out.spectrum = fft2<Scalar>(x);
  const Field<Scalar> back = ifft2<Scalar>(Field<Scalar>(out.spectrum * f.response));
  const Scalar norm = std::sqrt(x.abs2().sum());
  const Scalar residue = back.imag().abs().maxCoeff();
  // Symmetric response keeps real inputs real; anything else is a bug upstream.
  if (residue > Scalar(1e-10) * std::max(norm, Scalar(1))) {
    throw NumericError("apply_filter: imaginary residue " + std::to_string(residue));
  }
  out.filtered = back.real();
  return out;
}

}  // namespace detail

/// Circular convolution with the retinal kernel, computed in the frequency domain.
template <typename Scalar>
Grid<Scalar> apply_filter(const Grid<Scalar>& x, const RetinalFilterT<Scalar>& f) {
  return detail::filter_with_spectrum(x, f).filtered;
}

/// ||filter(I - T)||^2 summed over pixels.
template <typename Scalar>
Scalar filtered_loss(const Grid<Scalar>& image, const Grid<Scalar>& target, const RetinalFilterT<Scalar>& f) {
  require_same_shape(image, target, "filtered_loss");
  return apply_filter<Scalar>(image - target, f).abs2().sum();
}

/// PSNR with peak 1. Infinity when the images agree exactly.
template <typename Scalar>
Scalar psnr(const Grid<Scalar>& image, const Grid<Scalar>& target,
            const RetinalFilterT<Scalar>* f = nullptr) {
  require_same_shape(image, target, "psnr");
  const Grid<Scalar> diff = image - target;
  const Scalar mse = (f ? apply_filter<Scalar>(diff, *f) : diff).abs2().mean();
  if (mse == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return Scalar(10) * std::log10(Scalar(1) / mse);
}

/// PSNR from an already-computed mean squared error.
inline double psnr_from_mse(double mse) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace holo
