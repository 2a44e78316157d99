#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "holo/field.hpp"

namespace oracle {

// O(n^2) direct DFT, unnormalized, sign convention exp(-2 pi i k x / n).
inline holo::ComplexField naive_dft2(const holo::ComplexField& x) {
  const auto h = x.rows(), w = x.cols();
  holo::ComplexField out = holo::ComplexField::Zero(h, w);
  for (Eigen::Index ky = 0; ky < h; ++ky) {
    for (Eigen::Index kx = 0; kx < w; ++kx) {
      std::complex<double> acc = 0;
      for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index xx = 0; xx < w; ++xx) {
          const double ang = -2.0 * std::numbers::pi *
                             (static_cast<double>(ky * y % h) / h + static_cast<double>(kx * xx % w) / w);
          acc += x(y, xx) * std::polar(1.0, ang);
        }
      }
      out(ky, kx) = acc;
    }
  }
  return out;
}

inline holo::ComplexField random_field(Eigen::Index h, Eigen::Index w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  holo::ComplexField x(h, w);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = {g(rng), g(rng)};
  return x;
}

inline holo::RealGrid random_grid(Eigen::Index h, Eigen::Index w, std::uint64_t seed, double lo = 0.0,
                                  double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  holo::RealGrid x(h, w);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace oracle
