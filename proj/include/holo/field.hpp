#pragma once

// Dense wave-field containers and the Fourier-holography forward model.
//
// All grids are row-major Eigen arrays. The forward DFT is unnormalized and
// the inverse carries 1/n, so ||x||^2 == ||fft2(x)||^2 / n. Frequency origin
// sits at index (0,0); centered() reorders for display only.

#include <complex>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "holo/errors.hpp"

namespace holo {

template <typename Scalar>
using Field = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ComplexField = Field<double>;
using RealGrid = Grid<double>;
// Non-negative intensity; same storage as RealGrid, the name documents intent.
using IntensityImage = Grid<double>;

inline bool is_power_of_two(Eigen::Index v) { return v > 0 && (v & (v - 1)) == 0; }

template <typename Derived>
void require_power_of_two(const Eigen::ArrayBase<Derived>& x, const char* what) {
  if (!is_power_of_two(x.rows()) || !is_power_of_two(x.cols())) {
    throw DimensionError(std::string(what) + ": dimensions " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " are not powers of two");
  }
}

template <typename A, typename B>
void require_same_shape(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

template <typename Derived>
bool all_finite(const Eigen::ArrayBase<Derived>& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto v = x.derived().data()[i];
    if constexpr (Eigen::NumTraits<typename Derived::Scalar>::IsComplex) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    } else {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

namespace detail {

// The FFTW planner behind Eigen::FFT is not reentrant.
inline std::mutex& fft_mutex() {
  static std::mutex m;
  return m;
}

template <typename Scalar>
void transform_rows(Field<Scalar>& x, bool inverse) {
  thread_local Eigen::FFT<Scalar> engine;
  const Eigen::Index n = x.cols();
  std::vector<std::complex<Scalar>> out(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::complex<Scalar>* row = x.data() + r * n;
    if (inverse) {
      engine.inv(out.data(), row, n);
    } else {
      engine.fwd(out.data(), row, n);
    }
    std::copy(out.begin(), out.end(), row);
  }
}

template <typename Scalar>
Field<Scalar> transform2(Field<Scalar> x, bool inverse) {
  std::lock_guard<std::mutex> lock(fft_mutex());
  transform_rows(x, inverse);
  Field<Scalar> t = x.transpose();
  transform_rows(t, inverse);
  return t.transpose();
}

}  // namespace detail

/// Unnormalized forward 2D DFT.
template <typename Scalar>
Field<Scalar> fft2(const Field<Scalar>& x) {
  require_power_of_two(x, "fft2");
  return detail::transform2<Scalar>(x, false);
}

/// Inverse 2D DFT including the 1/n factor.
template <typename Scalar>
Field<Scalar> ifft2(const Field<Scalar>& x) {
  require_power_of_two(x, "ifft2");
  return detail::transform2<Scalar>(x, true);
}

template <typename Scalar>
Field<Scalar> fft2(const Grid<Scalar>& x) {
  return fft2<Scalar>(Field<Scalar>(x.template cast<std::complex<Scalar>>()));
}

/// Moves the (0,0) frequency to the grid center. Display only.
template <typename Derived>
auto centered(const Eigen::ArrayBase<Derived>& x) {
  using Plain = typename Derived::PlainObject;
  const Eigen::Index h = x.rows(), w = x.cols();
  Plain out(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      out((r + h / 2) % h, (c + w / 2) % w) = x(r, c);
    }
  }
  return out;
}

/// Nearest-neighbour replication of every pixel into an m x m block.
template <typename Derived>
auto upsample_zeroth(const Eigen::ArrayBase<Derived>& s, int m) {
  if (m < 1) throw ParameterError("upsample_zeroth: factor must be >= 1, got " + std::to_string(m));
  using Plain = typename Derived::PlainObject;
  Plain out(s.rows() * m, s.cols() * m);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = s(r / m, c / m);
  }
  return out;
}

/// Adjoint of upsample_zeroth: sums each m x m block.
template <typename Derived>
auto block_sum(const Eigen::ArrayBase<Derived>& y, int m) {
  if (m < 1) throw ParameterError("block_sum: factor must be >= 1, got " + std::to_string(m));
  if (y.rows() % m != 0 || y.cols() % m != 0) {
    throw DimensionError("block_sum: grid not divisible by factor " + std::to_string(m));
  }
  using Plain = typename Derived::PlainObject;
  Plain out = Plain::Zero(y.rows() / m, y.cols() / m);
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    for (Eigen::Index c = 0; c < y.cols(); ++c) out(r / m, c / m) += y(r, c);
  }
  return out;
}

/// Modulated wavefront E .* U(S) on the expander grid.
template <typename Scalar>
Field<Scalar> modulated_field(const Field<Scalar>& expander, const Field<Scalar>& slm, int m) {
  if (m < 1) throw ParameterError("forward_model: factor must be >= 1, got " + std::to_string(m));
  if (expander.rows() != slm.rows() * m || expander.cols() != slm.cols() * m) {
    throw DimensionError("forward_model: expander " + std::to_string(expander.rows()) + "x" +
                         std::to_string(expander.cols()) + " is not " + std::to_string(m) +
                         " x SLM " + std::to_string(slm.rows()) + "x" + std::to_string(slm.cols()));
  }
  return expander * upsample_zeroth(slm, m);
}

/// I = |fft2(E .* U(S))|^2.
template <typename Scalar>
Grid<Scalar> forward_model(const Field<Scalar>& expander, const Field<Scalar>& slm, int m) {
  return fft2<Scalar>(modulated_field(expander, slm, m)).abs2();
}

}  // namespace holo
