#pragma once

#include <cmath>
#include <string>

#include "holo/errors.hpp"
#include "holo/field.hpp"

namespace holo {

struct AdamHyper {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for one real parameter grid.
template <typename Scalar>
struct AdamStateT {
  AdamHyper hyper;
  Grid<Scalar> first;
  Grid<Scalar> second;
  long step = 0;

  AdamStateT() = default;
  AdamStateT(AdamHyper h, Eigen::Index rows, Eigen::Index cols)
      : hyper(h), first(Grid<Scalar>::Zero(rows, cols)), second(Grid<Scalar>::Zero(rows, cols)) {}
};

using AdamState = AdamStateT<double>;

/// Bias-corrected ADAM update of params in place.
template <typename Scalar, typename Derived>
void adam_step(AdamStateT<Scalar>& state, Grid<Scalar>& params, const Eigen::ArrayBase<Derived>& grad_expr) {
  const Grid<Scalar> grads = grad_expr;
  require_same_shape(params, grads, "adam_step");
  if (state.first.size() == 0) {
    state.first = Grid<Scalar>::Zero(params.rows(), params.cols());
    state.second = Grid<Scalar>::Zero(params.rows(), params.cols());
  }
  require_same_shape(params, state.first, "adam_step state");
  const AdamHyper& h = state.hyper;
  ++state.step;
  state.first = h.beta1 * state.first + (1 - h.beta1) * grads;
  state.second = h.beta2 * state.second + (1 - h.beta2) * grads.square();
  const Scalar c1 = 1 - std::pow(h.beta1, static_cast<Scalar>(state.step));
  const Scalar c2 = 1 - std::pow(h.beta2, static_cast<Scalar>(state.step));
  params -= h.learning_rate * (state.first / c1) / ((state.second / c2).sqrt() + h.epsilon);
}

}  // namespace holo
