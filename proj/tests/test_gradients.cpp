#include "doctest.h"
#include "holo/gradients.hpp"
#include "oracles.hpp"

using namespace holo;

namespace {

GradientInstance random_instance(Mode mode, int m, Exposure exposure, std::uint64_t seed, int slm_side = 8) {
  const int side = slm_side * m;
  GradientInstance inst;
  inst.expander.mode = mode;
  switch (mode) {
    case Mode::Amplitude:
      inst.expander.grid_a = oracle::random_grid(side, side, seed, -2, 2);
      break;
    case Mode::Phase:
      inst.expander.grid_a = oracle::random_grid(side, side, seed, 0, 6.3);
      break;
    case Mode::Complex:
      inst.expander.grid_a = oracle::random_grid(side, side, seed, -1, 1);
      inst.expander.grid_b = oracle::random_grid(side, side, seed + 1000, -1, 1);
      break;
  }
  inst.slm.phase = oracle::random_grid(slm_side, slm_side, seed + 2000, 0, 6.3);
  inst.target = oracle::random_grid(side, side, seed + 3000);
  inst.filter = build_retinal_filter<double>(side, side, default_cutoff(slm_side));
  inst.m = m;
  inst.exposure = exposure;
  return inst;
}

}  // namespace

TEST_CASE("realize parameterizations") {
  ExpanderParams p{Mode::Phase, RealGrid::Zero(4, 4), {}};
  CHECK((realize(p) == std::complex<double>(1, 0)).all());

  p = {Mode::Amplitude, oracle::random_grid(4, 4, 1, -30, 30), {}};
  const ComplexField a = realize(p);
  CHECK((a.imag() == 0).all());
  CHECK((a.real() > 0).all());
  CHECK((a.real() < 1).all());

  p = {Mode::Complex, RealGrid::Zero(4, 4), RealGrid::Ones(4, 4)};
  CHECK((realize(p) == std::complex<double>(0, 1)).all());

  p = {Mode::Phase, oracle::random_grid(8, 8, 2, -1e3, 1e3), {}};
  CHECK(((realize(p).abs() - 1.0).abs() < 1e-15).all());

  p = {Mode::Complex, RealGrid::Zero(4, 4), RealGrid::Zero(2, 2)};
  CHECK_THROWS_AS(realize(p), DimensionError);
}

TEST_CASE("analytic gradients match central differences") {
  for (Mode mode : {Mode::Amplitude, Mode::Phase, Mode::Complex}) {
    for (int m : {1, 2, 4}) {
      for (Exposure exposure : {Exposure::Matched, Exposure::None}) {
        CAPTURE(to_string(mode));
        CAPTURE(m);
        CAPTURE(to_string(exposure));
        const GradientInstance inst = random_instance(mode, m, exposure, 7 * m + static_cast<int>(mode), m == 4 ? 4 : 8);
        FiniteDiffOptions opt;
        opt.max_coords = 250;
        opt.seed = 3;
        CHECK(finite_diff_check(inst, opt) < 1e-5);
      }
    }
  }
}

TEST_CASE("global minimum has zero loss and zero gradients") {
  GradientInstance inst;
  inst.expander = {Mode::Phase, RealGrid::Zero(16, 16), {}};
  inst.slm = SlmParams::zero_phase(8);
  inst.filter = build_retinal_filter<double>(16, 16, 4.5);
  inst.m = 2;
  for (Exposure exposure : {Exposure::Matched, Exposure::None}) {
    inst.exposure = exposure;
    inst.target = forward_model<double>(realize(inst.expander), realize(inst.slm), 2);
    const GradPair g = loss_and_grads(inst.expander, inst.slm, inst.target, inst.filter, 2, exposure);
    CHECK(g.loss == 0.0);
    CHECK(g.d_expander_a.abs().maxCoeff() == 0.0);
    CHECK(g.d_slm.abs().maxCoeff() == 0.0);
    CHECK(finite_diff_check(inst) == 0.0);
  }
}

TEST_CASE("loss equals the perception-module recomputation exactly") {
  for (Mode mode : {Mode::Amplitude, Mode::Phase, Mode::Complex}) {
    for (Exposure exposure : {Exposure::Matched, Exposure::None}) {
      const GradientInstance inst = random_instance(mode, 2, exposure, 99);
      const GradPair g = loss_and_grads(inst.expander, inst.slm, inst.target, inst.filter, inst.m, exposure);
      IntensityImage image = forward_model<double>(realize(inst.expander), realize(inst.slm), inst.m);
      if (exposure == Exposure::Matched) image = image * (inst.target.sum() / image.sum());
      CHECK(g.loss == filtered_loss(image, inst.target, inst.filter));
    }
  }
}

TEST_CASE("gradients scale with the residual") {
  for (Exposure exposure : {Exposure::Matched, Exposure::None}) {
    const GradientInstance inst = random_instance(Mode::Complex, 2, exposure, 5);
    const IntensityImage image = render(realize(inst.expander), inst.slm, inst.target, inst.m, exposure);
    const IntensityImage doubled = image + 2.0 * (inst.target - image);
    const GradPair g1 = loss_and_grads(inst.expander, inst.slm, inst.target, inst.filter, inst.m, exposure);
    const GradPair g2 = loss_and_grads(inst.expander, inst.slm, doubled, inst.filter, inst.m, exposure);
    const double scale = g1.d_slm.abs().maxCoeff();
    CHECK((g2.d_slm - 2.0 * g1.d_slm).abs().maxCoeff() < 1e-8 * scale);
    CHECK((g2.d_expander_a - 2.0 * g1.d_expander_a).abs().maxCoeff() < 1e-8 * g1.d_expander_a.abs().maxCoeff());
    CHECK(oracle::rel(g2.loss, 4.0 * g1.loss) < 1e-9);
  }
}

TEST_CASE("SLM gradient is orthogonal to a global phase shift") {
  for (Exposure exposure : {Exposure::Matched, Exposure::None}) {
    const GradientInstance inst = random_instance(Mode::Phase, 2, exposure, 21);
    const GradPair g = loss_and_grads(inst.expander, inst.slm, inst.target, inst.filter, inst.m, exposure);
    // Directional derivative along the all-ones phase direction.
    CHECK(std::abs(g.d_slm.sum()) < 1e-9 * std::max(1.0, g.d_slm.abs().sum()));
  }
}

TEST_CASE("finite difference check detects a corrupted adjoint") {
  const GradientInstance inst = random_instance(Mode::Complex, 2, Exposure::Matched, 8);
  // Common bug: averaging instead of summing in the upsampling adjoint.
  const GradientFn block_average = [](const GradientInstance& i) {
    GradPair g = loss_and_grads(i.expander, i.slm, i.target, i.filter, i.m, i.exposure);
    g.d_slm /= static_cast<double>(i.m * i.m);
    return g;
  };
  CHECK(finite_diff_check(inst, {}, block_average) > 1e-2);
  CHECK(finite_diff_check(inst) < 1e-5);
}

TEST_CASE("non-finite inputs are reported with the failing stage") {
  GradientInstance inst = random_instance(Mode::Complex, 2, Exposure::None, 4);
  inst.expander.grid_a(0, 0) = std::numeric_limits<double>::infinity();
  try {
    loss_and_grads(inst.expander, inst.slm, inst.target, inst.filter, inst.m, inst.exposure);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("stage") != std::string::npos);
  }
  GradientInstance dark = random_instance(Mode::Complex, 2, Exposure::Matched, 4);
  dark.expander.grid_a.setZero();
  dark.expander.grid_b.setZero();
  CHECK_THROWS_AS(loss_and_grads(dark.expander, dark.slm, dark.target, dark.filter, 2, Exposure::Matched),
                  NumericError);
}
