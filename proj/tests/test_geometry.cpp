#include "doctest.h"
#include "holo/errors.hpp"
#include "holo/geometry.hpp"

#include <numbers>

using namespace holo;

TEST_CASE("diffraction angle against high-precision values") {
  // arcsin(lambda / 2 pitch) evaluated at 30 significant digits.
  CHECK(std::abs(diffraction_angle(660e-9, 16e-6) - 0.0206264625602624794856870964359) < 1e-15);
  CHECK(std::abs(diffraction_angle(660e-9, 2e-6) - 0.165758011309516249883415000121) < 1e-15);
  const double pitch = 1e-6;
  CHECK(diffraction_angle(2 * pitch * (1 - 1e-12), pitch) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-5));
  CHECK_THROWS_AS(diffraction_angle(2e-6, 1e-6), DomainError);
  CHECK_THROWS_AS(diffraction_angle(3e-6, 1e-6), DomainError);
}

TEST_CASE("etendue and expansion ratio") {
  DisplayGeometry g{16e-6, 2e-6, 32, 660e-9};
  CHECK(expansion_ratio(g) == 64.0);
  g.expander_pitch = 16e-6;
  CHECK(expansion_ratio(g) == 1.0);

  // A = 1 m^2 exactly: one pixel of 1 m pitch would violate lambda < 2 pitch trivially, so set area via pixels.
  DisplayGeometry unit{1.0, 1.0, 1, 660e-9};
  CHECK(std::abs(etendue(unit, 16e-6) - 1.7015625e-3) < 1e-18);
  for (double pitch : {8e-6, 4e-6}) {
    g.expander_pitch = pitch;
    CHECK(expansion_ratio(g) == (16e-6 / pitch) * (16e-6 / pitch));
  }
}

TEST_CASE("geometry validation") {
  DisplayGeometry g{16e-6, 2e-6, 32, 660e-9};
  CHECK_NOTHROW(g.validate());
  CHECK(g.upsampling_factor() == 8);
  CHECK(g.expander_pixels() == 256);

  DisplayGeometry bad = g;
  bad.expander_pitch = 5e-6;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.expander_pitch = 32e-6;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = g;
  bad.slm_pixels = 24;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = g;
  bad.wavelength = 5e-6;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  try {
    DisplayGeometry six{16e-6, 16e-6 / 3, 32, 660e-9};
    six.validate();
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field == "geometry.expander_pitch_um");
  }
}
