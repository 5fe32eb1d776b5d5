#include <doctest.h>

#include "marsutm/entry_domain.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace marsutm::entry;

namespace {

const PlanetModel kMars = PlanetModel::mars();
const VehicleModel kMsl = VehicleModel::msl();
const double kDeg = std::numbers::pi / 180.0;
const EntryState kEntry{125e3, 6000.0, -11.5 * kDeg};

} // namespace

TEST_CASE("density follows the exponential atmosphere") {
  CHECK(atmosphere_density(0.0, kMars) == doctest::Approx(0.0158).epsilon(1e-15));
  CHECK(atmosphere_density(9354.0, kMars) == doctest::Approx(5.81249517e-3).epsilon(1e-8));
  CHECK(atmosphere_density(125e3, kMars) == doctest::Approx(2.48349875e-8).epsilon(1e-8));
  double prev = atmosphere_density(0.0, kMars);
  for (double h = 500.0; h <= 200e3; h += 500.0) {
    const double rho = atmosphere_density(h, kMars);
    REQUIRE(rho < prev);
    REQUIRE(rho > 0.0);
    prev = rho;
  }
}

TEST_CASE("aerodynamic forces at the entry point") {
  const auto f = aero_forces(kEntry, kMsl, kMars);
  CHECK(dynamic_pressure(kEntry, kMars) == doctest::Approx(0.44702978).epsilon(1e-7));
  CHECK(f.lift == doctest::Approx(2.47350515).epsilon(1e-7));
  CHECK(f.drag == doctest::Approx(10.30627148).epsilon(1e-7));
  CHECK(f.lift / f.drag == doctest::Approx(0.348 / 1.45).epsilon(1e-14));
  CHECK(kMsl.lift_to_drag() == doctest::Approx(0.24));

  EntryState doubled = kEntry;
  doubled.velocity *= 2.0;
  const auto f2 = aero_forces(doubled, kMsl, kMars);
  CHECK(f2.lift == doctest::Approx(4.0 * f.lift).epsilon(1e-15));
  CHECK(f2.drag == doctest::Approx(4.0 * f.drag).epsilon(1e-15));

  const auto vacuum = aero_forces({1e7, 6000.0, 0.0}, kMsl, kMars);
  CHECK(vacuum.lift == doctest::Approx(0.0).epsilon(1e-300));
  CHECK(vacuum.drag == doctest::Approx(0.0).epsilon(1e-300));
}

TEST_CASE("equations of motion at the entry point") {
  const auto d = state_derivatives(kEntry, 0.0, kMsl, kMars);
  CHECK(d.altitude == doctest::Approx(-1196.2076065).epsilon(1e-9));
  CHECK(d.velocity == doctest::Approx(0.68541196156).epsilon(1e-9));
  CHECK(d.flight_path_angle == doctest::Approx(1.10533469e-3).epsilon(1e-7));

  CHECK(state_derivatives({50e3, 3000.0, 0.0}, 0.5, kMsl, kMars).altitude == 0.0);

  // Circular orbit far above the atmosphere.
  const double h = 5e6;
  const double vc = std::sqrt(kMars.grav_parameter / (kMars.mean_radius + h));
  const auto circ = state_derivatives({h, vc, 0.0}, 1.0, kMsl, kMars);
  CHECK(std::fabs(circ.flight_path_angle) < 1e-15);

  CHECK_THROWS_AS(state_derivatives({50e3, 0.0, 0.0}, 0.5, kMsl, kMars), std::domain_error);
}

TEST_CASE("flight path angle rate is linear in cos(bank)") {
  const EntryState s{40e3, 4500.0, -0.2};
  const double g0 = state_derivatives(s, 0.0, kMsl, kMars).flight_path_angle;
  const double g1 = state_derivatives(s, 1.0, kMsl, kMars).flight_path_angle;
  for (double c = -0.5; c <= 0.87; c += 0.01) {
    const auto d = state_derivatives(s, c, kMsl, kMars);
    CHECK(d.flight_path_angle == doctest::Approx(g0 + c * (g1 - g0)).epsilon(1e-12));
    CHECK(d.altitude == state_derivatives(s, 0.0, kMsl, kMars).altitude);
    CHECK(d.velocity == state_derivatives(s, 0.0, kMsl, kMars).velocity);
  }
}

TEST_CASE("constraint fractions at the entry point") {
  const auto limits = PathLimits::msl();
  const auto a = path_constraint_fractions(kEntry, kMsl, kMars, limits);
  CHECK(a.dynamic_pressure == doctest::Approx(4.4702978e-5).epsilon(1e-7));
  CHECK(a.heat_rate == doctest::Approx(1.19448961e-2).epsilon(1e-7));
  CHECK(a.g_load == doctest::Approx(6.5480102e-5).epsilon(1e-7));
  CHECK(heat_rate(kEntry, kMsl, kMars) == doctest::Approx(0.83614273).epsilon(1e-7));

  const auto vac = path_constraint_fractions({1e7, 6000.0, 0.0}, kMsl, kMars, limits);
  CHECK(vac.dynamic_pressure < 1e-300);
  CHECK(vac.heat_rate < 1e-150);
  CHECK(vac.g_load < 1e-300);

  // Velocity giving exactly q_max at 20 km.
  const double h = 20e3;
  const double v = std::sqrt(2.0 * limits.q_max / atmosphere_density(h, kMars));
  CHECK(path_constraint_fractions({h, v, 0.0}, kMsl, kMars, limits).dynamic_pressure ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("constraint fractions follow their velocity power laws") {
  const auto limits = PathLimits::msl();
  for (double h : {10e3, 35e3, 80e3}) {
    const EntryState s{h, 2500.0, -0.1};
    EntryState t = s;
    t.velocity *= 2.0;
    const auto a = path_constraint_fractions(s, kMsl, kMars, limits);
    const auto b = path_constraint_fractions(t, kMsl, kMars, limits);
    CHECK(b.dynamic_pressure == doctest::Approx(4.0 * a.dynamic_pressure).epsilon(1e-14));
    CHECK(b.heat_rate == doctest::Approx(8.0 * a.heat_rate).epsilon(1e-14));
    CHECK(b.g_load == doctest::Approx(4.0 * a.g_load).epsilon(1e-14));
  }
}

TEST_CASE("fractions are invariant under joint scaling of limit and quantity") {
  const EntryState s{30e3, 3000.0, -0.1};
  const auto limits = PathLimits::msl();
  const auto a = path_constraint_fractions(s, kMsl, kMars, limits);
  const PathLimits at_value{dynamic_pressure(s, kMars), heat_rate(s, kMsl, kMars),
                            g_load(s, kMsl, kMars, limits.g_ref), limits.g_ref};
  const auto one = path_constraint_fractions(s, kMsl, kMars, at_value);
  CHECK(one.dynamic_pressure == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.heat_rate == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.g_load == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.dynamic_pressure == doctest::Approx(at_value.q_max / limits.q_max).epsilon(1e-14));
}

TEST_CASE("invalid models are rejected") {
  VehicleModel v = kMsl;
  v.mass = -1.0;
  CHECK_THROWS_AS(v.validate(), std::invalid_argument);
  PlanetModel p = kMars;
  p.scale_height = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  PathLimits l = PathLimits::msl();
  l.gload_max = 0.0;
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);
  CHECK_NOTHROW(kMsl.validate());
}
