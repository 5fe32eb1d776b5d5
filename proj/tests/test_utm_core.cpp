#include <doctest.h>

#include "gradient_oracle.hpp"
#include "marsutm/utm_core.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace marsutm;
using namespace marsutm::utm;

namespace {

const auto kMars = entry::PlanetModel::mars();
const auto kMsl = entry::VehicleModel::msl();
const double kPi = std::numbers::pi;
const double kDeg = kPi / 180.0;
const entry::EntryState kEntry{125e3, 6000.0, -11.5 * kDeg};

UTMParams msl_params(double eps_control) {
  UTMParams p;
  p.coeffs = control_coeffs(30.0 * kDeg, 120.0 * kDeg);
  p.eps_control = eps_control;
  return p;
}

} // namespace

TEST_CASE("control coefficients") {
  const auto c = control_coeffs(30.0 * kDeg, 120.0 * kDeg);
  CHECK(c.c0 == doctest::Approx(0.1830127019).epsilon(1e-10));
  CHECK(c.c1 == doctest::Approx(0.6830127019).epsilon(1e-10));
  CHECK(c.cos_bank(kPi / 2) == doctest::Approx(std::cos(30.0 * kDeg)).epsilon(1e-15));
  CHECK(c.cos_bank(3 * kPi / 2) == doctest::Approx(std::cos(120.0 * kDeg)).epsilon(1e-15));
  const auto s = control_coeffs(0.0, kPi);
  CHECK(std::fabs(s.c0) < 1e-16);
  CHECK(s.c1 == doctest::Approx(1.0));
}

TEST_CASE("every control maps into the bank corridor") {
  const auto c = control_coeffs(30.0 * kDeg, 120.0 * kDeg);
  for (int i = 0; i < 1000; ++i) {
    const double u = 2 * kPi * i / 1000.0;
    const double sigma = c.bank_angle(u);
    REQUIRE(sigma >= 30.0 * kDeg - 1e-12);
    REQUIRE(sigma <= 120.0 * kDeg + 1e-12);
  }
}

TEST_CASE("switching function") {
  CHECK(switching_function(kEntry, {0.3, 2.0, 0.0}, kMsl, kMars) == 0.0);
  CHECK(switching_function(kEntry, {0.0, 0.0, 1.0}, kMsl, kMars) == doctest::Approx(1.24924503e-7).epsilon(1e-7));
  CHECK(switching_function({1e7, 6000.0, 0.0}, {0.0, 0.0, 5.0}, kMsl, kMars) < 1e-300);
}

TEST_CASE("optimal control branches") {
  const auto p = msl_params(1e-6);
  CHECK(optimal_control(0.0, p) == doctest::Approx(kPi).epsilon(1e-15));
  const double down = optimal_control(1.0, p);
  CHECK(down == doctest::Approx(3 * kPi / 2).epsilon(1e-5));
  CHECK(p.coeffs.cos_bank(down) == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(p.coeffs.bank_angle(down) == doctest::Approx(120.0 * kDeg).epsilon(1e-4));
  const double up = optimal_control(-1.0, p);
  CHECK(up == doctest::Approx(kPi / 2).epsilon(1e-5));
  CHECK(p.coeffs.bank_angle(up) == doctest::Approx(30.0 * kDeg).epsilon(1e-4));
  CHECK(std::sin(optimal_control(0.37, p)) == doctest::Approx(optimal_sin_control(0.37, p)).epsilon(1e-12));

  // Singular tie keeps the previous branch.
  const auto flat = msl_params(0.0);
  CHECK(optimal_control(0.0, flat, kPi / 2) == doctest::Approx(kPi / 2));
  CHECK(optimal_control(0.0, flat, 3 * kPi / 2) == doctest::Approx(3 * kPi / 2));
}

TEST_CASE("returned control minimizes the Hamiltonian") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    auto s = oracle::random_sample(rng, kMsl, kMars);
    const double h1 = switching_function(s.state, s.costate, kMsl, kMars);
    const double u_star = optimal_control(h1, s.params);
    const double h_star = hamiltonian(s.state, s.costate, u_star, s.params, kMsl, kMars);
    for (int i = 0; i < 1000; ++i) {
      const double u = 2 * kPi * i / 1000.0;
      const double h = hamiltonian(s.state, s.costate, u, s.params, kMsl, kMars);
      INFO("sample ", k, " u ", u, " H(u*) ", h_star, " H(u) ", h);
      REQUIRE(h_star <= h + 1e-12 * (1.0 + std::fabs(h)));
    }
  }
}

TEST_CASE("small control weight approaches the bang value") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto base = msl_params(1.0);
  for (int i = 0; i < 2000; ++i) {
    auto p = base;
    p.eps_control = std::pow(10.0, -8.0 + 6.0 * uni(rng));
    const double mag = std::pow(10.0, -1.0 + 4.0 * uni(rng));
    const double h1 = uni(rng) < 0.5 ? -mag : mag;
    const double bang = p.coeffs.c0 - std::copysign(p.coeffs.c1, h1);
    const double cs = p.coeffs.cos_bank(optimal_control(h1, p));
    REQUIRE(std::fabs(cs - bang) <= p.eps_control / (p.coeffs.c1 * std::fabs(h1)));
  }
}

TEST_CASE("Hamiltonian examples") {
  auto p = msl_params(0.0);
  CHECK(hamiltonian(kEntry, {0.0, 0.0, 0.0}, 1.234, p, kMsl, kMars) == 0.0);
  // u with c0 + c1 sin u = 0 puts the bank at 90 degrees.
  const double u = std::asin(-p.coeffs.c0 / p.coeffs.c1);
  CHECK(hamiltonian(kEntry, {-1.0, 0.0, 0.0}, u, p, kMsl, kMars) == doctest::Approx(1196.2076065).epsilon(1e-9));
}

TEST_CASE("costate rate examples") {
  auto p = msl_params(0.0);
  const auto zero = costate_derivatives(kEntry, {0.0, 0.0, 0.0}, 0.3, p, kMsl, kMars);
  CHECK(zero.altitude == 0.0);
  CHECK(zero.velocity == 0.0);
  CHECK(zero.flight_path_angle == 0.0);
  const auto d = costate_derivatives(kEntry, {-1.0, 0.0, 0.0}, 0.3, p, kMsl, kMars);
  CHECK(d.velocity == doctest::Approx(-0.19936793).epsilon(1e-7));
  CHECK(d.flight_path_angle == doctest::Approx(5879.5482277).epsilon(1e-10));
}

TEST_CASE("costate rates match finite differences of the Hamiltonian") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const auto s = oracle::random_sample(rng, kMsl, kMars);
    const auto c = oracle::check_gradient(s, kMsl, kMars);
    INFO("sample ", i, " analytic ", c.analytic[0], " ", c.analytic[1], " ", c.analytic[2], " numeric ",
         c.numeric[0], " ", c.numeric[1], " ", c.numeric[2]);
    REQUIRE(c.max_relative_error < 1e-6);
  }
}

TEST_CASE("secant barrier grows without bound toward the limit") {
  auto p = msl_params(1e-3);
  p.eps_q = 1e-2;
  const double h = 20e3;
  const double rho = entry::atmosphere_density(h, kMars);
  double prev = -1.0;
  for (double a : {0.5, 0.9, 0.99, 0.999, 0.9999, 0.99999}) {
    const double v = std::sqrt(2.0 * a * p.limits.q_max / rho);
    const double pen = path_penalty({h, v, -0.1}, p, kMsl, kMars);
    REQUIRE(pen > prev);
    prev = pen;
  }
  CHECK(prev > 1e2);
  const double v_limit = std::sqrt(2.0 * p.limits.q_max / rho);
  CHECK_THROWS_AS(path_penalty({h, v_limit * 1.001, -0.1}, p, kMsl, kMars), ConstraintBreach);
}

TEST_CASE("boundary residuals") {
  auto p = msl_params(1e-6);
  AugmentedBoundary bc{kEntry, 540.0};
  AugmentedState y0{kEntry, {-0.5, 0.1, 10.0}};
  AugmentedState yf{{10e3, 600.0, -0.2}, {0.0, 0.2, 0.0}};
  const auto r = boundary_residuals(y0, yf, 280.0, p, bc, kMsl, kMars);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 0.0);
  CHECK(r[3] == doctest::Approx(60.0));
  CHECK(r[4] == doctest::Approx(1.0));
  CHECK(r[5] == 0.0);
  CHECK(r[6] == doctest::Approx(optimal_hamiltonian(yf, p, kMsl, kMars)));
}
