#include "marsutm/utm_core.hpp"

#include <cmath>
#include <numbers>

namespace marsutm::utm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double u) {
  double w = std::fmod(u, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod can return exactly 2*pi after the shift for tiny negative inputs
  return w >= kTwoPi ? 0.0 : w;
}

struct ControlTrig {
  double sin_u;
  double cos_u;
};

ControlTrig optimal_trig(double h1, const UTMParams& params) {
  const double s = params.coeffs.c1 * h1;
  const double eps = params.eps_control;
  const double norm = std::hypot(s, eps);
  if (norm == 0.0) return {0.0, -1.0};
  return {-s / norm, -eps / norm};
}

// sec(pi/2 a) and d/da of it for one penalty term.
struct SecantTerm {
  double value;
  double slope;
};

SecantTerm secant_term(double fraction, const char* name) {
  if (!(fraction < 1.0)) {
    throw ConstraintBreach(std::string(name) + " constraint boundary breached");
  }
  const double x = 0.5 * kPi * fraction;
  const double sec = 1.0 / std::cos(x);
  return {sec, 0.5 * kPi * sec * std::tan(x)};
}

struct PenaltyGradient {
  double value = 0.0;
  double d_altitude = 0.0;
  double d_velocity = 0.0;
};

PenaltyGradient penalty_with_gradient(const EntryState& state, const UTMParams& params,
                                      const VehicleModel& vehicle, const PlanetModel& planet) {
  PenaltyGradient out;
  if (params.eps_q == 0.0 && params.eps_qdot == 0.0 && params.eps_g == 0.0) return out;

  const auto a = entry::path_constraint_fractions(state, vehicle, planet, params.limits);
  const double hs = planet.scale_height;
  const double v = state.velocity;

  // q and g-load scale as rho*v^2, the heat rate as sqrt(rho)*v^3.
  auto add = [&](double eps, double fraction, double dh_rel, double dv_rel, const char* name) {
    if (eps == 0.0) return;
    const auto term = secant_term(fraction, name);
    out.value += eps * term.value;
    out.d_altitude += eps * term.slope * fraction * dh_rel;
    out.d_velocity += eps * term.slope * fraction * dv_rel;
  };
  add(params.eps_q, a.dynamic_pressure, -1.0 / hs, 2.0 / v, "dynamic-pressure");
  add(params.eps_qdot, a.heat_rate, -0.5 / hs, 3.0 / v, "heat-rate");
  add(params.eps_g, a.g_load, -1.0 / hs, 2.0 / v, "g-load");
  return out;
}

} // namespace

double ControlCoeffs::cos_bank(double u) const {
  return c0 + c1 * std::sin(u);
}

double ControlCoeffs::bank_angle(double u) const {
  return std::acos(std::clamp(cos_bank(u), -1.0, 1.0));
}

void UTMParams::validate() const {
  if (!(coeffs.c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
  if (coeffs.c0 - coeffs.c1 < -1.0 - 1e-12 || coeffs.c0 + coeffs.c1 > 1.0 + 1e-12) {
    throw std::invalid_argument("c0 +/- c1 must lie in [-1, 1]");
  }
  for (double eps : {eps_control, eps_q, eps_qdot, eps_g}) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("penalty weights must be >= 0");
  }
  limits.validate();
}

ControlCoeffs control_coeffs(double bank_min, double bank_max) {
  if (!(bank_min >= 0.0) || !(bank_max <= kPi) || !(bank_min < bank_max)) {
    throw std::invalid_argument("bank bounds must satisfy 0 <= min < max <= pi");
  }
  // cos is decreasing on [0, pi], so bank_min gives the largest cosine.
  const double upper = std::cos(bank_min);
  const double lower = std::cos(bank_max);
  return {0.5 * (upper + lower), 0.5 * (upper - lower)};
}

double switching_function(const EntryState& state, const CostateState& costate, const VehicleModel& vehicle,
                          const PlanetModel& planet) {
  if (!(state.velocity > 0.0)) throw std::domain_error("switching_function: velocity must be positive");
  const auto forces = entry::aero_forces(state, vehicle, planet);
  return costate.flight_path_angle * forces.lift / (vehicle.mass * state.velocity);
}

double optimal_control(double h1, const UTMParams& params, std::optional<double> previous) {
  const double s = params.coeffs.c1 * h1;
  const double eps = params.eps_control;

  double base;
  if (eps > 0.0) {
    base = std::atan(s / eps);
  } else if (s != 0.0) {
    base = std::copysign(0.5 * kPi, s);
  } else {
    base = 0.0;
  }
  const double first = wrap_angle(base);
  const double second = wrap_angle(base + kPi);
  auto cost = [&](double u) { return s * std::sin(u) + eps * std::cos(u); };
  const double c_first = cost(first);
  const double c_second = cost(second);

  if (c_first < c_second) return first;
  if (c_second < c_first) return second;
  // Both candidates tie only when s = eps = 0, where H does not depend on u at
  // all; keeping the previous control is then optimal and continuous.
  if (previous) return wrap_angle(*previous);
  return second;
}

double optimal_sin_control(double h1, const UTMParams& params) {
  return optimal_trig(h1, params).sin_u;
}

double path_penalty(const EntryState& state, const UTMParams& params, const VehicleModel& vehicle,
                    const PlanetModel& planet) {
  return penalty_with_gradient(state, params, vehicle, planet).value;
}

double hamiltonian_at_cos_bank(const EntryState& state, const CostateState& costate, double cos_bank,
                               double cos_u, const UTMParams& params, const VehicleModel& vehicle,
                               const PlanetModel& planet) {
  const auto rates = entry::state_derivatives(state, cos_bank, vehicle, planet);
  return costate.altitude * rates.altitude + costate.velocity * rates.velocity +
         costate.flight_path_angle * rates.flight_path_angle + params.eps_control * cos_u +
         path_penalty(state, params, vehicle, planet);
}

double hamiltonian(const EntryState& state, const CostateState& costate, double u, const UTMParams& params,
                   const VehicleModel& vehicle, const PlanetModel& planet) {
  return hamiltonian_at_cos_bank(state, costate, params.coeffs.cos_bank(u), std::cos(u), params, vehicle, planet);
}

double optimal_hamiltonian(const AugmentedState& point, const UTMParams& params, const VehicleModel& vehicle,
                           const PlanetModel& planet) {
  const double h1 = switching_function(point.state, point.costate, vehicle, planet);
  const auto trig = optimal_trig(h1, params);
  return hamiltonian_at_cos_bank(point.state, point.costate, params.coeffs.c0 + params.coeffs.c1 * trig.sin_u,
                                 trig.cos_u, params, vehicle, planet);
}

CostateState costate_derivatives_at_cos_bank(const EntryState& state, const CostateState& costate,
                                             double cos_bank, const UTMParams& params,
                                             const VehicleModel& vehicle, const PlanetModel& planet) {
  const double v = state.velocity;
  if (!(v > 0.0)) throw std::domain_error("costate_derivatives: velocity must be positive");

  const double m = vehicle.mass;
  const double hs = planet.scale_height;
  const double mu = planet.grav_parameter;
  const double r = planet.mean_radius + state.altitude;
  const double r2 = r * r;
  const double r3 = r2 * r;
  const double sin_g = std::sin(state.flight_path_angle);
  const double cos_g = std::cos(state.flight_path_angle);
  const auto [lift, drag] = entry::aero_forces(state, vehicle, planet);
  const double lift_term = lift * cos_bank / (m * v); // aerodynamic part of gamma-dot

  // partials of the equations of motion; L and D are proportional to rho*v^2
  const double dhdot_dv = sin_g;
  const double dhdot_dg = v * cos_g;

  const double dvdot_dh = drag / (m * hs) + 2.0 * mu * sin_g / r3;
  const double dvdot_dv = -2.0 * drag / (m * v);
  const double dvdot_dg = -mu * cos_g / r2;

  const double dgdot_dh = -lift_term / hs + (-v / r2 + 2.0 * mu / (r3 * v)) * cos_g;
  const double dgdot_dv = lift_term / v + (1.0 / r + mu / (r2 * v * v)) * cos_g;
  const double dgdot_dg = -(v / r - mu / (r2 * v)) * sin_g;

  const auto penalty = penalty_with_gradient(state, params, vehicle, planet);

  const double lh = costate.altitude;
  const double lv = costate.velocity;
  const double lg = costate.flight_path_angle;
  return {
      -(lv * dvdot_dh + lg * dgdot_dh + penalty.d_altitude),
      -(lh * dhdot_dv + lv * dvdot_dv + lg * dgdot_dv + penalty.d_velocity),
      -(lh * dhdot_dg + lv * dvdot_dg + lg * dgdot_dg),
  };
}

CostateState costate_derivatives(const EntryState& state, const CostateState& costate, double u,
                                 const UTMParams& params, const VehicleModel& vehicle, const PlanetModel& planet) {
  return costate_derivatives_at_cos_bank(state, costate, params.coeffs.cos_bank(u), params, vehicle, planet);
}

std::array<double, kBoundaryConditionCount> boundary_residuals(const AugmentedState& initial,
                                                               const AugmentedState& final, double t_final,
                                                               const UTMParams& params,
                                                               const AugmentedBoundary& boundary,
                                                               const VehicleModel& vehicle,
                                                               const PlanetModel& planet) {
  if (!(t_final > 0.0)) throw std::invalid_argument("boundary_residuals: t_final must be positive");
  return {
      initial.state.altitude - boundary.initial_state.altitude,
      initial.state.velocity - boundary.initial_state.velocity,
      initial.state.flight_path_angle - boundary.initial_state.flight_path_angle,
      final.state.velocity - boundary.final_velocity,
      final.costate.altitude + 1.0,
      final.costate.flight_path_angle,
      optimal_hamiltonian(final, params, vehicle, planet),
  };
}

} // namespace marsutm::utm
