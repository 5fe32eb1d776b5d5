#include "marsutm/entry_domain.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace marsutm::entry {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be strictly positive");
  }
}

} // namespace

PlanetModel PlanetModel::mars() {
  return {3397.0e3, 42840.0e9, 0.0158, 9354.0};
}

void PlanetModel::validate() const {
  require_positive(mean_radius, "planet.mean_radius");
  require_positive(grav_parameter, "planet.grav_parameter");
  require_positive(surface_density, "planet.surface_density");
  require_positive(scale_height, "planet.scale_height");
}

VehicleModel VehicleModel::msl() {
  return {3300.0, 15.9, 1.45, 0.348, 0.6, 1.9027e-4};
}

void VehicleModel::validate() const {
  require_positive(mass, "vehicle.mass");
  require_positive(ref_area, "vehicle.ref_area");
  require_positive(drag_coeff, "vehicle.drag_coeff");
  require_positive(lift_coeff, "vehicle.lift_coeff");
  require_positive(nose_radius, "vehicle.nose_radius");
  require_positive(heat_rate_const, "vehicle.heat_rate_const");
}

PathLimits PathLimits::msl() {
  return {10.0e3, 70.0, 5.0, kStandardGravity};
}

void PathLimits::validate() const {
  require_positive(q_max, "limits.q_max");
  require_positive(qdot_max, "limits.qdot_max");
  require_positive(gload_max, "limits.gload_max");
  require_positive(g_ref, "limits.g_ref");
}

double atmosphere_density(double altitude, const PlanetModel& planet) {
  if (altitude < -planet.scale_height) {
    throw std::domain_error("altitude below one scale height under the reference surface");
  }
  return planet.surface_density * std::exp(-altitude / planet.scale_height);
}

double dynamic_pressure(const EntryState& state, const PlanetModel& planet) {
  return 0.5 * atmosphere_density(state.altitude, planet) * state.velocity * state.velocity;
}

double heat_rate(const EntryState& state, const VehicleModel& vehicle, const PlanetModel& planet) {
  const double rho = atmosphere_density(state.altitude, planet);
  const double v = state.velocity;
  // k*sqrt(rho/rn)*v^3 is W/m^2 with SI inputs; 1 W/cm^2 = 1e4 W/m^2.
  return 1.0e-4 * vehicle.heat_rate_const * std::sqrt(rho / vehicle.nose_radius) * v * v * v;
}

double g_load(const EntryState& state, const VehicleModel& vehicle, const PlanetModel& planet,
              double g_ref) {
  const auto [lift, drag] = aero_forces(state, vehicle, planet);
  return std::hypot(lift, drag) / (vehicle.mass * g_ref);
}

AeroForces aero_forces(const EntryState& state, const VehicleModel& vehicle, const PlanetModel& planet) {
  const double qa = dynamic_pressure(state, planet) * vehicle.ref_area;
  return {qa * vehicle.lift_coeff, qa * vehicle.drag_coeff};
}

StateRates state_derivatives(const EntryState& state, double cos_bank, const VehicleModel& vehicle,
                             const PlanetModel& planet) {
  const double v = state.velocity;
  if (!(v > 0.0)) {
    throw std::domain_error("state_derivatives: velocity must be positive");
  }
  const double r = planet.mean_radius + state.altitude;
  const double mu_r2 = planet.grav_parameter / (r * r);
  const double sin_g = std::sin(state.flight_path_angle);
  const double cos_g = std::cos(state.flight_path_angle);
  const auto [lift, drag] = aero_forces(state, vehicle, planet);

  return {
      v * sin_g,
      -drag / vehicle.mass - mu_r2 * sin_g,
      lift * cos_bank / (vehicle.mass * v) + (v / r - mu_r2 / v) * cos_g,
  };
}

ConstraintFractions path_constraint_fractions(const EntryState& state, const VehicleModel& vehicle,
                                              const PlanetModel& planet, const PathLimits& limits) {
  return {
      dynamic_pressure(state, planet) / limits.q_max,
      heat_rate(state, vehicle, planet) / limits.qdot_max,
      g_load(state, vehicle, planet, limits.g_ref) / limits.gload_max,
  };
}

double downrange_rate(const EntryState& state) {
  return state.velocity * std::cos(state.flight_path_angle);
}

} // namespace marsutm::entry
