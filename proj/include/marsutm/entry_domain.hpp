#ifndef MARSUTM_ENTRY_DOMAIN_HPP
#define MARSUTM_ENTRY_DOMAIN_HPP

// Planar point-mass entry over a spherical, non-rotating planet with an
// exponential atmosphere. All quantities are SI unless a name says otherwise.

namespace marsutm::entry {

inline constexpr double kStandardGravity = 9.81;  // m/s^2, g-load reference

struct PlanetModel {
  double mean_radius;     // m
  double grav_parameter;  // m^3/s^2
  double surface_density; // kg/m^3
  double scale_height;    // m

  /// Mars constants used by the MSL-class entry scenario.
  static PlanetModel mars();
  void validate() const;
  bool operator==(const PlanetModel&) const = default;
};

struct VehicleModel {
  double mass;            // kg
  double ref_area;        // m^2
  double drag_coeff;
  double lift_coeff;
  double nose_radius;     // m
  double heat_rate_const; // kg^0.5/m^2 (Sutton-Graves)

  static VehicleModel msl();
  void validate() const;
  double lift_to_drag() const { return lift_coeff / drag_coeff; }
  bool operator==(const VehicleModel&) const = default;
};

struct EntryState {
  double altitude;          // m
  double velocity;          // m/s
  double flight_path_angle; // rad

  bool operator==(const EntryState&) const = default;
};

struct PathLimits {
  double q_max;     // Pa
  double qdot_max;  // W/cm^2
  double gload_max; // Earth-g
  double g_ref = kStandardGravity;

  static PathLimits msl();
  void validate() const;
  bool operator==(const PathLimits&) const = default;
};

struct AeroForces {
  double lift; // N
  double drag; // N
};

struct StateRates {
  double altitude;          // m/s
  double velocity;          // m/s^2
  double flight_path_angle; // rad/s
};

/// Normalized path-constraint values; each equals 1 exactly at its limit.
struct ConstraintFractions {
  double dynamic_pressure;
  double heat_rate;
  double g_load;
};

double atmosphere_density(double altitude, const PlanetModel& planet);
double dynamic_pressure(const EntryState& state, const PlanetModel& planet);

/// Stagnation-point heat rate in W/cm^2.
double heat_rate(const EntryState& state, const VehicleModel& vehicle, const PlanetModel& planet);

/// Aerodynamic load in Earth-g.
double g_load(const EntryState& state, const VehicleModel& vehicle, const PlanetModel& planet,
              double g_ref = kStandardGravity);

AeroForces aero_forces(const EntryState& state, const VehicleModel& vehicle, const PlanetModel& planet);

/// Equations of motion with the bank angle entering only through cos(bank).
/// Throws std::domain_error for a non-positive velocity.
StateRates state_derivatives(const EntryState& state, double cos_bank, const VehicleModel& vehicle,
                             const PlanetModel& planet);

ConstraintFractions path_constraint_fractions(const EntryState& state, const VehicleModel& vehicle,
                                              const PlanetModel& planet, const PathLimits& limits);

/// Flat downrange rate v*cos(gamma) (m/s).
double downrange_rate(const EntryState& state);

} // namespace marsutm::entry

#endif
