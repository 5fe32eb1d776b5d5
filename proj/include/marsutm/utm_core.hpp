#ifndef MARSUTM_UTM_CORE_HPP
#define MARSUTM_UTM_CORE_HPP

#include <array>
#include <optional>
#include <stdexcept>

#include "marsutm/entry_domain.hpp"

// Trigonometrically regularized optimal-control mathematics for the entry
// problem. The bank angle is mapped through cos(bank) = c0 + c1*sin(u), and
// each path constraint enters the running cost as eps*sec(pi/2 * a).
//
// Cost is measured in metres of final altitude and time in seconds, so the
// Hamiltonian has units of m/s and the eps weights are in m/s as well.

namespace marsutm::utm {

using entry::EntryState;
using entry::PathLimits;
using entry::PlanetModel;
using entry::VehicleModel;

struct CostateState {
  double altitude;          // lambda_h, dimensionless
  double velocity;          // lambda_v, s
  double flight_path_angle; // lambda_gamma, m/rad
};

struct ControlCoeffs {
  double c0;
  double c1;

  double cos_bank(double u) const;
  double bank_angle(double u) const;
  double bang_upper() const { return c0 + c1; }
  double bang_lower() const { return c0 - c1; }
};

/// Penalty weights and limits of the regularized problem.
struct UTMParams {
  ControlCoeffs coeffs;
  double eps_control = 1.0;
  double eps_q = 0.0;
  double eps_qdot = 0.0;
  double eps_g = 0.0;
  PathLimits limits = PathLimits::msl();

  void validate() const;
};

/// Raised when a penalized constraint fraction reaches 1, where the secant
/// barrier is undefined. Solvers treat it as a rejected trial point.
class ConstraintBreach : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct AugmentedState {
  EntryState state;
  CostateState costate;
};

struct AugmentedBoundary {
  EntryState initial_state;
  double final_velocity;
  // lambda_h(tf) = -1, lambda_gamma(tf) = 0 and H(tf) = 0 are implied.
};

inline constexpr std::size_t kBoundaryConditionCount = 7;

ControlCoeffs control_coeffs(double bank_min, double bank_max);

/// H1 = lambda_gamma * L / (m v).
double switching_function(const EntryState& state, const CostateState& costate, const VehicleModel& vehicle,
                          const PlanetModel& planet);

/// Minimizing branch of dH/du = 0, reported in [0, 2*pi). When both branches
/// tie (eps_control = 0 and H1 = 0) every control is optimal and `previous`
/// is returned, wrapped to [0, 2*pi).
double optimal_control(double h1, const UTMParams& params, std::optional<double> previous = std::nullopt);

/// Closed-form sin(u*) of the minimizing branch; avoids the atan round trip.
double optimal_sin_control(double h1, const UTMParams& params);

double hamiltonian(const EntryState& state, const CostateState& costate, double u, const UTMParams& params,
                   const VehicleModel& vehicle, const PlanetModel& planet);

/// Same as hamiltonian() but with cos(bank) supplied directly.
double hamiltonian_at_cos_bank(const EntryState& state, const CostateState& costate, double cos_bank,
                               double cos_u, const UTMParams& params, const VehicleModel& vehicle,
                               const PlanetModel& planet);

/// Penalty part of the running cost: sum of eps*sec(pi/2 * a) over the active
/// constraints. Throws ConstraintBreach if an active fraction is >= 1.
double path_penalty(const EntryState& state, const UTMParams& params, const VehicleModel& vehicle,
                    const PlanetModel& planet);

/// -dH/d(h, v, gamma) at fixed control.
CostateState costate_derivatives(const EntryState& state, const CostateState& costate, double u,
                                 const UTMParams& params, const VehicleModel& vehicle, const PlanetModel& planet);

CostateState costate_derivatives_at_cos_bank(const EntryState& state, const CostateState& costate,
                                             double cos_bank, const UTMParams& params,
                                             const VehicleModel& vehicle, const PlanetModel& planet);

/// Residuals, in physical units:
/// [h(0)-h0, v(0)-v0, gamma(0)-gamma0, v(tf)-vf, lambda_h(tf)+1, lambda_gamma(tf), H(tf)].
std::array<double, kBoundaryConditionCount> boundary_residuals(const AugmentedState& initial,
                                                               const AugmentedState& final, double t_final,
                                                               const UTMParams& params,
                                                               const AugmentedBoundary& boundary,
                                                               const VehicleModel& vehicle,
                                                               const PlanetModel& planet);

/// Hamiltonian evaluated with the optimal control of the given point.
double optimal_hamiltonian(const AugmentedState& point, const UTMParams& params, const VehicleModel& vehicle,
                           const PlanetModel& planet);

} // namespace marsutm::utm

#endif
