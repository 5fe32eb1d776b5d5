#ifndef MARSUTM_ENTRY_PROBLEM_HPP
#define MARSUTM_ENTRY_PROBLEM_HPP

#include "marsutm/bvp/solver.hpp"
#include "marsutm/entry_domain.hpp"
#include "marsutm/utm_core.hpp"

// The regularized entry problem as a scaled two-point BVP on tau in [0, 1].
//
// Unknown vector (6): h/L, v/V, gamma, lambda_h, lambda_v*V/L, lambda_gamma/L
// Parameter (1):      t_f/T
//
// with L = 10 km (altitude and cost), V = 1 km/s and T = 100 s. Physical time
// is t = tau * t_f, so every right-hand side is multiplied by t_f.

namespace marsutm {

struct Scaling {
  double length = 1.0e4; // m
  double speed = 1.0e3;  // m/s
  double time = 100.0;   // s

  /// Hamiltonian (m/s) to solver scale.
  double hamiltonian(double h_phys) const { return h_phys * time / length; }
};

inline constexpr Scaling kScaling{};
inline constexpr int kEntryDimension = 6;
inline constexpr int kEntryParams = 1;

struct EntryScenario {
  entry::PlanetModel planet = entry::PlanetModel::mars();
  entry::VehicleModel vehicle = entry::VehicleModel::msl();
  utm::UTMParams params;
  utm::AugmentedBoundary boundary;
};

struct TrajectoryPoint {
  double time = 0.0; // s
  entry::EntryState state{};
  utm::CostateState costate{};
  double control_u = 0.0;  // rad, in [0, 2 pi)
  double bank_angle = 0.0; // rad
  double downrange = 0.0;  // m
  entry::ConstraintFractions constraint_fractions{};
  double hamiltonian = 0.0; // solver scale
};

bvp::Vector to_scaled(const utm::AugmentedState& point);
utm::AugmentedState from_scaled(bvp::ConstVectorRef y);

inline double final_time(const bvp::Vector& params) { return params(0) * kScaling.time; }

/// Physical rates d/dt of (state, costate) under the optimal control.
/// Throws bvp::EvaluationRejected outside the admissible region.
std::array<double, 6> physical_rates(const utm::AugmentedState& point, const EntryScenario& scenario);

/// Same rates but with cos(bank) imposed instead of taken from the control law.
std::array<double, 6> physical_rates_at_cos_bank(const utm::AugmentedState& point, double cos_bank,
                                                 const EntryScenario& scenario);

bvp::BVProblem make_entry_problem(const EntryScenario& scenario);

/// Fills control, bank angle, constraint fractions and Hamiltonian for a point.
TrajectoryPoint describe_point(double time, const utm::AugmentedState& point, double downrange,
                               const EntryScenario& scenario);

} // namespace marsutm

#endif
