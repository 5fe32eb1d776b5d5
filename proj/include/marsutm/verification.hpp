#ifndef MARSUTM_VERIFICATION_HPP
#define MARSUTM_VERIFICATION_HPP

#include <stdexcept>
#include <utility>
#include <vector>

#include "marsutm/bvp/solver.hpp"
#include "marsutm/entry_problem.hpp"

namespace marsutm::verification {

class ReintegrationDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrajectoryMetrics {
  double final_altitude = 0.0;      // km
  double time_of_flight = 0.0;      // s
  double downrange = 0.0;           // km
  double final_fpa = 0.0;           // deg
  double peak_q = 0.0;              // kPa
  double peak_qdot = 0.0;           // W/cm^2
  double peak_gload = 0.0;          // Earth-g
  double max_abs_hamiltonian = 0.0; // solver scale
  std::vector<double> switch_times; // s
};

enum class DownrangeModel {
  Flat,       // integral of v cos(gamma) dt
  SurfaceArc, // integral of (R / r) v cos(gamma) dt
};

struct ReintegrationOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12; // on scaled variables
  std::size_t samples = 2001;
  double altitude_tol = 10.0; // m
  double velocity_tol = 1.0;  // m/s
  DownrangeModel downrange = DownrangeModel::Flat;
};

struct Reintegration {
  std::vector<TrajectoryPoint> points; // uniform in time, first at 0, last at t_f
  double altitude_mismatch = 0.0;      // m, |h_rk(t_f) - h_col(t_f)|
  double velocity_mismatch = 0.0;      // m/s
};

/// Integrates state, costate and downrange from the collocation initial point
/// with the control recomputed from the costates at every stage. Throws
/// std::invalid_argument for t_f <= 0 and ReintegrationDivergence when the
/// terminal point misses the collocation one by more than the tolerances.
Reintegration reintegrate(const bvp::BVPSolution& solution, const EntryScenario& scenario,
                          const ReintegrationOptions& options = {});

/// Trajectory points taken from the collocation interpolant (downrange left 0).
std::vector<TrajectoryPoint> sample_solution(const bvp::BVPSolution& solution, const EntryScenario& scenario,
                                             std::size_t samples);

/// Largest value of a sampled series with a parabolic fit through the
/// discrete maximum and its two neighbours.
double refined_peak(const std::vector<double>& t, const std::vector<double>& y);

std::vector<double> detect_switches(const std::vector<TrajectoryPoint>& trajectory, double c0, double window = 2.0,
                                    double terminal_exclusion = 1.0);

TrajectoryMetrics metrics(const std::vector<TrajectoryPoint>& trajectory, const EntryScenario& scenario,
                          double switch_window = 2.0);

/// |h_f(perturbed) - h_f(nominal)| in m where the perturbed run flies the
/// opposite bang for t < horizon. Both runs fly the bank schedule of the
/// converged solution open loop and stop when v reaches the final velocity.
double nonuniqueness_probe(const bvp::BVPSolution& solution, const EntryScenario& scenario, double horizon = 40.0,
                           double rel_tol = 1e-10);

struct HamiltonianHistory {
  double max_abs = 0.0;
  std::vector<std::pair<double, double>> samples; // (t s, H solver scale)
};

HamiltonianHistory hamiltonian_history(const bvp::BVPSolution& solution, const EntryScenario& scenario,
                                       std::size_t samples = 1001);

/// Componentwise maxima of the constraint fractions.
entry::ConstraintFractions max_fractions(const std::vector<TrajectoryPoint>& trajectory);

/// Duration (s) of the longest contiguous run of samples with the selected
/// fraction >= threshold.
double longest_arc(const std::vector<TrajectoryPoint>& trajectory, double entry::ConstraintFractions::*fraction,
                   double threshold);

struct Agreement {
  double altitude = 0.0; // m, max |h_rk - h_col|
  double velocity = 0.0; // m/s
};

/// Compares re-integrated points with the collocation interpolant at `count`
/// evenly spread samples of the trajectory.
Agreement interpolant_agreement(const bvp::BVPSolution& solution, const std::vector<TrajectoryPoint>& trajectory,
                                std::size_t count = 100);

/// max_t |d lambda_h / dt| along a trajectory.
double max_altitude_costate_rate(const std::vector<TrajectoryPoint>& trajectory, const EntryScenario& scenario);

} // namespace marsutm::verification

#endif
