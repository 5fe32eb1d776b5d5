#ifndef MARSUTM_CONTINUATION_HPP
#define MARSUTM_CONTINUATION_HPP

#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "marsutm/bvp/solver.hpp"
#include "marsutm/entry_problem.hpp"

namespace marsutm::continuation {

inline constexpr double kDegree = std::numbers::pi / 180.0;

enum class ParameterName {
  InitialAltitude,
  FinalVelocity,
  EpsControl,
  EpsQ,
  EpsQdot,
  EpsG,
  QMax,
  QdotMax,
  GloadMax,
};

enum class Spacing { Linear, Logarithmic };

std::string to_string(ParameterName name);
ParameterName parameter_from_string(const std::string& text);

/// Reads or writes the scenario field a parameter controls (SI units).
double get_parameter(const EntryScenario& scenario, ParameterName name);
void set_parameter(EntryScenario& scenario, ParameterName name, double value);

struct ContinuationParameter {
  ParameterName name;
  double start;
  double target;
  int steps = 1;
  Spacing spacing = Spacing::Linear;

  /// Value at position s in [0, steps] along the sweep.
  double value_at(double s) const;
  void validate() const;
};

struct ContinuationSet {
  std::string label;
  std::vector<ContinuationParameter> parameters; // advanced together

  int steps() const;
  void validate() const;
};

struct SeedSpec {
  EntryScenario scenario;
  double final_time = 10.0;                 // s
  double costate_guess = -0.1;              // every scaled costate, every node
  double terminal_altitude_guess = 40.0e3;  // m
  std::size_t nodes = 61;
};

struct Schedule {
  SeedSpec seed;
  std::vector<ContinuationSet> sets;

  void validate() const;
};

/// Target problem common to both cases (defaults are the MSL scenario).
struct CaseTargets {
  entry::PlanetModel planet = entry::PlanetModel::mars();
  entry::VehicleModel vehicle = entry::VehicleModel::msl();
  entry::EntryState initial{125.0e3, 6.0e3, -11.5 * kDegree};
  double final_velocity = 540.0;
  entry::PathLimits limits = entry::PathLimits::msl();
  double bank_min = 30.0 * kDegree;
  double bank_max = 120.0 * kDegree;
  double eps_final = 1.0e-6;

  bool operator==(const CaseTargets&) const = default;
};

struct SeedSettings {
  double initial_altitude = 50.0e3;
  double final_velocity = 5.5e3;
  double final_time = 10.0;
  double costate_guess = -0.1;
  double terminal_altitude_guess = 40.0e3;
  std::size_t nodes = 61;
  double eps_start = 1.0;
  entry::PathLimits relaxed_limits{100.0e3, 200.0, 50.0};
};

struct StepCounts {
  int boundary = 20;
  int epsilon = 12;
  int limits = 15;

  bool operator==(const StepCounts&) const = default;
};

Schedule build_case1_schedule(const StepCounts& steps = {}, const CaseTargets& targets = {},
                              const SeedSettings& seed = {});
Schedule build_case2_schedule(const StepCounts& steps = {}, const CaseTargets& targets = {},
                              const SeedSettings& seed = {});

/// Problem and initial mesh for the seed: states linear from the seed initial
/// point toward the seed terminal guess, costates constant, t_f fixed.
std::pair<bvp::BVProblem, bvp::Mesh> seed_problem(const SeedSpec& seed = {});

struct StepRecord {
  int set_index = -1; // -1 for the seed solve
  std::string set_label;
  double position = 0.0; // in set steps, fractional after bisection
  int halvings = 0;
  std::vector<std::pair<std::string, double>> values;
  bool converged = false;
  std::string status;
  int newton_iterations = 0;
  double residual_norm = 0.0;
  std::size_t mesh_nodes = 0;
  double final_time = 0.0;     // s
  double final_altitude = 0.0; // m
  double seconds = 0.0;
};

struct RunRecord {
  std::vector<StepRecord> steps;
  double wall_time = 0.0; // s
  bool success = false;
  std::string failure;
};

struct RunOptions {
  bvp::SolverOptions solver;
  int max_halvings = 6;
};

struct RunResult {
  bvp::BVPSolution solution;
  EntryScenario scenario; // scenario the solution solves
  RunRecord record;
};

RunResult run(const Schedule& schedule, const RunOptions& options = {});

/// Runs the sets of a schedule starting from an existing converged solution
/// instead of the seed.
RunResult run_from(const bvp::BVPSolution& start, const EntryScenario& scenario,
                   const std::vector<ContinuationSet>& sets, const RunOptions& options = {});

} // namespace marsutm::continuation

#endif
