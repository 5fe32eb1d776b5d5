#ifndef MARSUTM_COMMANDS_HPP
#define MARSUTM_COMMANDS_HPP

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "marsutm/config.hpp"
#include "marsutm/io.hpp"

namespace marsutm::commands {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitStalled = 2,
  kExitVerificationFailed = 3,
  kExitConfigError = 4,
};

/// The scenario a converged run of `config` solves (target boundary values,
/// limits and final penalty weights).
EntryScenario final_scenario(const config::ScenarioConfig& config);

struct Verified {
  std::vector<TrajectoryPoint> trajectory;
  verification::TrajectoryMetrics metrics;
  io::VerificationReport report;
};

/// Re-integration, metrics and the consistency checks used by solve/verify.
Verified verify_solution(const bvp::BVPSolution& solution, const config::ScenarioConfig& config);

/// Continuation plus verification without touching the file system.
io::ResultBundle solve_case(const config::ScenarioConfig& config);

struct SolveArgs {
  std::optional<int> case_id;
  std::string config_path; // empty: defaults
  std::filesystem::path out_dir = "out";
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);

/// config_path defaults to config.json next to the solution file.
int cmd_verify(const std::filesystem::path& solution_file, const std::string& config_path, std::ostream& out,
               std::ostream& err);

/// Writes to out_file, or to `out` when out_file is empty.
int cmd_export(const std::filesystem::path& solution_file, const std::string& format, const std::string& config_path,
               const std::filesystem::path& out_file, std::ostream& out, std::ostream& err);

/// Solves both cases concurrently into out_dir/case1 and out_dir/case2.
int cmd_batch(const std::string& config_path, const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);

} // namespace marsutm::commands

#endif
