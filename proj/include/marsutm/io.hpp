#ifndef MARSUTM_IO_HPP
#define MARSUTM_IO_HPP

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "marsutm/bvp/solver.hpp"
#include "marsutm/config.hpp"
#include "marsutm/continuation.hpp"
#include "marsutm/verification.hpp"

namespace marsutm::io {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kTrajectoryFile = "trajectory.csv";
inline constexpr const char* kRunRecordFile = "run_record.csv";
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kSolutionFile = "solution.json";

struct VerificationReport {
  bool reintegrated = false;
  std::string reintegration_message;
  double terminal_altitude_mismatch = 0.0; // m
  double terminal_velocity_mismatch = 0.0; // m/s
  verification::Agreement agreement;
  double hamiltonian_max_abs = 0.0; // solver scale, dense interpolant samples
  entry::ConstraintFractions max_fractions{0.0, 0.0, 0.0};
  double gload_active_arc = 0.0;       // s with a_g >= 0.99
  double probe_40s = 0.0;              // m
  double probe_150s = 0.0;             // m
  double max_lambda_h_rate = 0.0;      // 1/s
  std::vector<std::pair<std::string, bool>> checks;

  bool passed() const;
};

struct ResultBundle {
  config::ScenarioConfig config;
  continuation::RunRecord record;
  bvp::BVPSolution solution;
  std::vector<TrajectoryPoint> trajectory;
  verification::TrajectoryMetrics metrics;
  VerificationReport verification;
  std::string status; // verified | stalled | verification_failed
};

/// Creates the directory if needed and probes it with a scratch file.
void ensure_writable(const std::filesystem::path& dir);

std::string trajectory_csv(const std::vector<TrajectoryPoint>& points);
std::string run_record_csv(const continuation::RunRecord& record);
std::string summary_json(const ResultBundle& bundle);
std::string solution_json(const bvp::BVPSolution& solution);

/// Throws InputError on empty or malformed documents.
bvp::Mesh parse_solution(const std::string& text);

/// Flat numeric entries of the "metrics" object of a summary document.
std::map<std::string, double> summary_metrics(const std::string& text);
std::map<std::string, double> metrics_map(const verification::TrajectoryMetrics& metrics);

/// Writes every file of the bundle next to each other. Files are staged under
/// temporary names and renamed once all of them were written.
void write_bundle(const std::filesystem::path& dir, const ResultBundle& bundle);

/// Writes only the files that exist for a stalled run (config, run record,
/// summary).
void write_stalled(const std::filesystem::path& dir, const ResultBundle& bundle);

std::string read_file(const std::filesystem::path& path);

enum class ExportFormat { Delimited, Structured };

ExportFormat export_format_from_string(const std::string& text);

/// Plot-ready columns: energy (h vs v), ground track (h vs downrange) and the
/// control and constraint histories.
std::string export_table(const std::vector<TrajectoryPoint>& points, ExportFormat format);

} // namespace marsutm::io

#endif
