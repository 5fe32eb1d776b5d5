#ifndef MARSUTM_CONFIG_HPP
#define MARSUTM_CONFIG_HPP

#include <stdexcept>
#include <string>

#include "marsutm/bvp/solver.hpp"
#include "marsutm/continuation.hpp"
#include "marsutm/entry_domain.hpp"

// Scenario configuration as a JSON document. Every physical entry is either a
// plain number in the field's default unit (km, km/s, deg, kPa, W/cm^2, ...)
// or a string "<value> <unit>". Values are held in SI after parsing and are
// written back in SI with explicit units. Omitted fields keep the MSL
// defaults; unknown keys are errors.

namespace marsutm::config {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ScenarioConfig {
  int case_id = 1;
  continuation::CaseTargets targets;
  continuation::StepCounts steps;
  bvp::SolverOptions solver;
  int max_halvings = 6;

  bool operator==(const ScenarioConfig& other) const;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);

/// Throws ConfigError naming the first offending field.
void validate(const ScenarioConfig& config);

continuation::Schedule make_schedule(const ScenarioConfig& config);
continuation::RunOptions make_run_options(const ScenarioConfig& config);

} // namespace marsutm::config

#endif
