#include "marsutm/continuation.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "marsutm/logging.hpp"

namespace marsutm::continuation {

namespace {

constexpr struct {
  ParameterName name;
  const char* text;
} kNames[] = {
    {ParameterName::InitialAltitude, "initial_altitude"},
    {ParameterName::FinalVelocity, "final_velocity"},
    {ParameterName::EpsControl, "eps_control"},
    {ParameterName::EpsQ, "eps_q"},
    {ParameterName::EpsQdot, "eps_qdot"},
    {ParameterName::EpsG, "eps_g"},
    {ParameterName::QMax, "q_max"},
    {ParameterName::QdotMax, "qdot_max"},
    {ParameterName::GloadMax, "gload_max"},
};

bool is_epsilon(ParameterName name) {
  return name == ParameterName::EpsControl || name == ParameterName::EpsQ || name == ParameterName::EpsQdot ||
         name == ParameterName::EpsG;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

EntryScenario target_scenario(const CaseTargets& targets) {
  EntryScenario s;
  s.planet = targets.planet;
  s.vehicle = targets.vehicle;
  s.params.coeffs = utm::control_coeffs(targets.bank_min, targets.bank_max);
  s.params.limits = targets.limits;
  s.boundary.initial_state = targets.initial;
  s.boundary.final_velocity = targets.final_velocity;
  return s;
}

SeedSpec make_seed(EntryScenario scenario, const SeedSettings& seed) {
  scenario.boundary.initial_state.altitude = seed.initial_altitude;
  scenario.boundary.final_velocity = seed.final_velocity;
  SeedSpec out;
  out.scenario = scenario;
  out.final_time = seed.final_time;
  out.costate_guess = seed.costate_guess;
  out.terminal_altitude_guess = seed.terminal_altitude_guess;
  out.nodes = seed.nodes;
  return out;
}

ContinuationSet boundary_set(const CaseTargets& targets, const SeedSettings& seed, int steps) {
  return {"boundary",
          {{ParameterName::InitialAltitude, seed.initial_altitude, targets.initial.altitude, steps, Spacing::Linear},
           {ParameterName::FinalVelocity, seed.final_velocity, targets.final_velocity, steps, Spacing::Linear}}};
}

StepRecord record_for(int set_index, const std::string& label, double position, int halvings,
                      const EntryScenario& scenario, const std::vector<ContinuationParameter>& parameters,
                      const bvp::BVPSolution& sol, double seconds) {
  StepRecord r;
  r.set_index = set_index;
  r.set_label = label;
  r.position = position;
  r.halvings = halvings;
  for (const auto& p : parameters) r.values.emplace_back(to_string(p.name), get_parameter(scenario, p.name));
  r.converged = sol.converged();
  r.status = bvp::to_string(sol.status);
  r.newton_iterations = sol.newton_iterations;
  r.residual_norm = sol.residual_norm;
  r.mesh_nodes = sol.mesh.size();
  if (sol.params().size() == kEntryParams) r.final_time = final_time(sol.params());
  if (sol.mesh.size() > 0) r.final_altitude = sol.mesh.values(0, sol.mesh.values.cols() - 1) * kScaling.length;
  r.seconds = seconds;
  return r;
}

} // namespace

std::string to_string(ParameterName name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.text;
  }
  return "unknown";
}

ParameterName parameter_from_string(const std::string& text) {
  for (const auto& n : kNames) {
    if (text == n.text) return n.name;
  }
  throw std::invalid_argument("unknown continuation parameter '" + text + "'");
}

double get_parameter(const EntryScenario& s, ParameterName name) {
  switch (name) {
    case ParameterName::InitialAltitude: return s.boundary.initial_state.altitude;
    case ParameterName::FinalVelocity: return s.boundary.final_velocity;
    case ParameterName::EpsControl: return s.params.eps_control;
    case ParameterName::EpsQ: return s.params.eps_q;
    case ParameterName::EpsQdot: return s.params.eps_qdot;
    case ParameterName::EpsG: return s.params.eps_g;
    case ParameterName::QMax: return s.params.limits.q_max;
    case ParameterName::QdotMax: return s.params.limits.qdot_max;
    case ParameterName::GloadMax: return s.params.limits.gload_max;
  }
  throw std::invalid_argument("unknown continuation parameter");
}

void set_parameter(EntryScenario& s, ParameterName name, double value) {
  switch (name) {
    case ParameterName::InitialAltitude: s.boundary.initial_state.altitude = value; return;
    case ParameterName::FinalVelocity: s.boundary.final_velocity = value; return;
    case ParameterName::EpsControl: s.params.eps_control = value; return;
    case ParameterName::EpsQ: s.params.eps_q = value; return;
    case ParameterName::EpsQdot: s.params.eps_qdot = value; return;
    case ParameterName::EpsG: s.params.eps_g = value; return;
    case ParameterName::QMax: s.params.limits.q_max = value; return;
    case ParameterName::QdotMax: s.params.limits.qdot_max = value; return;
    case ParameterName::GloadMax: s.params.limits.gload_max = value; return;
  }
  throw std::invalid_argument("unknown continuation parameter");
}

double ContinuationParameter::value_at(double s) const {
  if (s <= 0.0) return start;
  if (s >= steps) return target;
  const double f = s / steps;
  if (spacing == Spacing::Logarithmic) return start * std::pow(target / start, f);
  return start + (target - start) * f;
}

void ContinuationParameter::validate() const {
  const std::string n = to_string(name);
  if (steps < 1) throw std::invalid_argument(n + ": steps must be >= 1");
  if (!std::isfinite(start) || !std::isfinite(target)) throw std::invalid_argument(n + ": non-finite endpoint");
  if (start == target && steps != 1) throw std::invalid_argument(n + ": start equals target with steps > 1");
  if (spacing == Spacing::Logarithmic && !(start > 0.0 && target > 0.0)) {
    throw std::invalid_argument(n + ": logarithmic spacing needs positive endpoints");
  }
  if (is_epsilon(name) && spacing != Spacing::Logarithmic) {
    throw std::invalid_argument(n + ": penalty weights use logarithmic spacing");
  }
  if (!is_epsilon(name) && spacing != Spacing::Linear) {
    throw std::invalid_argument(n + ": boundary values and limits use linear spacing");
  }
}

int ContinuationSet::steps() const { return parameters.empty() ? 0 : parameters.front().steps; }

void ContinuationSet::validate() const {
  if (parameters.empty()) throw std::invalid_argument("set '" + label + "': no parameters");
  for (const auto& p : parameters) {
    p.validate();
    if (p.steps != steps()) throw std::invalid_argument("set '" + label + "': parameters differ in step count");
  }
}

void Schedule::validate() const {
  seed.scenario.planet.validate();
  seed.scenario.vehicle.validate();
  seed.scenario.params.validate();
  if (!(seed.final_time > 0.0)) throw std::invalid_argument("seed: final_time must be positive");
  if (seed.nodes < 3) throw std::invalid_argument("seed: at least 3 nodes required");
  for (const auto& s : sets) s.validate();
}

Schedule build_case1_schedule(const StepCounts& steps, const CaseTargets& targets, const SeedSettings& seed) {
  auto scenario = target_scenario(targets);
  scenario.params.eps_control = seed.eps_start;
  Schedule s;
  s.seed = make_seed(scenario, seed);
  s.sets.push_back(boundary_set(targets, seed, steps.boundary));
  s.sets.push_back(
      {"eps_control",
       {{ParameterName::EpsControl, seed.eps_start, targets.eps_final, steps.epsilon, Spacing::Logarithmic}}});
  return s;
}

Schedule build_case2_schedule(const StepCounts& steps, const CaseTargets& targets, const SeedSettings& seed) {
  auto scenario = target_scenario(targets);
  scenario.params.eps_control = seed.eps_start;
  scenario.params.eps_q = seed.eps_start;
  scenario.params.eps_qdot = seed.eps_start;
  scenario.params.eps_g = seed.eps_start;
  scenario.params.limits = seed.relaxed_limits;
  scenario.params.limits.g_ref = targets.limits.g_ref;

  Schedule s;
  s.seed = make_seed(scenario, seed);
  s.sets.push_back(boundary_set(targets, seed, steps.boundary));
  const auto& relaxed = seed.relaxed_limits;
  s.sets.push_back({"qdot_max",
                    {{ParameterName::QdotMax, relaxed.qdot_max, targets.limits.qdot_max, steps.limits,
                      Spacing::Linear}}});
  s.sets.push_back({"gload_max",
                    {{ParameterName::GloadMax, relaxed.gload_max, targets.limits.gload_max, steps.limits,
                      Spacing::Linear}}});
  s.sets.push_back(
      {"q_max", {{ParameterName::QMax, relaxed.q_max, targets.limits.q_max, steps.limits, Spacing::Linear}}});
  ContinuationSet eps{"eps_all", {}};
  for (auto name : {ParameterName::EpsControl, ParameterName::EpsQ, ParameterName::EpsQdot, ParameterName::EpsG}) {
    eps.parameters.push_back({name, seed.eps_start, targets.eps_final, steps.epsilon, Spacing::Logarithmic});
  }
  s.sets.push_back(eps);
  return s;
}

std::pair<bvp::BVProblem, bvp::Mesh> seed_problem(const SeedSpec& seed) {
  const auto& b = seed.scenario.boundary;
  bvp::Vector p(kEntryParams);
  p(0) = seed.final_time / kScaling.time;
  auto mesh = bvp::Mesh::uniform(seed.nodes, kEntryDimension, p);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double x = mesh.nodes[i];
    const auto c = static_cast<Eigen::Index>(i);
    mesh.values(0, c) = (b.initial_state.altitude + (seed.terminal_altitude_guess - b.initial_state.altitude) * x) /
                        kScaling.length;
    mesh.values(1, c) =
        (b.initial_state.velocity + (b.final_velocity - b.initial_state.velocity) * x) / kScaling.speed;
    mesh.values(2, c) = b.initial_state.flight_path_angle;
    mesh.values.block(3, c, 3, 1).setConstant(seed.costate_guess);
  }
  return {make_entry_problem(seed.scenario), std::move(mesh)};
}

RunResult run_from(const bvp::BVPSolution& start, const EntryScenario& scenario,
                   const std::vector<ContinuationSet>& sets, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult out;
  out.solution = start;
  out.scenario = scenario;

  for (std::size_t si = 0; si < sets.size(); ++si) {
    const auto& set = sets[si];
    set.validate();
    const int steps = set.steps();
    double position = 0.0;
    int level = 0;
    while (position < steps) {
      const double next = std::min<double>(position + std::ldexp(1.0, -level), steps);
      EntryScenario trial = out.scenario;
      for (const auto& p : set.parameters) set_parameter(trial, p.name, p.value_at(next));

      const auto ts = std::chrono::steady_clock::now();
      auto sol = bvp::solve(make_entry_problem(trial), out.solution.mesh, options.solver);
      out.record.steps.push_back(record_for(static_cast<int>(si), set.label, next, level, trial, set.parameters, sol,
                                            elapsed_since(ts)));
      const auto& rec = out.record.steps.back();
      log::info("{} {:.4f}/{} halvings {}: {} newton {} nodes {} t_f {:.4f} s h_f {:.2f} m", set.label, next, steps,
                level, rec.status, rec.newton_iterations, rec.mesh_nodes, rec.final_time, rec.final_altitude);

      if (sol.converged()) {
        out.solution = std::move(sol);
        out.scenario = trial;
        position = next;
        level = std::max(level - 1, 0);
      } else if (++level > options.max_halvings) {
        out.record.failure = "continuation stalled in set " + std::to_string(si + 1) + " (" + set.label +
                             ") at step position " + std::to_string(next) + ": " + rec.status;
        out.record.wall_time = elapsed_since(t0);
        return out;
      }
    }
  }
  out.record.success = true;
  out.record.wall_time = elapsed_since(t0);
  return out;
}

RunResult run(const Schedule& schedule, const RunOptions& options) {
  schedule.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto [problem, mesh] = seed_problem(schedule.seed);
  auto sol = bvp::solve(problem, mesh, options.solver);
  auto seed_record = record_for(-1, "seed", 0.0, 0, schedule.seed.scenario, {}, sol, elapsed_since(t0));
  log::info("seed: {} newton {} nodes {} t_f {:.4f} s h_f {:.2f} m", seed_record.status, seed_record.newton_iterations,
            seed_record.mesh_nodes, seed_record.final_time, seed_record.final_altitude);
  if (!sol.converged()) {
    RunResult out;
    out.solution = std::move(sol);
    out.scenario = schedule.seed.scenario;
    out.record.steps.push_back(seed_record);
    out.record.failure = "continuation stalled at the seed problem: " + seed_record.status;
    out.record.wall_time = elapsed_since(t0);
    return out;
  }
  auto out = run_from(sol, schedule.seed.scenario, schedule.sets, options);
  out.record.steps.insert(out.record.steps.begin(), seed_record);
  out.record.wall_time = elapsed_since(t0);
  return out;
}

} // namespace marsutm::continuation
