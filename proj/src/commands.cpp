#include "marsutm/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "marsutm/logging.hpp"

namespace marsutm::commands {

namespace fs = std::filesystem;

namespace {

constexpr double kHamiltonianBound = 1e-3;
constexpr double kBarrierSlack = 1e-3;
constexpr double kAgreementAltitude = 10.0; // m
constexpr double kAgreementVelocity = 1.0;  // m/s

config::ScenarioConfig resolve_config(const std::string& path, std::optional<int> case_id) {
  auto c = path.empty() ? config::parse_config("") : config::load_config(path);
  if (case_id) {
    c.case_id = *case_id;
    config::validate(c);
  }
  return c;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void print_metrics(std::ostream& out, const verification::TrajectoryMetrics& m) {
  out << "  final altitude     " << fmt(m.final_altitude) << " km\n"
      << "  time of flight     " << fmt(m.time_of_flight) << " s\n"
      << "  downrange          " << fmt(m.downrange) << " km\n"
      << "  final fpa          " << fmt(m.final_fpa) << " deg\n"
      << "  peak q             " << fmt(m.peak_q) << " kPa\n"
      << "  peak heat rate     " << fmt(m.peak_qdot) << " W/cm^2\n"
      << "  peak g-load        " << fmt(m.peak_gload) << " g\n"
      << "  switches           " << m.switch_times.size();
  for (double t : m.switch_times) out << " " << fmt(t) << "s";
  out << "\n";
}

fs::path sibling_config(const fs::path& solution_file, const std::string& config_path) {
  return config_path.empty() ? solution_file.parent_path() / io::kConfigFile : fs::path(config_path);
}

} // namespace

EntryScenario final_scenario(const config::ScenarioConfig& c) {
  const auto schedule = config::make_schedule(c);
  EntryScenario s = schedule.seed.scenario;
  for (const auto& set : schedule.sets) {
    for (const auto& p : set.parameters) continuation::set_parameter(s, p.name, p.target);
  }
  return s;
}

Verified verify_solution(const bvp::BVPSolution& solution, const config::ScenarioConfig& c) {
  const auto scenario = final_scenario(c);
  Verified v;
  auto& r = v.report;
  verification::Reintegration re;
  try {
    re = verification::reintegrate(solution, scenario);
    r.reintegrated = true;
  } catch (const verification::ReintegrationDivergence& e) {
    r.reintegration_message = e.what();
    // Keep the points for diagnosis when the tolerance check was the failure.
    verification::ReintegrationOptions loose;
    loose.altitude_tol = loose.velocity_tol = std::numeric_limits<double>::infinity();
    try {
      re = verification::reintegrate(solution, scenario, loose);
    } catch (const std::exception&) {
      return v;
    }
  }
  r.terminal_altitude_mismatch = re.altitude_mismatch;
  r.terminal_velocity_mismatch = re.velocity_mismatch;
  v.trajectory = std::move(re.points);
  v.metrics = verification::metrics(v.trajectory, scenario);
  r.agreement = verification::interpolant_agreement(solution, v.trajectory);
  r.hamiltonian_max_abs = verification::hamiltonian_history(solution, scenario).max_abs;
  r.max_fractions = verification::max_fractions(v.trajectory);
  r.gload_active_arc = verification::longest_arc(v.trajectory, &entry::ConstraintFractions::g_load, 0.99);
  r.max_lambda_h_rate = verification::max_altitude_costate_rate(v.trajectory, scenario);
  try {
    r.probe_40s = verification::nonuniqueness_probe(solution, scenario, 40.0);
    r.probe_150s = verification::nonuniqueness_probe(solution, scenario, 150.0);
  } catch (const std::exception& e) {
    log::warn("non-uniqueness probe failed: {}", e.what());
    r.probe_40s = r.probe_150s = std::numeric_limits<double>::quiet_NaN();
  }

  r.checks.emplace_back("reintegration_terminal", r.reintegrated);
  r.checks.emplace_back("interpolant_agreement", r.agreement.altitude <= kAgreementAltitude &&
                                                     r.agreement.velocity <= kAgreementVelocity);
  r.checks.emplace_back("hamiltonian_first_integral", r.hamiltonian_max_abs <= kHamiltonianBound);
  const auto& p = scenario.params;
  if (p.eps_q > 0.0) r.checks.emplace_back("barrier_q", r.max_fractions.dynamic_pressure <= 1.0 + kBarrierSlack);
  if (p.eps_qdot > 0.0) r.checks.emplace_back("barrier_qdot", r.max_fractions.heat_rate <= 1.0 + kBarrierSlack);
  if (p.eps_g > 0.0) r.checks.emplace_back("barrier_gload", r.max_fractions.g_load <= 1.0 + kBarrierSlack);
  return v;
}

io::ResultBundle solve_case(const config::ScenarioConfig& c) {
  io::ResultBundle b;
  b.config = c;
  auto result = continuation::run(config::make_schedule(c), config::make_run_options(c));
  b.record = std::move(result.record);
  b.solution = std::move(result.solution);
  if (!b.record.success) {
    b.status = "stalled";
    return b;
  }
  auto v = verify_solution(b.solution, c);
  b.trajectory = std::move(v.trajectory);
  b.metrics = std::move(v.metrics);
  b.verification = std::move(v.report);
  b.status = b.verification.passed() ? "verified" : "verification_failed";
  return b;
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  config::ScenarioConfig c;
  try {
    c = resolve_config(args.config_path, args.case_id);
    io::ensure_writable(args.out_dir);
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const io::OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const auto bundle = solve_case(c);
  try {
    if (bundle.status == "stalled") {
      io::write_stalled(args.out_dir, bundle);
      err << "continuation stage failed: " << bundle.record.failure << "\n";
      return kExitStalled;
    }
    io::write_bundle(args.out_dir, bundle);
  } catch (const io::OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "output error: " << e.what() << "\n";
    return kExitConfigError;
  }

  out << "case " << c.case_id << ": " << bundle.status << " (" << bundle.record.steps.size() << " solves, "
      << fmt(bundle.record.wall_time) << " s)\n";
  print_metrics(out, bundle.metrics);
  if (!bundle.verification.passed()) {
    err << "verification stage failed:";
    if (!bundle.verification.reintegrated) err << " " << bundle.verification.reintegration_message;
    for (const auto& [name, ok] : bundle.verification.checks) {
      if (!ok) err << " " << name;
    }
    err << "\n";
    return kExitVerificationFailed;
  }
  return kExitOk;
}

int cmd_verify(const fs::path& solution_file, const std::string& config_path, std::ostream& out, std::ostream& err) {
  config::ScenarioConfig c;
  try {
    c = config::load_config(sibling_config(solution_file, config_path).string());
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  bvp::BVPSolution solution;
  try {
    const auto mesh = io::parse_solution(io::read_file(solution_file));
    const auto problem = make_entry_problem(final_scenario(c));
    mesh.validate(problem.dimension, problem.n_params, std::numeric_limits<std::size_t>::max());
    solution = bvp::make_solution(problem, mesh);
  } catch (const std::exception& e) {
    err << "corrupted solution: " << e.what() << "\n";
    return kExitVerificationFailed;
  }
  bool ok = true;
  out << "residual norm " << fmt(solution.residual_norm) << " (tolerance " << fmt(c.solver.tolerance) << ")\n";
  if (!(solution.residual_norm <= c.solver.tolerance)) {
    err << "corrupted solution: recomputed residual norm exceeds the solver tolerance\n";
    ok = false;
  }

  const auto v = verify_solution(solution, c);
  const fs::path dir = solution_file.parent_path();
  const fs::path traj = dir / io::kTrajectoryFile;
  if (fs::exists(traj) && io::read_file(traj) != io::trajectory_csv(v.trajectory)) {
    err << "trajectory table does not match the solution\n";
    ok = false;
  }
  const fs::path summary = dir / io::kSummaryFile;
  if (fs::exists(summary)) {
    try {
      const auto stored = io::summary_metrics(io::read_file(summary));
      out << "metric deltas (recomputed - stored):\n";
      for (const auto& [key, value] : io::metrics_map(v.metrics)) {
        const auto it = stored.find(key);
        if (it == stored.end()) continue;
        out << "  " << key << " " << fmt(value - it->second) << "\n";
      }
    } catch (const io::InputError& e) {
      err << e.what() << "\n";
      ok = false;
    }
  }
  print_metrics(out, v.metrics);
  out << "non-uniqueness probe: 40 s -> " << fmt(v.report.probe_40s) << " m, 150 s -> " << fmt(v.report.probe_150s)
      << " m\n";
  for (const auto& [name, passed] : v.report.checks) {
    out << "  check " << name << ": " << (passed ? "pass" : "FAIL") << "\n";
  }
  if (!v.report.passed()) ok = false;
  return ok ? kExitOk : kExitVerificationFailed;
}

int cmd_export(const fs::path& solution_file, const std::string& format, const std::string& config_path,
               const fs::path& out_file, std::ostream& out, std::ostream& err) {
  io::ExportFormat fmt_kind;
  config::ScenarioConfig c;
  try {
    fmt_kind = io::export_format_from_string(format);
    c = config::load_config(sibling_config(solution_file, config_path).string());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  std::string table;
  try {
    const auto mesh = io::parse_solution(io::read_file(solution_file));
    const auto scenario = final_scenario(c);
    const auto problem = make_entry_problem(scenario);
    mesh.validate(problem.dimension, problem.n_params, std::numeric_limits<std::size_t>::max());
    const auto solution = bvp::make_solution(problem, mesh);
    verification::ReintegrationOptions loose;
    loose.altitude_tol = loose.velocity_tol = std::numeric_limits<double>::infinity();
    table = io::export_table(verification::reintegrate(solution, scenario, loose).points, fmt_kind);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (out_file.empty()) {
    out << table;
    return kExitOk;
  }
  std::ofstream f(out_file, std::ios::binary | std::ios::trunc);
  if (!(f << table)) {
    err << "error: cannot write '" << out_file.string() << "'\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_batch(const std::string& config_path, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  struct Outcome {
    int code;
    std::string out, err;
  };
  auto task = [&](int case_id) {
    std::ostringstream o, e;
    SolveArgs args{case_id, config_path, out_dir / ("case" + std::to_string(case_id))};
    const int code = cmd_solve(args, o, e);
    return Outcome{code, o.str(), e.str()};
  };
  auto f1 = std::async(std::launch::async, task, 1);
  auto f2 = std::async(std::launch::async, task, 2);
  const auto r1 = f1.get();
  const auto r2 = f2.get();
  out << r1.out << r2.out;
  err << r1.err << r2.err;
  return std::max(r1.code, r2.code);
}

} // namespace marsutm::commands
