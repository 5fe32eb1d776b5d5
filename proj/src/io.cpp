#include "marsutm/io.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace marsutm::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void append(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    append(out, v);
    first = false;
  }
  out += '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw OutputError("failed writing '" + path.string() + "'");
}

// Stages all files, then renames them into place; on failure nothing is left.
void write_files(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  ensure_writable(dir);
  std::vector<fs::path> staged;
  try {
    for (const auto& [name, text] : files) {
      const fs::path tmp = dir / ("." + name + ".tmp");
      staged.push_back(tmp);
      write_text(tmp, text);
    }
    for (std::size_t i = 0; i < files.size(); ++i) fs::rename(staged[i], dir / files[i].first);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    throw;
  }
}

json metrics_json(const verification::TrajectoryMetrics& m) {
  json j = json::object();
  for (const auto& [k, v] : metrics_map(m)) j[k] = v;
  j["switch_times_s"] = m.switch_times;
  return j;
}

} // namespace

bool VerificationReport::passed() const {
  if (!reintegrated) return false;
  for (const auto& [name, ok] : checks) {
    if (!ok) return false;
  }
  return true;
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw OutputError("output directory '" + dir.string() + "' cannot be created");
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw OutputError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& points) {
  std::string out = "t_s,h_m,v_mps,gamma_rad,lambda_h,lambda_v,lambda_gamma,u_rad,sigma_rad,downrange_m,a_q,a_qdot,a_g,H\n";
  out.reserve(points.size() * 14 * 24);
  for (const auto& p : points) {
    append_row(out, {p.time, p.state.altitude, p.state.velocity, p.state.flight_path_angle, p.costate.altitude,
                     p.costate.velocity, p.costate.flight_path_angle, p.control_u, p.bank_angle, p.downrange,
                     p.constraint_fractions.dynamic_pressure, p.constraint_fractions.heat_rate,
                     p.constraint_fractions.g_load, p.hamiltonian});
  }
  return out;
}

std::string run_record_csv(const continuation::RunRecord& record) {
  std::string out = "set,label,position,halvings,converged,status,newton_iterations,residual_norm,mesh_nodes,"
                    "t_f_s,h_f_m,seconds,values_si\n";
  for (const auto& s : record.steps) {
    out += std::to_string(s.set_index + 1) + "," + s.set_label + ",";
    append(out, s.position);
    out += "," + std::to_string(s.halvings) + "," + (s.converged ? "1" : "0") + "," + s.status + "," +
           std::to_string(s.newton_iterations) + ",";
    append(out, s.residual_norm);
    out += "," + std::to_string(s.mesh_nodes) + ",";
    append(out, s.final_time);
    out += ",";
    append(out, s.final_altitude);
    out += ",";
    append(out, s.seconds);
    out += ",";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (i) out += ';';
      out += s.values[i].first + "=";
      append(out, s.values[i].second);
    }
    out += '\n';
  }
  return out;
}

std::map<std::string, double> metrics_map(const verification::TrajectoryMetrics& m) {
  return {{"final_altitude_km", m.final_altitude},
          {"time_of_flight_s", m.time_of_flight},
          {"downrange_km", m.downrange},
          {"final_fpa_deg", m.final_fpa},
          {"peak_q_kPa", m.peak_q},
          {"peak_qdot_W_per_cm2", m.peak_qdot},
          {"peak_gload_g", m.peak_gload},
          {"max_abs_hamiltonian_scaled", m.max_abs_hamiltonian},
          {"switch_count", static_cast<double>(m.switch_times.size())}};
}

std::string summary_json(const ResultBundle& b) {
  json j = json::object();
  j["case"] = b.config.case_id;
  j["status"] = b.status;
  j["continuation"] = {{"success", b.record.success},
                       {"failure", b.record.failure},
                       {"steps", b.record.steps.size()},
                       {"wall_time_s", b.record.wall_time}};
  if (b.status != "stalled") {
    j["solution"] = {{"final_time_s", final_time(b.solution.params())},
                     {"mesh_nodes", b.solution.mesh.size()},
                     {"residual_norm", b.solution.residual_norm},
                     {"max_mesh_residual", b.solution.max_mesh_residual}};
    j["metrics"] = metrics_json(b.metrics);
    const auto& v = b.verification;
    json checks = json::object();
    for (const auto& [name, ok] : v.checks) checks[name] = ok;
    j["verification"] = {{"passed", v.passed()},
                         {"reintegration", v.reintegrated ? "ok" : v.reintegration_message},
                         {"downrange_model", "flat"},
                         {"terminal_altitude_mismatch_m", v.terminal_altitude_mismatch},
                         {"terminal_velocity_mismatch_mps", v.terminal_velocity_mismatch},
                         {"interpolant_altitude_agreement_m", v.agreement.altitude},
                         {"interpolant_velocity_agreement_mps", v.agreement.velocity},
                         {"hamiltonian_max_abs_scaled", v.hamiltonian_max_abs},
                         {"max_a_q", v.max_fractions.dynamic_pressure},
                         {"max_a_qdot", v.max_fractions.heat_rate},
                         {"max_a_g", v.max_fractions.g_load},
                         {"gload_active_arc_s", v.gload_active_arc},
                         {"probe_sensitivity_40s_m", v.probe_40s},
                         {"probe_sensitivity_150s_m", v.probe_150s},
                         {"max_lambda_h_rate_per_s", v.max_lambda_h_rate},
                         {"checks", checks}};
  }
  return j.dump(2) + "\n";
}

std::string solution_json(const bvp::BVPSolution& s) {
  json j = json::object();
  j["format"] = "marsutm-solution";
  j["version"] = 1;
  j["status"] = bvp::to_string(s.status);
  j["residual_norm"] = s.residual_norm;
  j["dimension"] = s.mesh.dimension();
  j["params"] = std::vector<double>(s.mesh.params.data(), s.mesh.params.data() + s.mesh.params.size());
  j["nodes"] = s.mesh.nodes;
  json values = json::array();
  for (Eigen::Index i = 0; i < s.mesh.values.cols(); ++i) {
    const bvp::Vector col = s.mesh.values.col(i);
    values.push_back(std::vector<double>(col.data(), col.data() + col.size()));
  }
  j["values"] = std::move(values);
  return j.dump() + "\n";
}

bvp::Mesh parse_solution(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw InputError("solution file is empty");
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "marsutm-solution") throw InputError("not a solution file");
    bvp::Mesh m;
    m.nodes = j.at("nodes").get<std::vector<double>>();
    const auto params = j.at("params").get<std::vector<double>>();
    m.params = Eigen::Map<const bvp::Vector>(params.data(), static_cast<Eigen::Index>(params.size()));
    const int dim = j.at("dimension").get<int>();
    const auto& values = j.at("values");
    if (dim <= 0 || values.size() != m.nodes.size()) throw InputError("solution values do not match the nodes");
    m.values.resize(dim, static_cast<Eigen::Index>(m.nodes.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto col = values[i].get<std::vector<double>>();
      if (col.size() != static_cast<std::size_t>(dim)) throw InputError("solution column has the wrong size");
      for (int r = 0; r < dim; ++r) m.values(r, static_cast<Eigen::Index>(i)) = col[static_cast<std::size_t>(r)];
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed solution file: ") + e.what());
  }
}

std::map<std::string, double> summary_metrics(const std::string& text) {
  std::map<std::string, double> out;
  try {
    const json j = json::parse(text);
    if (!j.contains("metrics")) return out;
    for (const auto& [k, v] : j.at("metrics").items()) {
      if (v.is_number()) out[k] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed summary file: ") + e.what());
  }
  return out;
}

void write_bundle(const fs::path& dir, const ResultBundle& b) {
  write_files(dir, {{kConfigFile, config::serialize_config(b.config)},
                    {kSolutionFile, solution_json(b.solution)},
                    {kTrajectoryFile, trajectory_csv(b.trajectory)},
                    {kRunRecordFile, run_record_csv(b.record)},
                    {kSummaryFile, summary_json(b)}});
}

void write_stalled(const fs::path& dir, const ResultBundle& b) {
  write_files(dir, {{kConfigFile, config::serialize_config(b.config)},
                    {kRunRecordFile, run_record_csv(b.record)},
                    {kSummaryFile, summary_json(b)}});
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExportFormat export_format_from_string(const std::string& text) {
  if (text == "delimited") return ExportFormat::Delimited;
  if (text == "structured") return ExportFormat::Structured;
  throw InputError("unknown export format '" + text + "' (expected delimited or structured)");
}

std::string export_table(const std::vector<TrajectoryPoint>& points, ExportFormat format) {
  const std::vector<std::string> names{"t_s",      "h_km",     "v_kmps", "downrange_km", "gamma_deg",
                                       "sigma_deg", "a_q",      "a_qdot", "a_g",          "lambda_h",
                                       "lambda_v_s", "lambda_gamma_m_per_rad", "H_scaled"};
  auto row = [](const TrajectoryPoint& p) {
    return std::vector<double>{p.time,
                               p.state.altitude / 1000.0,
                               p.state.velocity / 1000.0,
                               p.downrange / 1000.0,
                               p.state.flight_path_angle * kRadToDeg,
                               p.bank_angle * kRadToDeg,
                               p.constraint_fractions.dynamic_pressure,
                               p.constraint_fractions.heat_rate,
                               p.constraint_fractions.g_load,
                               p.costate.altitude,
                               p.costate.velocity,
                               p.costate.flight_path_angle,
                               p.hamiltonian};
  };
  if (format == ExportFormat::Structured) {
    std::vector<std::vector<double>> columns(names.size());
    for (const auto& p : points) {
      const auto r = row(p);
      for (std::size_t c = 0; c < r.size(); ++c) columns[c].push_back(r[c]);
    }
    json j = json::object();
    for (std::size_t c = 0; c < names.size(); ++c) j[names[c]] = columns[c];
    return j.dump() + "\n";
  }
  std::string out;
  for (std::size_t c = 0; c < names.size(); ++c) out += (c ? "," : "") + names[c];
  out += '\n';
  for (const auto& p : points) {
    const auto r = row(p);
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += ',';
      append(out, r[c]);
    }
    out += '\n';
  }
  return out;
}

} // namespace marsutm::io
