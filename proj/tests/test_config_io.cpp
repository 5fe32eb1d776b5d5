#include <doctest.h>

#include "case_fixtures.hpp"
#include "marsutm/commands.hpp"
#include "marsutm/config.hpp"
#include "marsutm/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace marsutm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("marsutm_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

} // namespace

TEST_CASE("empty document gives the MSL defaults") {
  const auto c = config::parse_config("");
  CHECK(c.case_id == 1);
  CHECK(c.targets.vehicle.mass == 3300.0);
  CHECK(c.targets.vehicle.drag_coeff == 1.45);
  CHECK(c.targets.initial.altitude == 125e3);
  CHECK(c.targets.initial.velocity == 6000.0);
  CHECK(c.targets.final_velocity == 540.0);
  CHECK(c.targets.limits.q_max == 10e3);
  CHECK(c.targets.limits.qdot_max == 70.0);
  CHECK(c.targets.limits.gload_max == 5.0);
  CHECK(c == config::parse_config("{}"));
}

TEST_CASE("angles and units are converted to SI") {
  auto a = config::parse_config(R"({"boundary": {"initial": {"flight_path_angle": "-11.5 deg"}}})");
  CHECK(a.targets.initial.flight_path_angle == doctest::Approx(-0.2007128640).epsilon(1e-10));
  auto b = config::parse_config("{\"boundary\": {\"initial\": {\"flight_path_angle\": \"\xE2\x88\x92" "11.5 deg\"}}}");
  CHECK(b.targets.initial.flight_path_angle == a.targets.initial.flight_path_angle);
  auto c = config::parse_config(R"({"boundary": {"initial": {"altitude": 120, "velocity": "5900 m/s"}}})");
  CHECK(c.targets.initial.altitude == 120e3);
  CHECK(c.targets.initial.velocity == 5900.0);
  auto d = config::parse_config(R"({"limits": {"q_max": "12000 Pa"}})");
  CHECK(d.targets.limits.q_max == 12e3);
}

TEST_CASE("invalid documents name the offending field") {
  try {
    config::parse_config(R"({"vehicle": {"mass": -5}})");
    FAIL("negative mass accepted");
  } catch (const config::ConfigError& e) {
    CHECK(e.field() == "vehicle.mass");
  }
  try {
    config::parse_config(R"({"vehicle": {"colour": "red"}})");
    FAIL("unknown key accepted");
  } catch (const config::ConfigError& e) {
    CHECK(e.field() == "vehicle.colour");
  }
  CHECK_THROWS_AS(config::parse_config(R"({"boundary": {"initial": {"altitude": "12 furlongs"}}})"),
                  config::ConfigError);
  CHECK_THROWS_AS(config::parse_config("{not json"), config::ConfigError);
  CHECK_THROWS_AS(config::parse_config(R"({"case": 3})"), config::ConfigError);
}

TEST_CASE("configuration round trip is field exact") {
  auto c = config::parse_config("");
  CHECK(config::parse_config(config::serialize_config(c)) == c);
  c.case_id = 2;
  c.targets.vehicle.mass = 3123.456789012345;
  c.targets.initial.flight_path_angle = -0.21234567890123;
  c.targets.limits.qdot_max = 66.6;
  c.targets.eps_final = 3.3e-7;
  c.steps.limits = 17;
  c.solver.tolerance = 2.5e-7;
  c.max_halvings = 4;
  const auto text = config::serialize_config(c);
  CHECK(config::parse_config(text) == c);
  CHECK(config::serialize_config(config::parse_config(text)) == text);
}

TEST_CASE("solution document round trip") {
  const auto& b = fixtures::solved_case(1);
  const auto mesh = io::parse_solution(io::solution_json(b.solution));
  CHECK(mesh.nodes == b.solution.mesh.nodes);
  CHECK(mesh.values == b.solution.mesh.values);
  CHECK(mesh.params == b.solution.mesh.params);
  CHECK_THROWS_AS(io::parse_solution(""), io::InputError);
  CHECK_THROWS_AS(io::parse_solution("{\"nodes\": 3}"), io::InputError);
}

TEST_CASE("trajectory table carries unit headers") {
  const auto& b = fixtures::solved_case(1);
  const auto csv = io::trajectory_csv(b.trajectory);
  const auto header = csv.substr(0, csv.find('\n'));
  CHECK(header == "t_s,h_m,v_mps,gamma_rad,lambda_h,lambda_v,lambda_gamma,u_rad,sigma_rad,downrange_m,a_q,a_qdot,a_g,H");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(b.trajectory.size()) + 1);
}

TEST_CASE("solve writes a verifiable bundle and is reproducible") {
  const auto dir = scratch_dir("solve");
  std::ostringstream out, err;
  REQUIRE(commands::cmd_solve({1, "", dir / "a"}, out, err) == commands::kExitOk);
  REQUIRE(commands::cmd_solve({1, "", dir / "b"}, out, err) == commands::kExitOk);
  for (auto name : {io::kSummaryFile, io::kTrajectoryFile, io::kRunRecordFile, io::kConfigFile, io::kSolutionFile}) {
    CHECK(fs::exists(dir / "a" / name));
  }
  CHECK(io::read_file(dir / "a" / io::kTrajectoryFile) == io::read_file(dir / "b" / io::kTrajectoryFile));

  std::ostringstream vout, verr;
  CHECK(commands::cmd_verify(dir / "a" / io::kSolutionFile, "", vout, verr) == commands::kExitOk);
  const auto stored = io::summary_metrics(io::read_file(dir / "a" / io::kSummaryFile));
  CHECK(stored.at("final_altitude_km") == doctest::Approx(11.367).epsilon(0.05 / 11.367));

  // Edit one value in the trajectory table.
  auto csv = io::read_file(dir / "b" / io::kTrajectoryFile);
  const auto pos = csv.find('\n', csv.find('\n') + 1) + 1;
  csv.replace(pos, 1, csv[pos] == '9' ? "8" : "9");
  write_text(dir / "b" / io::kTrajectoryFile, csv);
  std::ostringstream eout, eerr;
  CHECK(commands::cmd_verify(dir / "b" / io::kSolutionFile, "", eout, eerr) == commands::kExitVerificationFailed);

  std::ostringstream xout, xerr;
  CHECK(commands::cmd_export(dir / "a" / io::kSolutionFile, "delimited", "", dir / "a" / "export.csv", xout, xerr) ==
        commands::kExitOk);
  CHECK(commands::cmd_export(dir / "a" / io::kSolutionFile, "yaml", "", "", xout, xerr) ==
        commands::kExitConfigError);
  write_text(dir / "empty.json", "");
  write_text(dir / io::kConfigFile, io::read_file(dir / "a" / io::kConfigFile));
  CHECK(commands::cmd_export(dir / "empty.json", "delimited", "", "", xout, xerr) == commands::kExitConfigError);
  fs::remove_all(dir);
}

TEST_CASE("unwritable output directory leaves no files") {
  const auto dir = scratch_dir("unwritable");
  write_text(dir / "blocker", "x");
  std::ostringstream out, err;
  const int code = commands::cmd_solve({1, "", dir / "blocker" / "out"}, out, err);
  CHECK(code != commands::kExitOk);
  CHECK(fs::is_regular_file(dir / "blocker"));
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("bad configuration file exits with the configuration status") {
  const auto dir = scratch_dir("badcfg");
  write_text(dir / "c.json", R"({"vehicle": {"mass": 0}})");
  std::ostringstream out, err;
  CHECK(commands::cmd_solve({std::nullopt, (dir / "c.json").string(), dir / "out"}, out, err) ==
        commands::kExitConfigError);
  CHECK(err.str().find("vehicle.mass") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / io::kSummaryFile));
  fs::remove_all(dir);
}
