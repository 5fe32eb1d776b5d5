#include <iostream>

#include <CLI11.hpp>

#include "marsutm/commands.hpp"
#include "marsutm/logging.hpp"

namespace cmd = marsutm::commands;

int main(int argc, char** argv) {
  marsutm::log::init_from_env();

  CLI::App app{"Mars entry trajectory optimization with the unified trigonometrization method"};
  app.require_subcommand(1);

  int case_id = 0;
  std::string config_path;
  std::string out_dir = "out";
  std::string solution_file;
  std::string format = "delimited";
  std::string out_file;

  auto* solve = app.add_subcommand("solve", "run continuation and verification for one case");
  solve->add_option("--case", case_id, "case to solve (1: unconstrained, 2: path constrained)")
      ->check(CLI::IsMember({1, 2}));
  solve->add_option("--config", config_path, "scenario configuration (JSON)");
  solve->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "re-run verification on a stored solution");
  verify->add_option("solution", solution_file, "solution.json written by solve")->required();
  verify->add_option("--config", config_path, "configuration (default: config.json next to the solution)");

  auto* exp = app.add_subcommand("export", "write plot-ready trajectory columns");
  exp->add_option("solution", solution_file, "solution.json written by solve")->required();
  exp->add_option("--format", format, "delimited or structured")->capture_default_str();
  exp->add_option("--config", config_path, "configuration (default: config.json next to the solution)");
  exp->add_option("--out", out_file, "output file (default: stdout)");

  auto* batch = app.add_subcommand("batch", "solve both cases concurrently into <out>/case1 and <out>/case2");
  batch->add_option("--config", config_path, "scenario configuration (JSON)");
  batch->add_option("--out", out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cmd::kExitConfigError;
  }

  if (*solve) {
    cmd::SolveArgs args;
    if (case_id != 0) args.case_id = case_id;
    args.config_path = config_path;
    args.out_dir = out_dir;
    return cmd::cmd_solve(args, std::cout, std::cerr);
  }
  if (*verify) return cmd::cmd_verify(solution_file, config_path, std::cout, std::cerr);
  if (*exp) return cmd::cmd_export(solution_file, format, config_path, out_file, std::cout, std::cerr);
  return cmd::cmd_batch(config_path, out_dir, std::cout, std::cerr);
}
