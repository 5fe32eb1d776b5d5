#include <doctest.h>

#include "bvp_problems.hpp"
#include "marsutm/bvp/solver.hpp"

#include <cmath>
#include <numbers>

using namespace marsutm::bvp;

using namespace bvp_problems;

TEST_CASE("exponential reaches e at the right end") {
  SolverOptions opt;
  opt.tolerance = 1e-9;
  opt.mesh_tolerance = 1e-7;
  const auto sol = solve(exponential_problem(), Mesh::uniform(11, 1, Vector()), opt);
  INFO(to_string(sol.status), " ", sol.message, " nodes ", sol.mesh.size(), " res ", sol.residual_norm, " mres ", sol.max_mesh_residual);
  REQUIRE(sol.converged());
  CHECK(std::abs(sol.evaluate(1.0)(0) - std::numbers::e) < 1e-8);
  CHECK(std::abs(sol.evaluate(0.5)(0) - std::exp(0.5)) < 1e-7);
  CHECK(sol.residual_norm <= opt.tolerance);
}

TEST_CASE("harmonic oscillator recovers sin") {
  SolverOptions opt;
  opt.tolerance = 1e-9;
  opt.mesh_tolerance = 1e-7;
  const auto sol = solve(sine_problem(), Mesh::uniform(11, 2, Vector()), opt);
  INFO(to_string(sol.status), " ", sol.message, " nodes ", sol.mesh.size(), " res ", sol.residual_norm, " mres ", sol.max_mesh_residual);
  REQUIRE(sol.converged());
  double err = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    err = std::max(err, std::abs(sol.evaluate(t)(0) - std::sin(t)));
  }
  CHECK(err < 1e-7);
}

TEST_CASE("unknown parameter is identified") {
  Vector p0(1);
  p0 << 0.3;
  SolverOptions opt;
  opt.bc_tolerance = 1e-13;
  const auto sol = solve(parameter_problem(), Mesh::uniform(5, 1, p0), opt);
  INFO(to_string(sol.status), " ", sol.message, " nodes ", sol.mesh.size(), " res ", sol.residual_norm, " mres ", sol.max_mesh_residual);
  REQUIRE(sol.converged());
  CHECK(std::abs(sol.params()(0) - 2.0) < 1e-10);
}

TEST_CASE("interpolant is fourth order") {
  const double e1 = interpolation_error(9);
  const double e2 = interpolation_error(17);
  const double e3 = interpolation_error(33);
  CHECK(std::log2(e1 / e2) >= 3.5);
  CHECK(std::log2(e2 / e3) >= 3.5);
}

TEST_CASE("evaluate reproduces nodes and rejects out of range") {
  const auto m = exact_exponential(7);
  const auto sol = make_solution(exponential_problem(), m);
  for (std::size_t i = 0; i < m.size(); ++i)
    CHECK(sol.evaluate(m.nodes[i])(0) == m.values(0, static_cast<Eigen::Index>(i)));
  CHECK_THROWS_AS(sol.evaluate(-0.1), std::out_of_range);
  CHECK_THROWS_AS(sol.evaluate(1.1), std::out_of_range);
}

TEST_CASE("residual norm detects corruption") {
  const auto prob = exponential_problem();
  auto m = exact_exponential(201);
  CHECK(residual_norm(prob, m) < 1e-10);
  m.values(0, 100) *= 1.1;
  CHECK(residual_norm(prob, m) > 1e-6);
}

TEST_CASE("solves are deterministic") {
  const auto a = solve(sine_problem(), Mesh::uniform(11, 2, Vector()));
  const auto b = solve(sine_problem(), Mesh::uniform(11, 2, Vector()));
  REQUIRE(a.mesh.size() == b.mesh.size());
  CHECK((a.mesh.values.array() == b.mesh.values.array()).all());
}

TEST_CASE("malformed guesses are rejected") {
  CHECK_THROWS_AS(Mesh::uniform(2, 1, Vector()), std::invalid_argument);
  Mesh m = Mesh::uniform(5, 2, Vector());
  CHECK_THROWS_AS(solve(exponential_problem(), m), std::invalid_argument);
  m = Mesh::uniform(5, 1, Vector());
  m.nodes[2] = m.nodes[1];
  CHECK_THROWS_AS(solve(exponential_problem(), m), std::invalid_argument);
}

TEST_CASE("suite summary") {
  const auto r = run_suite();
  CHECK(r.converged);
  CHECK(r.e_error < 1e-8);
  CHECK(r.sine_error < 1e-7);
  CHECK(r.p_error < 1e-10);
  CHECK(r.order >= 3.5);
}
