#include <doctest.h>

#include "case_fixtures.hpp"
#include "marsutm/continuation.hpp"

#include <cmath>
#include <stdexcept>

using namespace marsutm;
using namespace marsutm::continuation;

TEST_CASE("Case I schedule structure") {
  const auto s = build_case1_schedule();
  REQUIRE(s.sets.size() == 2);
  const auto& ramp = s.sets[0];
  REQUIRE(ramp.parameters.size() == 2);
  CHECK(ramp.parameters[0].name == ParameterName::InitialAltitude);
  CHECK(ramp.parameters[0].start == 50e3);
  CHECK(ramp.parameters[0].target == 125e3);
  CHECK(ramp.parameters[1].name == ParameterName::FinalVelocity);
  CHECK(ramp.parameters[1].target == 540.0);
  CHECK(ramp.steps() == 20);
  const auto& eps = s.sets[1];
  REQUIRE(eps.parameters.size() == 1);
  CHECK(eps.parameters[0].name == ParameterName::EpsControl);
  CHECK(eps.parameters[0].target == 1e-6);
  CHECK(eps.parameters[0].spacing == Spacing::Logarithmic);
  const auto& p = s.seed.scenario.params;
  CHECK(p.eps_q == 0.0);
  CHECK(p.eps_qdot == 0.0);
  CHECK(p.eps_g == 0.0);
}

TEST_CASE("Case II schedule structure") {
  const auto s = build_case2_schedule();
  REQUIRE(s.sets.size() == 5);
  const auto& lim = s.seed.scenario.params.limits;
  CHECK(lim.q_max == 100e3);
  CHECK(lim.qdot_max == 200.0);
  CHECK(lim.gload_max == 50.0);
  const auto& p = s.seed.scenario.params;
  CHECK(p.eps_control == 1.0);
  CHECK(p.eps_q == 1.0);
  CHECK(p.eps_qdot == 1.0);
  CHECK(p.eps_g == 1.0);
  CHECK(s.sets[1].parameters[0].name == ParameterName::QdotMax);
  CHECK(s.sets[1].parameters[0].target == 70.0);
  CHECK(s.sets[2].parameters[0].name == ParameterName::GloadMax);
  CHECK(s.sets[2].parameters[0].target == 5.0);
  CHECK(s.sets[3].parameters[0].name == ParameterName::QMax);
  CHECK(s.sets[3].parameters[0].target == 10e3);
  REQUIRE(s.sets[4].parameters.size() == 4);
  for (const auto& e : s.sets[4].parameters) CHECK(e.target == 1e-6);
}

TEST_CASE("seed problem") {
  const auto schedule = build_case1_schedule();
  const auto [problem, mesh] = seed_problem(schedule.seed);
  CHECK(problem.dimension == 6);
  CHECK(problem.n_params == 1);
  CHECK(mesh.size() == 61);
  CHECK(final_time(mesh.params) == doctest::Approx(10.0));
  CHECK(from_scaled(mesh.values.col(0)).state.altitude == doctest::Approx(50e3));
  for (Eigen::Index i = 0; i < mesh.values.cols(); ++i) {
    for (int k = 3; k < 6; ++k) REQUIRE(mesh.values(k, i) == -0.1);
  }
}

TEST_CASE("logarithmic and linear spacing") {
  ContinuationParameter eps{ParameterName::EpsControl, 1.0, 1e-6, 12, Spacing::Logarithmic};
  CHECK(eps.value_at(0) == 1.0);
  CHECK(eps.value_at(6) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(eps.value_at(12) == 1e-6);
  for (int i = 1; i < 12; ++i) {
    CHECK(eps.value_at(i) / eps.value_at(i - 1) == doctest::Approx(eps.value_at(i + 1) / eps.value_at(i)));
  }
  ContinuationParameter h{ParameterName::InitialAltitude, 50e3, 125e3, 20, Spacing::Linear};
  CHECK(h.value_at(10) == doctest::Approx(87.5e3));
  CHECK(h.value_at(2.5) == doctest::Approx(59375.0));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((ContinuationParameter{ParameterName::EpsQ, 1.0, 1e-6, 5, Spacing::Linear}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((ContinuationParameter{ParameterName::QMax, 1e5, 1e4, 5, Spacing::Logarithmic}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((ContinuationParameter{ParameterName::QMax, 1e5, 1e4, 0, Spacing::Linear}.validate()),
                  std::invalid_argument);
  ContinuationSet mixed{"mixed",
                        {{ParameterName::QMax, 1e5, 1e4, 5, Spacing::Linear},
                         {ParameterName::QdotMax, 200.0, 70.0, 6, Spacing::Linear}}};
  CHECK_THROWS_AS(mixed.validate(), std::invalid_argument);
  CHECK(parameter_from_string(to_string(ParameterName::GloadMax)) == ParameterName::GloadMax);
  CHECK_THROWS(parameter_from_string("nonsense"));
}

TEST_CASE("parameters address the scenario fields") {
  EntryScenario s;
  for (auto n : {ParameterName::InitialAltitude, ParameterName::FinalVelocity, ParameterName::EpsControl,
                 ParameterName::EpsQ, ParameterName::EpsQdot, ParameterName::EpsG, ParameterName::QMax,
                 ParameterName::QdotMax, ParameterName::GloadMax}) {
    set_parameter(s, n, 0.125);
    CHECK(get_parameter(s, n) == 0.125);
  }
}

TEST_CASE("Case I run record") {
  const auto& b = fixtures::solved_case(1);
  REQUIRE(b.record.success);
  const auto& steps = b.record.steps;
  CHECK(steps.front().set_index == -1);
  CHECK(steps.back().converged);
  int converged = 0;
  for (const auto& s : steps) converged += s.converged ? 1 : 0;
  // seed plus 20 + 12 accepted steps when no bisection was needed
  CHECK(converged >= 33);
  CHECK(b.solution.converged());
}

TEST_CASE("degenerate schedule leaves a converged solution unchanged") {
  const auto& b = fixtures::solved_case(1);
  const auto scenario = fixtures::case_scenario(1);
  const double eps = scenario.params.eps_control;
  std::vector<ContinuationSet> sets{{"noop", {{ParameterName::EpsControl, eps, eps, 1, Spacing::Logarithmic}}}};
  const auto r = run_from(b.solution, scenario, sets, config::make_run_options(b.config));
  REQUIRE(r.record.success);
  CHECK(r.record.steps.size() == 1);
  CHECK(r.solution.mesh.nodes == b.solution.mesh.nodes);
  CHECK(r.solution.mesh.values == b.solution.mesh.values);
  CHECK(r.solution.mesh.params == b.solution.mesh.params);
}

TEST_CASE("run records are reproducible") {
  auto c = config::parse_config("");
  const auto a = run(config::make_schedule(c), config::make_run_options(c));
  const auto& b = fixtures::solved_case(1).record;
  REQUIRE(a.record.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < b.steps.size(); ++i) {
    CHECK(a.record.steps[i].position == b.steps[i].position);
    CHECK(a.record.steps[i].newton_iterations == b.steps[i].newton_iterations);
    CHECK(a.record.steps[i].residual_norm == b.steps[i].residual_norm);
    CHECK(a.record.steps[i].final_altitude == b.steps[i].final_altitude);
  }
}

TEST_CASE("constrained case lands below the unconstrained one") {
  const auto& one = fixtures::solved_case(1);
  const auto& two = fixtures::solved_case(2);
  REQUIRE(two.record.success);
  CHECK(two.metrics.final_altitude < one.metrics.final_altitude);
}
