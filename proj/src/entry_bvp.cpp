#include "marsutm/entry_problem.hpp"

#include <cmath>

namespace marsutm {

namespace {

std::array<double, 6> rates_impl(const utm::AugmentedState& point, double cos_bank, const EntryScenario& scenario) {
  const auto& s = point.state;
  const auto sr = entry::state_derivatives(s, cos_bank, scenario.vehicle, scenario.planet);
  const auto cr = utm::costate_derivatives_at_cos_bank(s, point.costate, cos_bank, scenario.params,
                                                       scenario.vehicle, scenario.planet);
  return {sr.altitude, sr.velocity, sr.flight_path_angle, cr.altitude, cr.velocity, cr.flight_path_angle};
}

void check_admissible(const utm::AugmentedState& point, const EntryScenario& scenario) {
  if (!(point.state.velocity > 0.0)) throw bvp::EvaluationRejected("non-positive velocity");
  if (!(point.state.altitude > -scenario.planet.scale_height)) throw bvp::EvaluationRejected("altitude too low");
}

} // namespace

bvp::Vector to_scaled(const utm::AugmentedState& point) {
  const auto& c = kScaling;
  bvp::Vector y(kEntryDimension);
  y << point.state.altitude / c.length, point.state.velocity / c.speed, point.state.flight_path_angle,
      point.costate.altitude, point.costate.velocity * c.speed / c.length, point.costate.flight_path_angle / c.length;
  return y;
}

utm::AugmentedState from_scaled(bvp::ConstVectorRef y) {
  const auto& c = kScaling;
  return {{y(0) * c.length, y(1) * c.speed, y(2)}, {y(3), y(4) * c.length / c.speed, y(5) * c.length}};
}

std::array<double, 6> physical_rates(const utm::AugmentedState& point, const EntryScenario& scenario) {
  check_admissible(point, scenario);
  try {
    const double h1 = utm::switching_function(point.state, point.costate, scenario.vehicle, scenario.planet);
    const double sin_u = utm::optimal_sin_control(h1, scenario.params);
    return rates_impl(point, scenario.params.coeffs.c0 + scenario.params.coeffs.c1 * sin_u, scenario);
  } catch (const std::domain_error& e) {
    throw bvp::EvaluationRejected(e.what());
  }
}

std::array<double, 6> physical_rates_at_cos_bank(const utm::AugmentedState& point, double cos_bank,
                                                 const EntryScenario& scenario) {
  check_admissible(point, scenario);
  try {
    return rates_impl(point, cos_bank, scenario);
  } catch (const std::domain_error& e) {
    throw bvp::EvaluationRejected(e.what());
  }
}

bvp::BVProblem make_entry_problem(const EntryScenario& scenario) {
  bvp::BVProblem problem;
  problem.dimension = kEntryDimension;
  problem.n_params = kEntryParams;

  problem.ode = [scenario](double, bvp::ConstVectorRef y, bvp::ConstVectorRef p, bvp::VectorRef dy) {
    const double tf = p(0) * kScaling.time;
    if (!(tf > 0.0)) throw bvp::EvaluationRejected("non-positive final time");
    const auto r = physical_rates(from_scaled(y), scenario);
    const auto& c = kScaling;
    dy(0) = tf * r[0] / c.length;
    dy(1) = tf * r[1] / c.speed;
    dy(2) = tf * r[2];
    dy(3) = tf * r[3];
    dy(4) = tf * r[4] * c.speed / c.length;
    dy(5) = tf * r[5] / c.length;
  };

  problem.boundary = [scenario](bvp::ConstVectorRef ya, bvp::ConstVectorRef yb, bvp::ConstVectorRef p,
                                bvp::VectorRef res) {
    const double tf = p(0) * kScaling.time;
    if (!(tf > 0.0)) throw bvp::EvaluationRejected("non-positive final time");
    const auto initial = from_scaled(ya);
    const auto final = from_scaled(yb);
    std::array<double, utm::kBoundaryConditionCount> r;
    try {
      check_admissible(final, scenario);
      r = utm::boundary_residuals(initial, final, tf, scenario.params, scenario.boundary, scenario.vehicle,
                                  scenario.planet);
    } catch (const std::domain_error& e) {
      throw bvp::EvaluationRejected(e.what());
    }
    const auto& c = kScaling;
    res(0) = r[0] / c.length;
    res(1) = r[1] / c.speed;
    res(2) = r[2];
    res(3) = r[3] / c.speed;
    res(4) = r[4];
    res(5) = r[5] / c.length;
    res(6) = c.hamiltonian(r[6]);
  };
  return problem;
}

TrajectoryPoint describe_point(double time, const utm::AugmentedState& point, double downrange,
                               const EntryScenario& scenario) {
  TrajectoryPoint out;
  out.time = time;
  out.state = point.state;
  out.costate = point.costate;
  out.downrange = downrange;
  const double h1 = utm::switching_function(point.state, point.costate, scenario.vehicle, scenario.planet);
  out.control_u = utm::optimal_control(h1, scenario.params);
  const double sin_u = utm::optimal_sin_control(h1, scenario.params);
  out.bank_angle = std::acos(std::clamp(scenario.params.coeffs.c0 + scenario.params.coeffs.c1 * sin_u, -1.0, 1.0));
  out.constraint_fractions =
      entry::path_constraint_fractions(point.state, scenario.vehicle, scenario.planet, scenario.params.limits);
  try {
    out.hamiltonian = kScaling.hamiltonian(utm::optimal_hamiltonian(point, scenario.params, scenario.vehicle,
                                                                    scenario.planet));
  } catch (const utm::ConstraintBreach&) {
    out.hamiltonian = std::numeric_limits<double>::infinity();
  }
  return out;
}

} // namespace marsutm
