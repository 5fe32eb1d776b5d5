#include "marsutm/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <boost/numeric/odeint.hpp>

namespace marsutm::verification {

namespace odeint = boost::numeric::odeint;

namespace {

using State7 = std::array<double, 7>;
using State3 = std::array<double, 3>;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double checked_final_time(const bvp::BVPSolution& solution) {
  if (solution.params().size() != kEntryParams) throw std::invalid_argument("solution has no final-time parameter");
  const double tf = final_time(solution.params());
  if (!(tf > 0.0) || !std::isfinite(tf)) throw std::invalid_argument("final time must be positive");
  return tf;
}

double downrange_rate(const entry::EntryState& s, const EntryScenario& scenario, DownrangeModel model) {
  const double flat = entry::downrange_rate(s);
  if (model == DownrangeModel::Flat) return flat;
  return flat * scenario.planet.mean_radius / (scenario.planet.mean_radius + s.altitude);
}

utm::AugmentedState unpack(const State7& x) {
  bvp::Vector y(kEntryDimension);
  for (int i = 0; i < kEntryDimension; ++i) y(i) = x[static_cast<std::size_t>(i)];
  return from_scaled(y);
}

double cos_bank_of(const utm::AugmentedState& p, const EntryScenario& scenario) {
  const double h1 = utm::switching_function(p.state, p.costate, scenario.vehicle, scenario.planet);
  return scenario.params.coeffs.c0 + scenario.params.coeffs.c1 * utm::optimal_sin_control(h1, scenario.params);
}

// Physical-time rates of the scaled state triple under an imposed bank.
void state_rates(const State3& x, double cos_bank, const EntryScenario& scenario, State3& dx) {
  const entry::EntryState s{x[0] * kScaling.length, x[1] * kScaling.speed, x[2]};
  if (!(s.velocity > 0.0) || !(s.altitude > -scenario.planet.scale_height)) {
    throw bvp::EvaluationRejected("state left the admissible region");
  }
  const auto r = entry::state_derivatives(s, cos_bank, scenario.vehicle, scenario.planet);
  dx[0] = r.altitude / kScaling.length;
  dx[1] = r.velocity / kScaling.speed;
  dx[2] = r.flight_path_angle;
}

// Integrates from t0 until the velocity reaches vf and returns the altitude
// there (m); the crossing is located on the dense output.
template <typename System>
double altitude_at_velocity(System sys, State3 x, double t0, double vf, double t_max, double rel_tol) {
  auto stepper = odeint::make_dense_output(1e-12, rel_tol, odeint::runge_kutta_dopri5<State3>());
  stepper.initialize(x, t0, 0.1);
  const double target = vf / kScaling.speed;
  if (x[1] <= target) return x[0] * kScaling.length;
  while (stepper.current_time() < t_max) {
    stepper.do_step(sys);
    if (stepper.current_state()[1] <= target) {
      double lo = stepper.previous_time();
      double hi = stepper.current_time();
      State3 mid{};
      for (int i = 0; i < 100 && hi - lo > 1e-12; ++i) {
        const double t = 0.5 * (lo + hi);
        stepper.calc_state(t, mid);
        (mid[1] > target ? lo : hi) = t;
      }
      stepper.calc_state(hi, mid);
      return mid[0] * kScaling.length;
    }
  }
  throw ReintegrationDivergence("final velocity not reached within the time limit");
}

} // namespace

Reintegration reintegrate(const bvp::BVPSolution& solution, const EntryScenario& scenario,
                          const ReintegrationOptions& options) {
  const double tf = checked_final_time(solution);
  if (options.samples < 2) throw std::invalid_argument("at least 2 samples required");

  auto system = [&](const State7& x, State7& dx, double) {
    const auto p = unpack(x);
    const auto r = physical_rates(p, scenario);
    const auto& c = kScaling;
    dx[0] = r[0] / c.length;
    dx[1] = r[1] / c.speed;
    dx[2] = r[2];
    dx[3] = r[3];
    dx[4] = r[4] * c.speed / c.length;
    dx[5] = r[5] / c.length;
    dx[6] = downrange_rate(p.state, scenario, options.downrange) / c.length;
  };

  State7 x{};
  for (int i = 0; i < kEntryDimension; ++i) x[static_cast<std::size_t>(i)] = solution.mesh.values(i, 0);

  std::vector<double> times(options.samples);
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = tf * static_cast<double>(k) / (times.size() - 1);
  times.back() = tf;

  Reintegration out;
  out.points.reserve(times.size());
  auto observer = [&](const State7& s, double t) {
    out.points.push_back(describe_point(t, unpack(s), s[6] * kScaling.length, scenario));
  };
  try {
    auto stepper = odeint::make_dense_output(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State7>());
    odeint::integrate_times(stepper, system, x, times.begin(), times.end(), tf * 1e-4, observer);
  } catch (const bvp::EvaluationRejected& e) {
    throw ReintegrationDivergence(std::string("re-integration left the admissible region: ") + e.what());
  }
  if (out.points.size() != times.size()) throw ReintegrationDivergence("re-integration stopped early");

  const auto last = from_scaled(solution.mesh.values.col(solution.mesh.values.cols() - 1));
  out.altitude_mismatch = std::fabs(out.points.back().state.altitude - last.state.altitude);
  out.velocity_mismatch = std::fabs(out.points.back().state.velocity - last.state.velocity);
  if (!(out.altitude_mismatch <= options.altitude_tol) || !(out.velocity_mismatch <= options.velocity_tol)) {
    throw ReintegrationDivergence("re-integration divergence: terminal mismatch " +
                                  std::to_string(out.altitude_mismatch) + " m, " +
                                  std::to_string(out.velocity_mismatch) + " m/s");
  }
  return out;
}

std::vector<TrajectoryPoint> sample_solution(const bvp::BVPSolution& solution, const EntryScenario& scenario,
                                             std::size_t samples) {
  const double tf = checked_final_time(solution);
  if (samples < 2) throw std::invalid_argument("at least 2 samples required");
  std::vector<TrajectoryPoint> out;
  out.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double tau = k + 1 == samples ? 1.0 : static_cast<double>(k) / (samples - 1);
    out.push_back(describe_point(tau * tf, from_scaled(solution.evaluate(tau)), 0.0, scenario));
  }
  return out;
}

double refined_peak(const std::vector<double>& t, const std::vector<double>& y) {
  if (y.empty() || t.size() != y.size()) throw std::invalid_argument("refined_peak: bad series");
  const auto i = static_cast<std::size_t>(std::distance(y.begin(), std::max_element(y.begin(), y.end())));
  double peak = y[i];
  if (i == 0 || i + 1 == y.size()) return peak;
  // Parabola through the three points in Newton form.
  const double t0 = t[i - 1], t1 = t[i], t2 = t[i + 1];
  const double d01 = (y[i] - y[i - 1]) / (t1 - t0);
  const double d12 = (y[i + 1] - y[i]) / (t2 - t1);
  const double a = (d12 - d01) / (t2 - t0);
  if (!(a < 0.0)) return peak;
  const double tv = 0.5 * (t0 + t1) - d01 / (2.0 * a);
  if (tv < t0 || tv > t2) return peak;
  const double yv = y[i - 1] + d01 * (tv - t0) + a * (tv - t0) * (tv - t1);
  return std::max(peak, yv);
}

std::vector<double> detect_switches(const std::vector<TrajectoryPoint>& trajectory, double c0, double window,
                                    double terminal_exclusion) {
  struct Segment {
    int sign;
    double start; // crossing time that opened the segment
    double end;
  };
  std::vector<Segment> segments;
  int sign = 0;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double d = std::cos(trajectory[k].bank_angle) - c0;
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : sign);
    if (s == 0) continue;
    if (segments.empty()) {
      segments.push_back({s, trajectory.front().time, trajectory[k].time});
    } else if (s != sign) {
      // Linear interpolation of the crossing inside the sample interval.
      const double d0 = std::cos(trajectory[k - 1].bank_angle) - c0;
      const double t0 = trajectory[k - 1].time, t1 = trajectory[k].time;
      const double tc = d0 == d ? t1 : t0 + (t1 - t0) * d0 / (d0 - d);
      segments.back().end = tc;
      segments.push_back({s, tc, trajectory[k].time});
    } else {
      segments.back().end = trajectory[k].time;
    }
    sign = s;
  }
  if (segments.empty()) return {};
  segments.back().end = trajectory.back().time;

  // Absorb chatter shorter than the dwell window into the preceding arc.
  std::vector<Segment> kept;
  for (const auto& seg : segments) {
    if (!kept.empty() && (seg.end - seg.start < window || seg.sign == kept.back().sign)) {
      kept.back().end = seg.end;
    } else {
      kept.push_back(seg);
    }
  }
  // A short opening arc is not a switch either.
  if (kept.size() > 1 && kept[0].end - kept[0].start < window) {
    kept[1].start = kept[0].start;
    kept.erase(kept.begin());
  }

  const double t_end = trajectory.back().time;
  std::vector<double> out;
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if (kept[i].start <= t_end - terminal_exclusion) out.push_back(kept[i].start);
  }
  return out;
}

TrajectoryMetrics metrics(const std::vector<TrajectoryPoint>& trajectory, const EntryScenario& scenario,
                          double switch_window) {
  if (trajectory.empty()) throw std::invalid_argument("metrics: empty trajectory");
  const auto& limits = scenario.params.limits;
  std::vector<double> t, q, qdot, g;
  t.reserve(trajectory.size());
  TrajectoryMetrics m;
  for (const auto& p : trajectory) {
    t.push_back(p.time);
    q.push_back(p.constraint_fractions.dynamic_pressure * limits.q_max / 1000.0);
    qdot.push_back(p.constraint_fractions.heat_rate * limits.qdot_max);
    g.push_back(p.constraint_fractions.g_load * limits.gload_max);
    m.max_abs_hamiltonian = std::max(m.max_abs_hamiltonian, std::fabs(p.hamiltonian));
  }
  const auto& last = trajectory.back();
  m.final_altitude = last.state.altitude / 1000.0;
  m.time_of_flight = last.time - trajectory.front().time;
  m.downrange = (last.downrange - trajectory.front().downrange) / 1000.0;
  m.final_fpa = last.state.flight_path_angle * kRadToDeg;
  m.peak_q = refined_peak(t, q);
  m.peak_qdot = refined_peak(t, qdot);
  m.peak_gload = refined_peak(t, g);
  m.switch_times = detect_switches(trajectory, scenario.params.coeffs.c0, switch_window);
  return m;
}

double nonuniqueness_probe(const bvp::BVPSolution& solution, const EntryScenario& scenario, double horizon,
                           double rel_tol) {
  const double tf = checked_final_time(solution);
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  const double c0 = scenario.params.coeffs.c0;
  auto nominal_cos = [&](double t) {
    const double tau = std::clamp(t / tf, 0.0, 1.0);
    return cos_bank_of(from_scaled(solution.evaluate(tau)), scenario);
  };
  auto nominal = [&](const State3& x, State3& dx, double t) { state_rates(x, nominal_cos(t), scenario, dx); };
  auto flipped = [&](const State3& x, State3& dx, double t) {
    state_rates(x, 2.0 * c0 - nominal_cos(t), scenario, dx);
  };

  State3 x0{};
  for (int i = 0; i < 3; ++i) x0[static_cast<std::size_t>(i)] = solution.mesh.values(i, 0);
  const double vf = scenario.boundary.final_velocity;
  const double t_max = 3.0 * tf;

  try {
    const double h_nominal = altitude_at_velocity(nominal, x0, 0.0, vf, t_max, rel_tol);
    State3 x = x0;
    double t0 = 0.0;
    if (horizon > 0.0) {
      auto stepper = odeint::make_controlled(1e-12, rel_tol, odeint::runge_kutta_dopri5<State3>());
      odeint::integrate_adaptive(stepper, flipped, x, 0.0, horizon, 0.1);
      t0 = horizon;
    }
    const double h_perturbed = altitude_at_velocity(nominal, x, t0, vf, t_max, rel_tol);
    return std::fabs(h_perturbed - h_nominal);
  } catch (const bvp::EvaluationRejected& e) {
    throw ReintegrationDivergence(std::string("probe left the admissible region: ") + e.what());
  }
}

HamiltonianHistory hamiltonian_history(const bvp::BVPSolution& solution, const EntryScenario& scenario,
                                       std::size_t samples) {
  const double tf = checked_final_time(solution);
  if (samples < 2) throw std::invalid_argument("at least 2 samples required");
  HamiltonianHistory out;
  out.samples.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double tau = k + 1 == samples ? 1.0 : static_cast<double>(k) / (samples - 1);
    double h = std::numeric_limits<double>::infinity();
    try {
      h = kScaling.hamiltonian(
          utm::optimal_hamiltonian(from_scaled(solution.evaluate(tau)), scenario.params, scenario.vehicle,
                                   scenario.planet));
    } catch (const utm::ConstraintBreach&) {
    }
    out.samples.emplace_back(tau * tf, h);
    out.max_abs = std::max(out.max_abs, std::fabs(h));
  }
  return out;
}

entry::ConstraintFractions max_fractions(const std::vector<TrajectoryPoint>& trajectory) {
  entry::ConstraintFractions out{0.0, 0.0, 0.0};
  for (const auto& p : trajectory) {
    out.dynamic_pressure = std::max(out.dynamic_pressure, p.constraint_fractions.dynamic_pressure);
    out.heat_rate = std::max(out.heat_rate, p.constraint_fractions.heat_rate);
    out.g_load = std::max(out.g_load, p.constraint_fractions.g_load);
  }
  return out;
}

double longest_arc(const std::vector<TrajectoryPoint>& trajectory, double entry::ConstraintFractions::*fraction,
                   double threshold) {
  double best = 0.0;
  std::optional<double> start;
  for (const auto& p : trajectory) {
    if (p.constraint_fractions.*fraction >= threshold) {
      if (!start) start = p.time;
      best = std::max(best, p.time - *start);
    } else {
      start.reset();
    }
  }
  return best;
}

Agreement interpolant_agreement(const bvp::BVPSolution& solution, const std::vector<TrajectoryPoint>& trajectory,
                                std::size_t count) {
  const double tf = checked_final_time(solution);
  if (trajectory.size() < 2 || count < 1) throw std::invalid_argument("interpolant_agreement: too few samples");
  Agreement out;
  for (std::size_t k = 0; k <= count; ++k) {
    const auto& p = trajectory[k * (trajectory.size() - 1) / count];
    const auto c = from_scaled(solution.evaluate(std::clamp(p.time / tf, 0.0, 1.0)));
    out.altitude = std::max(out.altitude, std::fabs(p.state.altitude - c.state.altitude));
    out.velocity = std::max(out.velocity, std::fabs(p.state.velocity - c.state.velocity));
  }
  return out;
}

double max_altitude_costate_rate(const std::vector<TrajectoryPoint>& trajectory, const EntryScenario& scenario) {
  double out = 0.0;
  for (const auto& p : trajectory) {
    const auto r = physical_rates({p.state, p.costate}, scenario);
    out = std::max(out, std::fabs(r[3]));
  }
  return out;
}

} // namespace marsutm::verification
