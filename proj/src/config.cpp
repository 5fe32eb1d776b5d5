#include "marsutm/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace marsutm::config {

using nlohmann::json;
using continuation::kDegree;

namespace {

struct Unit {
  const char* name;
  double factor; // to the internal unit
};

enum class Quantity { Length, Speed, Angle, GravParam, Density, Pressure, HeatFlux, Acceleration, Mass, Area,
                      HeatConst, Load };

// First entry is the unit used when writing.
const std::vector<Unit>& units(Quantity q) {
  static const std::vector<Unit> length{{"m", 1.0}, {"km", 1.0e3}};
  static const std::vector<Unit> speed{{"m/s", 1.0}, {"km/s", 1.0e3}};
  static const std::vector<Unit> angle{{"rad", 1.0}, {"deg", kDegree}};
  static const std::vector<Unit> grav{{"m^3/s^2", 1.0}, {"km^3/s^2", 1.0e9}};
  static const std::vector<Unit> density{{"kg/m^3", 1.0}};
  static const std::vector<Unit> pressure{{"Pa", 1.0}, {"kPa", 1.0e3}};
  static const std::vector<Unit> flux{{"W/cm^2", 1.0}, {"W/m^2", 1.0e-4}};
  static const std::vector<Unit> accel{{"m/s^2", 1.0}};
  static const std::vector<Unit> mass{{"kg", 1.0}};
  static const std::vector<Unit> area{{"m^2", 1.0}};
  static const std::vector<Unit> heat{{"kg^0.5/m^2", 1.0}};
  static const std::vector<Unit> load{{"g", 1.0}};
  switch (q) {
    case Quantity::Length: return length;
    case Quantity::Speed: return speed;
    case Quantity::Angle: return angle;
    case Quantity::GravParam: return grav;
    case Quantity::Density: return density;
    case Quantity::Pressure: return pressure;
    case Quantity::HeatFlux: return flux;
    case Quantity::Acceleration: return accel;
    case Quantity::Mass: return mass;
    case Quantity::Area: return area;
    case Quantity::HeatConst: return heat;
    case Quantity::Load: return load;
  }
  return load;
}

double factor_of(Quantity q, const std::string& unit, const std::string& field) {
  for (const auto& u : units(q)) {
    if (unit == u.name) return u.factor;
  }
  std::string allowed;
  for (const auto& u : units(q)) allowed += (allowed.empty() ? "" : ", ") + std::string(u.name);
  throw ConfigError(field, "unknown unit '" + unit + "' (expected one of: " + allowed + ")");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(std::string text, const std::string& field) {
  // Accept the typographic minus sign.
  const std::string minus = "\xE2\x88\x92";
  if (text.rfind(minus, 0) == 0) text = "-" + text.substr(minus.size());
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) throw ConfigError(field, "'" + text + "' is not a number");
  return value;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ != nullptr && !node_->is_object()) throw ConfigError(path_.empty() ? "document" : path_, "must be an object");
  }

  Section child(const char* key) {
    const json* c = find(key);
    return Section(c, field(key));
  }

  void quantity(const char* key, Quantity q, const char* default_unit, double& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    const std::string f = field(key);
    if (v->is_number()) {
      out = v->get<double>() * factor_of(q, default_unit, f);
    } else if (v->is_string()) {
      const std::string text = trim(v->get<std::string>());
      const auto sp = text.find_first_of(" \t");
      if (sp == std::string::npos) {
        out = parse_number(text, f) * factor_of(q, default_unit, f);
      } else {
        out = parse_number(text.substr(0, sp), f) * factor_of(q, trim(text.substr(sp)), f);
      }
    } else {
      throw ConfigError(f, "expected a number or a \"<value> <unit>\" string");
    }
    if (!std::isfinite(out)) throw ConfigError(f, "must be finite");
  }

  void number(const char* key, double& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (v->is_number()) {
      out = v->get<double>();
    } else if (v->is_string()) {
      out = parse_number(trim(v->get<std::string>()), field(key));
    } else {
      throw ConfigError(field(key), "expected a number");
    }
    if (!std::isfinite(out)) throw ConfigError(field(key), "must be finite");
  }

  template <typename Int>
  void integer(const char* key, Int& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
    const auto raw = v->get<long long>();
    if (raw < 0) throw ConfigError(field(key), "must be non-negative");
    out = static_cast<Int>(raw);
  }

  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) throw ConfigError(field(key.c_str()), "unknown key");
    }
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    if (node_ == nullptr) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string with_unit(double v, Quantity q) { return format_number(v) + " " + units(q).front().name; }

template <typename Fn>
void wrap(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    // Model validators name the offending field first ("vehicle.mass must ...").
    const std::string msg = e.what();
    const auto sp = msg.find(' ');
    if (sp != std::string::npos && msg.compare(0, field.size() + 1, field + ".") == 0) {
      throw ConfigError(msg.substr(0, sp), msg.substr(sp + 1));
    }
    throw ConfigError(field, msg);
  }
}

} // namespace

bool ScenarioConfig::operator==(const ScenarioConfig& other) const {
  return case_id == other.case_id && targets == other.targets && steps == other.steps && solver == other.solver &&
         max_halvings == other.max_halvings;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  if (trim(text).empty()) {
    doc = json::object();
  } else {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("document", std::string("malformed JSON: ") + e.what());
    }
  }

  ScenarioConfig c;
  auto& t = c.targets;
  Section root(&doc, "");
  root.integer("case", c.case_id);

  auto planet = root.child("planet");
  planet.quantity("mean_radius", Quantity::Length, "km", t.planet.mean_radius);
  planet.quantity("grav_parameter", Quantity::GravParam, "km^3/s^2", t.planet.grav_parameter);
  planet.quantity("surface_density", Quantity::Density, "kg/m^3", t.planet.surface_density);
  planet.quantity("scale_height", Quantity::Length, "km", t.planet.scale_height);
  planet.finish();

  auto vehicle = root.child("vehicle");
  vehicle.quantity("mass", Quantity::Mass, "kg", t.vehicle.mass);
  vehicle.quantity("ref_area", Quantity::Area, "m^2", t.vehicle.ref_area);
  vehicle.number("drag_coeff", t.vehicle.drag_coeff);
  vehicle.number("lift_coeff", t.vehicle.lift_coeff);
  vehicle.quantity("nose_radius", Quantity::Length, "m", t.vehicle.nose_radius);
  vehicle.quantity("heat_rate_const", Quantity::HeatConst, "kg^0.5/m^2", t.vehicle.heat_rate_const);
  vehicle.finish();

  auto boundary = root.child("boundary");
  auto initial = boundary.child("initial");
  initial.quantity("altitude", Quantity::Length, "km", t.initial.altitude);
  initial.quantity("velocity", Quantity::Speed, "km/s", t.initial.velocity);
  initial.quantity("flight_path_angle", Quantity::Angle, "deg", t.initial.flight_path_angle);
  initial.finish();
  auto final = boundary.child("final");
  final.quantity("velocity", Quantity::Speed, "km/s", t.final_velocity);
  final.finish();
  boundary.finish();

  auto limits = root.child("limits");
  limits.quantity("q_max", Quantity::Pressure, "kPa", t.limits.q_max);
  limits.quantity("qdot_max", Quantity::HeatFlux, "W/cm^2", t.limits.qdot_max);
  limits.quantity("gload_max", Quantity::Load, "g", t.limits.gload_max);
  limits.quantity("g_ref", Quantity::Acceleration, "m/s^2", t.limits.g_ref);
  limits.finish();

  auto bank = root.child("bank");
  bank.quantity("min", Quantity::Angle, "deg", t.bank_min);
  bank.quantity("max", Quantity::Angle, "deg", t.bank_max);
  bank.finish();

  auto schedule = root.child("schedule");
  schedule.integer("boundary_steps", c.steps.boundary);
  schedule.integer("epsilon_steps", c.steps.epsilon);
  schedule.integer("limit_steps", c.steps.limits);
  schedule.quantity("eps_final", Quantity::Speed, "m/s", t.eps_final);
  schedule.integer("max_halvings", c.max_halvings);
  schedule.finish();

  auto solver = root.child("solver");
  solver.number("tolerance", c.solver.tolerance);
  solver.number("bc_tolerance", c.solver.bc_tolerance);
  solver.number("mesh_tolerance", c.solver.mesh_tolerance);
  solver.integer("max_newton_iterations", c.solver.max_newton_iterations);
  solver.integer("max_nodes", c.solver.max_nodes);
  solver.integer("max_mesh_passes", c.solver.max_mesh_passes);
  solver.number("jacobian_step", c.solver.jacobian_step);
  solver.finish();

  root.finish();
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ScenarioConfig& c) {
  const auto& t = c.targets;
  if (c.case_id != 1 && c.case_id != 2) throw ConfigError("case", "must be 1 or 2");
  wrap("planet", [&] { t.planet.validate(); });
  wrap("vehicle", [&] { t.vehicle.validate(); });
  wrap("limits", [&] { t.limits.validate(); });
  if (!(t.initial.altitude > 0.0)) throw ConfigError("boundary.initial.altitude", "must be positive");
  if (!(t.initial.velocity > 0.0)) throw ConfigError("boundary.initial.velocity", "must be positive");
  if (!(std::fabs(t.initial.flight_path_angle) < 90.0 * kDegree)) {
    throw ConfigError("boundary.initial.flight_path_angle", "must lie in (-90 deg, 90 deg)");
  }
  if (!(t.final_velocity > 0.0)) throw ConfigError("boundary.final.velocity", "must be positive");
  if (!(t.final_velocity < t.initial.velocity)) {
    throw ConfigError("boundary.final.velocity", "must be below the initial velocity");
  }
  if (!(t.bank_min >= 0.0)) throw ConfigError("bank.min", "must be >= 0 deg");
  if (!(t.bank_max <= 180.0 * kDegree)) throw ConfigError("bank.max", "must be <= 180 deg");
  if (!(t.bank_min < t.bank_max)) throw ConfigError("bank", "min must be below max");
  if (c.steps.boundary < 1) throw ConfigError("schedule.boundary_steps", "must be >= 1");
  if (c.steps.epsilon < 1) throw ConfigError("schedule.epsilon_steps", "must be >= 1");
  if (c.steps.limits < 1) throw ConfigError("schedule.limit_steps", "must be >= 1");
  if (!(t.eps_final > 0.0)) throw ConfigError("schedule.eps_final", "must be positive");
  if (c.max_halvings < 0) throw ConfigError("schedule.max_halvings", "must be >= 0");
  if (!(c.solver.tolerance > 0.0)) throw ConfigError("solver.tolerance", "must be positive");
  if (!(c.solver.bc_tolerance > 0.0)) throw ConfigError("solver.bc_tolerance", "must be positive");
  if (!(c.solver.mesh_tolerance > 0.0)) throw ConfigError("solver.mesh_tolerance", "must be positive");
  if (!(c.solver.jacobian_step > 0.0)) throw ConfigError("solver.jacobian_step", "must be positive");
  if (c.solver.max_newton_iterations < 1) throw ConfigError("solver.max_newton_iterations", "must be >= 1");
  if (c.solver.max_nodes < 3) throw ConfigError("solver.max_nodes", "must be >= 3");
  if (c.solver.max_mesh_passes < 1) throw ConfigError("solver.max_mesh_passes", "must be >= 1");
}

std::string serialize_config(const ScenarioConfig& c) {
  const auto& t = c.targets;
  json doc = json::object();
  doc["case"] = c.case_id;
  doc["planet"] = {{"mean_radius", with_unit(t.planet.mean_radius, Quantity::Length)},
                   {"grav_parameter", with_unit(t.planet.grav_parameter, Quantity::GravParam)},
                   {"surface_density", with_unit(t.planet.surface_density, Quantity::Density)},
                   {"scale_height", with_unit(t.planet.scale_height, Quantity::Length)}};
  doc["vehicle"] = {{"mass", with_unit(t.vehicle.mass, Quantity::Mass)},
                    {"ref_area", with_unit(t.vehicle.ref_area, Quantity::Area)},
                    {"drag_coeff", format_number(t.vehicle.drag_coeff)},
                    {"lift_coeff", format_number(t.vehicle.lift_coeff)},
                    {"nose_radius", with_unit(t.vehicle.nose_radius, Quantity::Length)},
                    {"heat_rate_const", with_unit(t.vehicle.heat_rate_const, Quantity::HeatConst)}};
  doc["boundary"] = {
      {"initial",
       {{"altitude", with_unit(t.initial.altitude, Quantity::Length)},
        {"velocity", with_unit(t.initial.velocity, Quantity::Speed)},
        {"flight_path_angle", with_unit(t.initial.flight_path_angle, Quantity::Angle)}}},
      {"final", {{"velocity", with_unit(t.final_velocity, Quantity::Speed)}}}};
  doc["limits"] = {{"q_max", with_unit(t.limits.q_max, Quantity::Pressure)},
                   {"qdot_max", with_unit(t.limits.qdot_max, Quantity::HeatFlux)},
                   {"gload_max", with_unit(t.limits.gload_max, Quantity::Load)},
                   {"g_ref", with_unit(t.limits.g_ref, Quantity::Acceleration)}};
  doc["bank"] = {{"min", with_unit(t.bank_min, Quantity::Angle)}, {"max", with_unit(t.bank_max, Quantity::Angle)}};
  doc["schedule"] = {{"boundary_steps", c.steps.boundary},
                     {"epsilon_steps", c.steps.epsilon},
                     {"limit_steps", c.steps.limits},
                     {"eps_final", with_unit(t.eps_final, Quantity::Speed)},
                     {"max_halvings", c.max_halvings}};
  doc["solver"] = {{"tolerance", format_number(c.solver.tolerance)},
                   {"bc_tolerance", format_number(c.solver.bc_tolerance)},
                   {"mesh_tolerance", format_number(c.solver.mesh_tolerance)},
                   {"max_newton_iterations", c.solver.max_newton_iterations},
                   {"max_nodes", c.solver.max_nodes},
                   {"max_mesh_passes", c.solver.max_mesh_passes},
                   {"jacobian_step", format_number(c.solver.jacobian_step)}};
  return doc.dump(2) + "\n";
}

continuation::Schedule make_schedule(const ScenarioConfig& c) {
  return c.case_id == 1 ? continuation::build_case1_schedule(c.steps, c.targets)
                        : continuation::build_case2_schedule(c.steps, c.targets);
}

continuation::RunOptions make_run_options(const ScenarioConfig& c) {
  continuation::RunOptions o;
  o.solver = c.solver;
  o.max_halvings = c.max_halvings;
  return o;
}

} // namespace marsutm::config
