#include "fhd/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fhd/errors.hpp"
#include "fhd/snapshot.hpp"

namespace fhd {

namespace pt = boost::property_tree;

Scales Scales::from(const ModelParameters& p) {
  Scales s;
  s.length = p.dx;
  s.time = p.density * p.dx * p.dx / p.viscosity;
  s.mass = p.density * p.dx * p.dx * p.dx;
  s.velocity = p.viscosity / (p.density * p.dx);
  s.pressure = p.viscosity * p.viscosity / (p.density * p.dx * p.dx);
  s.energy = s.mass * s.velocity * s.velocity;
  return s;
}

ModelParameters nondimensionalize(const ModelParameters& p) {
  for (double v : {p.density, p.viscosity, p.dx, p.box_length, p.radius, p.solid_density})
    if (!(v > 0.0)) throw ConfigError("physical parameters must be positive");
  if (p.kT < 0.0) throw ConfigError("kT must be non-negative");
  const Scales s = Scales::from(p);
  ModelParameters d;
  d.density = p.density * s.length * s.length * s.length / s.mass;
  d.viscosity = p.viscosity * s.length * s.time / s.mass;
  d.kT = p.kT / s.energy;
  d.dx = p.dx / s.length;
  d.box_length = p.box_length / s.length;
  d.radius = p.radius / s.length;
  d.solid_density = p.solid_density * s.length * s.length * s.length / s.mass;
  return d;
}

ModelParameters redimensionalize(const ModelParameters& d, const Scales& s) {
  ModelParameters p;
  p.density = d.density * s.mass / (s.length * s.length * s.length);
  p.viscosity = d.viscosity * s.mass / (s.length * s.time);
  p.kT = d.kT * s.energy;
  p.dx = d.dx * s.length;
  p.box_length = d.box_length * s.length;
  p.radius = d.radius * s.length;
  p.solid_density = d.solid_density * s.mass / (s.length * s.length * s.length);
  return p;
}

ModelParameters SimulationConfig::solver_parameters() const {
  return units == Units::physical ? nondimensionalize(parameters) : parameters;
}

namespace {

double get_number(const pt::ptree& tree, const std::string& key, double fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    return parse_number(*v);
  } catch (const Error&) {
    throw ConfigError(key + ": expected a number, got '" + *v + "'");
  }
}

std::optional<double> get_optional_number(const pt::ptree& tree, const std::string& key) {
  if (!tree.get_optional<std::string>(key)) return std::nullopt;
  return get_number(tree, key, 0.0);
}

template <typename T>
T get_integer(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  std::istringstream s(*v);
  long long x = 0;
  if (!(s >> x) || !s.eof() || x < 0) throw ConfigError(key + ": expected a non-negative integer");
  return static_cast<T>(x);
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(key + ": expected true or false");
}

void check_known(const pt::ptree& tree) {
  static const std::map<std::string, std::set<std::string>> known = {
      {"fluid", {"units", "rho", "mu", "kT", "dx", "box_length"}},
      {"body", {"enabled", "radius", "rho_s", "subdivision_level", "fixed",
                "virtual_mass_check"}},
      {"run", {"steps", "seed", "dt", "u_max", "checkpoint_interval", "snapshot_interval",
               "poisson_tolerance", "poisson_max_iterations", "manage_particles"}},
      {"output", {"directory"}},
  };
  for (const auto& [section, entries] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : entries)
      if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
  }
}

}  // namespace

SimulationConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  check_known(tree);
  SimulationConfig c;
  const std::string units = tree.get<std::string>("fluid.units", "dimensionless");
  if (units == "physical")
    c.units = Units::physical;
  else if (units == "dimensionless")
    c.units = Units::dimensionless;
  else
    throw ConfigError("fluid.units must be 'physical' or 'dimensionless'");

  auto& p = c.parameters;
  p.density = get_number(tree, "fluid.rho", p.density);
  p.viscosity = get_number(tree, "fluid.mu", p.viscosity);
  p.kT = get_number(tree, "fluid.kT", p.kT);
  p.dx = get_number(tree, "fluid.dx", p.dx);
  p.box_length = get_number(tree, "fluid.box_length", p.box_length);
  c.with_body = get_bool(tree, "body.enabled", c.with_body);
  p.radius = get_number(tree, "body.radius", p.radius);
  p.solid_density = get_number(tree, "body.rho_s", p.solid_density);
  c.subdivision_level = get_integer<int>(tree, "body.subdivision_level", c.subdivision_level);
  c.body_fixed = get_bool(tree, "body.fixed", c.body_fixed);
  const std::string vm = tree.get<std::string>("body.virtual_mass_check", "strict");
  if (vm != "strict" && vm != "warn")
    throw ConfigError("body.virtual_mass_check must be 'strict' or 'warn'");
  c.virtual_mass_warn_only = vm == "warn";

  c.steps = get_integer<std::uint64_t>(tree, "run.steps", c.steps);
  c.seed = get_integer<std::uint64_t>(tree, "run.seed", c.seed);
  c.dt = get_optional_number(tree, "run.dt");
  c.u_max = get_optional_number(tree, "run.u_max");
  c.checkpoint_interval =
      get_integer<std::uint64_t>(tree, "run.checkpoint_interval", c.checkpoint_interval);
  c.snapshot_interval =
      get_integer<std::uint64_t>(tree, "run.snapshot_interval", c.snapshot_interval);
  c.poisson_tolerance = get_number(tree, "run.poisson_tolerance", c.poisson_tolerance);
  c.poisson_max_iterations =
      get_integer<int>(tree, "run.poisson_max_iterations", c.poisson_max_iterations);
  c.manage_particles = get_bool(tree, "run.manage_particles", c.manage_particles);
  c.output_directory = tree.get<std::string>("output.directory", c.output_directory);

  for (double v : {p.density, p.viscosity, p.dx, p.box_length})
    if (!(v > 0.0)) throw ConfigError("fluid parameters must be positive");
  if (p.kT < 0.0) throw ConfigError("fluid.kT must be non-negative");
  if (c.with_body && (!(p.radius > 0.0) || !(p.solid_density > 0.0)))
    throw ConfigError("body radius and density must be positive");
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("run.dt must be positive");
  if (c.u_max && *c.u_max < 0.0) throw ConfigError("run.u_max must be non-negative");
  if (c.subdivision_level < 0 || c.subdivision_level > 7)
    throw ConfigError("body.subdivision_level must be in [0, 7]");
  return c;
}

SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const SimulationConfig& c) {
  const auto& p = c.parameters;
  std::ostringstream o;
  o << "[fluid]\n"
    << "units = " << (c.units == Units::physical ? "physical" : "dimensionless") << '\n'
    << "rho = " << format_number(p.density) << '\n'
    << "mu = " << format_number(p.viscosity) << '\n'
    << "kT = " << format_number(p.kT) << '\n'
    << "dx = " << format_number(p.dx) << '\n'
    << "box_length = " << format_number(p.box_length) << "\n\n"
    << "[body]\n"
    << "enabled = " << (c.with_body ? "true" : "false") << '\n'
    << "radius = " << format_number(p.radius) << '\n'
    << "rho_s = " << format_number(p.solid_density) << '\n'
    << "subdivision_level = " << c.subdivision_level << '\n'
    << "fixed = " << (c.body_fixed ? "true" : "false") << '\n'
    << "virtual_mass_check = " << (c.virtual_mass_warn_only ? "warn" : "strict") << "\n\n"
    << "[run]\n"
    << "steps = " << c.steps << '\n'
    << "seed = " << c.seed << '\n';
  if (c.dt) o << "dt = " << format_number(*c.dt) << '\n';
  if (c.u_max) o << "u_max = " << format_number(*c.u_max) << '\n';
  o << "checkpoint_interval = " << c.checkpoint_interval << '\n'
    << "snapshot_interval = " << c.snapshot_interval << '\n'
    << "poisson_tolerance = " << format_number(c.poisson_tolerance) << '\n'
    << "poisson_max_iterations = " << c.poisson_max_iterations << '\n'
    << "manage_particles = " << (c.manage_particles ? "true" : "false") << "\n\n"
    << "[output]\n"
    << "directory = " << c.output_directory << '\n';
  return o.str();
}

}  // namespace fhd
