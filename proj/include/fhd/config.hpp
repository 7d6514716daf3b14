#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace fhd {

enum class Units { physical, dimensionless };

struct ModelParameters {
  double density = 1.0;
  double viscosity = 1.0;
  double kT = 0.0;
  double dx = 1.0;
  double box_length = 16.0;
  double radius = 3.0;
  double solid_density = 1.0;
  bool operator==(const ModelParameters&) const = default;
};

/// Fundamental scales: length dx, time rho dx^2/mu, mass rho dx^3,
/// velocity mu/(rho dx), pressure mu^2/(rho dx^2).
struct Scales {
  double length = 1.0;
  double time = 1.0;
  double mass = 1.0;
  double velocity = 1.0;
  double pressure = 1.0;
  double energy = 1.0;  // mass velocity^2 = mu^2 dx / rho
  static Scales from(const ModelParameters& physical);
};

/// Parameters in solver units (rho = mu = dx = 1 after scaling).
ModelParameters nondimensionalize(const ModelParameters& physical);
ModelParameters redimensionalize(const ModelParameters& dimensionless, const Scales& scales);

struct SimulationConfig {
  Units units = Units::dimensionless;
  ModelParameters parameters;
  bool with_body = true;
  int subdivision_level = 3;

  std::uint64_t steps = 100;
  std::uint64_t seed = 1;
  std::optional<double> dt;     // solver units; CFL choice when unset
  std::optional<double> u_max;  // solver units; 5x thermal speed when unset
  std::uint64_t checkpoint_interval = 1000;
  std::uint64_t snapshot_interval = 0;  // 0: initial and final only
  double poisson_tolerance = 1e-8;
  int poisson_max_iterations = 10000;
  bool manage_particles = true;
  bool body_fixed = false;
  bool virtual_mass_warn_only = false;

  std::string output_directory = "run";

  bool operator==(const SimulationConfig&) const = default;

  /// Model parameters the solver integrates.
  ModelParameters solver_parameters() const;
};

/// Sections [fluid] (units, rho, mu, kT, dx, box_length), [body] (enabled,
/// radius, rho_s, subdivision_level), [run] and [output]. Throws ConfigError.
SimulationConfig parse_config(const std::string& text);
SimulationConfig load_config(const std::string& path);
std::string serialize_config(const SimulationConfig& config);

}  // namespace fhd
