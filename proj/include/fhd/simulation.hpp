#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "fhd/config.hpp"
#include "fhd/fluid_solver.hpp"
#include "fhd/rigid_sphere.hpp"
#include "fhd/stochastic_stress.hpp"

namespace fhd {

/// Solver state of a configured run plus the step loop around fluid_solver::step.
class Simulation {
 public:
  /// Validates the configuration (virtual-mass gate, geometry), builds the
  /// cloud at rest and fixes dt from the CFL bound unless dt is given.
  explicit Simulation(SimulationConfig config, std::ostream* log = nullptr);

  const SimulationConfig& config() const { return config_; }
  const ModelParameters& parameters() const { return parameters_; }
  FluidState& state() { return state_; }
  const FluidState& state() const { return state_; }
  std::optional<RigidSphere>& body() { return body_; }
  const std::optional<RigidSphere>& body() const { return body_; }
  const CflBound& bound() const { return bound_; }
  double u_max() const { return u_max_; }
  const SolverOptions& options() const { return options_; }

  StepReport advance();

  void save_checkpoint(const std::string& path) const;
  /// Restores a checkpoint written by a run of the same configuration.
  void load_checkpoint(const std::string& path);

 private:
  SimulationConfig config_;
  ModelParameters parameters_;
  FluidState state_;
  std::optional<RigidSphere> body_;
  NoiseStream noise_;
  CflBound bound_;
  double u_max_ = 0.0;
  SolverOptions options_;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_directory;
  std::optional<std::uint64_t> checkpoint_interval;
  std::optional<std::uint64_t> steps;
};

SimulationConfig apply_overrides(SimulationConfig config, const RunOverrides& overrides);

struct RunSummary {
  std::uint64_t first_step = 0;
  std::uint64_t last_step = 0;
  double time = 0.0;
  double dt = 0.0;
  std::string output_directory;
};

/// Output directory layout:
///   config.ini        effective configuration (seed and overrides applied)
///   metadata.ini      dt, CFL bounds, scales, point counts, analysis defaults
///   trajectory.dat    body time, X, U, omega, F, T, one row per step from t = 0
///   diagnostics.dat   per-step divergence, speed, N, dV, solver counters
///   snapshots/        snapshot_<step>.dat
///   checkpoint.dat    latest checkpoint
RunSummary run(const SimulationConfig& config, std::ostream* log = nullptr);
/// Continues a run from <dir>/checkpoint.dat up to `steps` (default: the
/// configured count). Trajectory and diagnostics rows written after the
/// checkpoint are dropped first, so the result matches an uninterrupted run.
RunSummary resume(const std::string& output_directory, std::optional<std::uint64_t> steps = {},
                  std::ostream* log = nullptr);

}  // namespace fhd
