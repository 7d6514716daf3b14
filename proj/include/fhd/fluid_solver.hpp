#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fhd/meshfree_operators.hpp"
#include "fhd/point_cloud.hpp"
#include "fhd/pressure_poisson.hpp"
#include "fhd/rigid_sphere.hpp"
#include "fhd/stochastic_stress.hpp"

namespace fhd {

struct FluidParameters {
  double density = 1.0;
  double viscosity = 1.0;  // dynamic
  double kT = 0.0;

  double kinematic_viscosity() const { return viscosity / density; }
};

struct SolverOptions {
  double alpha = 6.25;
  StencilOptions stencil;
  PoissonOptions poisson;
  bool manage_particles = true;
  double r_min_factor = 0.2;   // of dx0
  double r_max_factor = 1.5;   // of dx0
  double hole_factor = 0.6;    // of r_max
  double div_tol = 1e-8;
  /// Keeps the body in place (tests of the fluid alone with a fixed wall).
  bool body_fixed = false;
  /// The run aborts once the advective CFL bound drops below dt / margin.
  double cfl_margin = 1.1;
};

struct FluidState {
  PointCloud cloud;
  FluidParameters params;
  std::uint64_t step = 0;
  double time = 0.0;
  double dt = 0.0;
  double fluid_volume = 0.0;  // L^3 minus the sphere volume
  double cell_volume = 0.0;   // ΔV = V / N, refreshed every step
};

struct CflBound {
  double advective = 0.0;  // 0.16 h / (3 U_max); +inf for U_max = 0
  double viscous = 0.0;    // 0.11 h^2 / (9 nu)
  double dt = 0.0;         // min of the two
};

CflBound cfl_timestep(double h, double u_max, double nu);

/// sqrt(kT / (rho ΔV)): per-component velocity scale of thermal fluctuations.
double thermal_speed(const FluidParameters& params, double cell_volume);

/// State at rest on the lattice with the sphere carved out (when given).
FluidState make_fluid_state(double box_length, double dx0, const FluidParameters& params,
                            const RigidSphere* body);

/// x <- x + dt u for interior points, wrapped into the box; points that land
/// inside the body are moved back to the shell. Returns the number repaired.
std::size_t advect(PointCloud& cloud, double dt, const RigidSphere* body);

/// Moves surface points to the body's triangle centroids and gives them the
/// interface velocity.
void place_surface_points(PointCloud& cloud, const RigidSphere& body);

/// u* = u + dt/rho (mu L u + D S) at interior points; surface points keep
/// their interface velocity.
std::vector<Vec3> predict(const PointCloud& cloud, const StencilSet& stencils,
                          const StochasticStressField& noise, const FluidParameters& params,
                          double dt);

struct Projection {
  std::vector<Vec3> velocity;
  std::vector<double> pressure;
  int iterations = 0;
  double residual = 0.0;
  int cleanup_iterations = 0;
};

/// Solves A p = (rho/dt) D u* and returns u = u* - (dt/rho) G p with surface
/// points keeping their interface velocity. With options.enforce_divergence
/// the remaining discrete divergence is then removed by the minimal interior
/// velocity change (remove_discrete_divergence); p is left as solved.
Projection project(std::span<const Vec3> u_star, const PointCloud& cloud,
                   const StencilSet& stencils, std::span<const Vec3> surface_normals,
                   const FluidParameters& params, double dt, const PoissonOptions& options,
                   std::span<const double> pressure_guess = {});

/// Largest |D u| over interior points.
double max_interior_divergence(std::span<const Vec3> u, const PointCloud& cloud,
                               const StencilSet& stencils);

double kinetic_energy(const PointCloud& cloud, double density, double cell_volume);
Vec3 total_momentum(const PointCloud& cloud, double density, double cell_volume);

struct StepReport {
  std::uint64_t step = 0;
  double time = 0.0;
  double max_divergence_before = 0.0;
  double max_divergence_after = 0.0;
  double max_speed = 0.0;
  std::size_t point_count = 0;
  double cell_volume = 0.0;
  int poisson_iterations = 0;
  double poisson_residual = 0.0;
  int cleanup_iterations = 0;
  std::size_t merged = 0;
  std::size_t inserted = 0;
  std::size_t repaired = 0;
  std::size_t enlarged_stencils = 0;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

/// One coupled step: advect, manage points, rebuild neighbors and stencils,
/// sample the stress of step n, predict, project, then evaluate the surface
/// stress with the realization of step n+1, advance the body and refresh the
/// interface velocity. On any error the state and body are left untouched.
StepReport step(FluidState& state, RigidSphere* body, const NoiseStream& noise,
                const SolverOptions& options);

}  // namespace fhd
