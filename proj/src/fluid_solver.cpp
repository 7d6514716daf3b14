#include "fhd/fluid_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fhd/errors.hpp"
#include "fhd/rigid_body.hpp"

namespace fhd {

CflBound cfl_timestep(double h, double u_max, double nu) {
  if (!(h > 0.0) || !(nu > 0.0)) throw Error("CFL bound needs h > 0 and nu > 0");
  CflBound b;
  b.advective = u_max > 0.0 ? 0.16 * h / (3.0 * u_max)
                            : std::numeric_limits<double>::infinity();
  b.viscous = 0.11 * h * h / (9.0 * nu);
  b.dt = std::min(b.advective, b.viscous);
  return b;
}

double thermal_speed(const FluidParameters& params, double cell_volume) {
  return std::sqrt(params.kT / (params.density * cell_volume));
}

FluidState make_fluid_state(double box_length, double dx0, const FluidParameters& params,
                            const RigidSphere* body) {
  FluidState s;
  s.cloud = body ? build_cloud(box_length, dx0, *body) : build_cloud(box_length, dx0);
  s.params = params;
  s.fluid_volume = s.cloud.box.volume();
  if (body) s.fluid_volume -= 4.0 / 3.0 * std::numbers::pi * std::pow(body->radius, 3);
  s.cell_volume = update_cell_volume(s.fluid_volume, s.cloud.size());
  return s;
}

std::size_t advect(PointCloud& cloud, double dt, const RigidSphere* body) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = cloud.surface_count; i < cloud.size(); ++i) {
    auto& p = cloud.points[i];
    p.position = cloud.box.wrap(p.position + dt * p.velocity);
  }
  return body ? repair_penetration(cloud, body->center, body->radius) : 0;
}

void place_surface_points(PointCloud& cloud, const RigidSphere& body) {
  const Vec3 center = cloud.box.wrap(body.center);
  for (std::size_t k = 0; k < cloud.surface_count; ++k) {
    const Vec3 offset = body.centroid_offset(k);
    cloud.points[k].position = cloud.box.wrap(center + offset);
    cloud.points[k].velocity = interface_velocity(body, offset);
  }
}

namespace {

std::vector<Vec3> velocities(const PointCloud& cloud) {
  std::vector<Vec3> u(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) u[i] = cloud.points[i].velocity;
  return u;
}

}  // namespace

std::vector<Vec3> predict(const PointCloud& cloud, const StencilSet& stencils,
                          const StochasticStressField& noise, const FluidParameters& params,
                          double dt) {
  const auto u = velocities(cloud);
  const auto lap = laplacian(u, stencils);
  std::vector<Vec3> div_s(cloud.size(), Vec3::Zero());
  if (noise.tensors.size() == cloud.size() && params.kT > 0.0)
    div_s = divergence(noise.tensors, stencils);

  std::vector<Vec3> u_star(u);
  const double scale = dt / params.density;
#pragma omp parallel for schedule(static)
  for (std::size_t i = cloud.surface_count; i < cloud.size(); ++i)
    u_star[i] = u[i] + scale * (params.viscosity * lap[i] + div_s[i]);
  return u_star;
}

double max_interior_divergence(std::span<const Vec3> u, const PointCloud& cloud,
                               const StencilSet& stencils) {
  const auto div = divergence(u, stencils);
  double m = 0.0;
  for (std::size_t i = cloud.surface_count; i < div.size(); ++i) m = std::max(m, std::abs(div[i]));
  return m;
}

Projection project(std::span<const Vec3> u_star, const PointCloud& cloud,
                   const StencilSet& stencils, std::span<const Vec3> surface_normals,
                   const FluidParameters& params, double dt, const PoissonOptions& options,
                   std::span<const double> pressure_guess) {
  auto rhs = divergence(u_star, stencils);
  const double scale = params.density / dt;
  for (double& r : rhs) r *= scale;

  auto solved = solve_pressure_poisson(rhs, cloud, stencils, surface_normals, options,
                                       pressure_guess);
  Projection out;
  out.pressure = std::move(solved.pressure);
  out.iterations = solved.iterations;
  out.residual = solved.relative_residual;
  out.velocity.assign(u_star.begin(), u_star.end());
  const double back = dt / params.density;
#pragma omp parallel for schedule(static)
  for (std::size_t i = cloud.surface_count; i < cloud.size(); ++i)
    out.velocity[i] -= back * stencils.gradient_at(i, out.pressure);
  if (options.enforce_divergence)
    out.cleanup_iterations = remove_discrete_divergence(out.velocity, cloud, stencils,
                                                        options.tolerance,
                                                        options.max_iterations)
                                 .iterations;
  return out;
}

double kinetic_energy(const PointCloud& cloud, double density, double cell_volume) {
  std::vector<double> e(cloud.size(), 0.0);
  for (std::size_t i = cloud.surface_count; i < cloud.size(); ++i)
    e[i] = 0.5 * density * cell_volume * cloud.points[i].velocity.squaredNorm();
  return deterministic_sum(e);
}

Vec3 total_momentum(const PointCloud& cloud, double density, double cell_volume) {
  Vec3 m;
  std::vector<double> c(cloud.size(), 0.0);
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = cloud.surface_count; i < cloud.size(); ++i)
      c[i] = density * cell_volume * cloud.points[i].velocity[k];
    m[k] = deterministic_sum(c);
  }
  return m;
}

StepReport step(FluidState& state, RigidSphere* body, const NoiseStream& noise,
                const SolverOptions& options) {
  FluidState next = state;
  std::optional<RigidSphere> moved;
  if (body) moved = *body;
  const RigidSphere* geometry = moved ? &*moved : nullptr;
  auto& cloud = next.cloud;
  const double dt = next.dt;

  StepReport report;
  report.step = state.step + 1;

  // speeds at the start of the step set the advection distance
  for (const auto& p : cloud.points) report.max_speed = std::max(report.max_speed, p.velocity.norm());
  const CflBound bound = cfl_timestep(cloud.h, report.max_speed, next.params.kinematic_viscosity());
  if (bound.advective * options.cfl_margin < dt) {
    throw StabilityError("advective CFL bound " + std::to_string(bound.advective) +
                         " violated by dt " + std::to_string(dt) + " at step " +
                         std::to_string(report.step));
  }

  report.repaired = advect(cloud, dt, geometry);
  if (options.manage_particles) {
    auto mo = ManagementOptions::defaults(cloud);
    mo.r_min = options.r_min_factor * cloud.dx0;
    mo.r_max = options.r_max_factor * cloud.dx0;
    mo.hole_radius = options.hole_factor * mo.r_max;
    mo.alpha = options.alpha;
    if (geometry)
      mo.exclusion = Exclusion{cloud.box.wrap(geometry->center),
                               geometry->radius + 0.5 * cloud.dx0};
    const auto managed = manage_particles(cloud, mo);
    report.merged = managed.merged;
    report.inserted = managed.inserted;
  }
  next.cell_volume = update_cell_volume(next.fluid_volume, cloud.size());

  const auto neighbors = find_neighbors(cloud, options.stencil.min_neighbors);
  StencilOptions so = options.stencil;
  so.alpha = options.alpha;
  const auto stencils = build_stencils(cloud, neighbors, so);
  report.enlarged_stencils = stencils.enlarged().size();

  StressParameters sp{next.params.kT, next.params.viscosity, next.cell_volume, dt};
  const auto noise_now = sample_stress_field(sp, noise, state.step, cloud);
  const auto u_star = predict(cloud, stencils, noise_now, next.params, dt);
  report.max_divergence_before = max_interior_divergence(u_star, cloud, stencils);

  std::vector<Vec3> normals(cloud.surface_count);
  for (std::size_t k = 0; k < normals.size(); ++k) normals[k] = geometry->normal(k);

  std::vector<double> guess(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) guess[i] = cloud.points[i].pressure;
  auto projected = project(u_star, cloud, stencils, normals, next.params, dt, options.poisson,
                           guess);
  report.poisson_iterations = projected.iterations;
  report.poisson_residual = projected.residual;
  report.cleanup_iterations = projected.cleanup_iterations;
  report.max_divergence_after = max_interior_divergence(projected.velocity, cloud, stencils);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cloud.points[i].velocity = projected.velocity[i];
    cloud.points[i].pressure = projected.pressure[i];
  }

  if (moved) {
    const auto noise_next = sample_stress_field(sp, noise, state.step + 1, cloud);
    const auto sigma = fluid_stress(cloud, stencils, noise_next, next.params.viscosity);
    const auto tractions = surface_stress(cloud, neighbors, sigma, *moved, options.alpha);
    report.force = -hydrodynamic_force(tractions, *moved);
    report.torque = -hydrodynamic_torque(tractions, *moved);
    if (!options.body_fixed) newton_euler_step(*moved, report.force, report.torque, dt);
    place_surface_points(cloud, *moved);
  }

  next.step = state.step + 1;
  next.time = state.time + dt;
  report.time = next.time;
  report.point_count = cloud.size();
  report.cell_volume = next.cell_volume;

  state = std::move(next);
  if (body) *body = std::move(*moved);
  return report;
}

}  // namespace fhd
