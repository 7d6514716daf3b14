#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fhd/errors.hpp"
#include "fhd/fluid_solver.hpp"

using namespace fhd;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Operators {
  NeighborList neighbors;
  StencilSet stencils;
  explicit Operators(const PointCloud& c)
      : neighbors(find_neighbors(c)), stencils(build_stencils(c, neighbors)) {}
};

StochasticStressField quiet(const PointCloud& c) {
  return sample_stress_field({0.0, 1.0, 1.0, 1.0}, NoiseStream(0), 0, c);
}

}  // namespace

TEST_CASE("cfl bound") {
  const CflBound b = cfl_timestep(0.3, 1.0, 1.0);
  CHECK(b.advective == doctest::Approx(0.016));
  CHECK(b.viscous == doctest::Approx(0.0011));
  CHECK(b.dt == doctest::Approx(0.0011));
  const CflBound still = cfl_timestep(0.3, 0.0, 1.0);
  CHECK(std::isinf(still.advective));
  CHECK(still.dt == still.viscous);
  CHECK(cfl_timestep(0.6, 0.0, 1.0).dt == doctest::Approx(4.0 * still.dt));
  CHECK(thermal_speed({1.0, 1.0, 0.83}, 0.5) == doctest::Approx(std::sqrt(1.66)));
}

TEST_CASE("advection") {
  PointCloud c = build_cloud(6.0, 1.0);
  const auto x0 = c.positions();
  advect(c, 0.1, nullptr);
  CHECK(c.positions() == x0);
  for (auto& p : c.points) p.velocity = Vec3(2.0, 0, 0);
  advect(c, 0.3, nullptr);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3 d = c.box.displacement(x0[i], c.points[i].position);
    CHECK((d - Vec3(0.6, 0, 0)).norm() < 1e-12);
    CHECK(c.points[i].position.x() < 6.0);
  }
}

TEST_CASE("prediction") {
  PointCloud c = build_cloud(10.0, 1.0);
  Operators op(c);
  const FluidParameters params{1.0, 1.0, 0.0};
  for (const auto& u : predict(c, op.stencils, quiet(c), params, 0.01)) CHECK(u == Vec3::Zero());

  for (auto& p : c.points) p.velocity = Vec3(0.4, -0.2, 1.0);
  for (const auto& u : predict(c, op.stencils, quiet(c), params, 0.01))
    CHECK((u - Vec3(0.4, -0.2, 1.0)).norm() < 1e-12);

  auto heat_error = [&](double L) {
    PointCloud w = build_cloud(L, 1.0);
    Operators wop(w);
    const double k = kTwoPi / L, dt = 0.05;
    for (auto& p : w.points) p.velocity = Vec3(std::sin(k * p.position.y()), 0, 0);
    const auto us = predict(w, wop.stencils, quiet(w), params, dt);
    double e = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double u0 = w.points[i].velocity.x();
      e = std::max(e, std::abs(us[i].x() - (u0 - dt * k * k * u0)) / (dt * k * k));
      CHECK(us[i].y() == 0.0);
    }
    return e;
  };
  const double e10 = heat_error(10.0), e20 = heat_error(20.0);
  MESSAGE("relative laplacian error " << e10 << " " << e20);
  CHECK(e20 < 0.05);
  CHECK(e10 / e20 > 3.0);
}

TEST_CASE("projection") {
  PointCloud c = build_cloud(10.0, 1.0);
  for (auto& p : c.points) {
    p.position += Vec3(0.1 * std::sin(3.0 * p.position.y()), 0.1 * std::cos(p.position.z()), 0.0);
    p.position = c.box.wrap(p.position);
  }
  Operators op(c);
  const FluidParameters params{1.0, 1.0, 0.0};
  PoissonOptions po;

  std::vector<Vec3> uniform(c.size(), Vec3(1.0, 2.0, 0.5));
  const auto pu = project(uniform, c, op.stencils, {}, params, 0.1, po);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(std::abs(pu.pressure[i]) < 1e-10);
    CHECK((pu.velocity[i] - uniform[i]).norm() < 1e-10);
  }

  const double k = kTwoPi / 10.0;
  std::vector<Vec3> grad(c.size()), wave(c.size());
  double g2 = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3& x = c.points[i].position;
    grad[i] = k * Vec3(std::cos(k * x.x()) * std::sin(k * x.y()),
                       std::sin(k * x.x()) * std::cos(k * x.y()), 0.0);
    g2 += grad[i].squaredNorm();
    wave[i] = Vec3(std::sin(k * x.y()), std::sin(k * x.z()), 0.3) + grad[i];
  }
  const auto pg = project(grad, c, op.stencils, {}, params, 0.1, po);
  double r2 = 0.0;
  for (const auto& u : pg.velocity) r2 += u.squaredNorm();
  MESSAGE("remaining gradient fraction " << std::sqrt(r2 / g2));
  CHECK(std::sqrt(r2 / g2) < 0.1);

  const double before = max_interior_divergence(wave, c, op.stencils);
  const auto pw = project(wave, c, op.stencils, {}, params, 0.1, po);
  CHECK(max_interior_divergence(pw.velocity, c, op.stencils) <= std::max(1e-8, 0.05 * before));
}

TEST_CASE("quiescent state is a fixed point") {
  auto body = RigidSphere::make(Vec3(5, 5, 5), 2.0, 1.0, 2);
  FluidState s = make_fluid_state(10.0, 1.0, {1.0, 1.0, 0.0}, &body);
  s.dt = 0.03;
  const auto x0 = s.cloud.positions();
  const Vec3 c0 = body.center;
  NoiseStream noise(1);
  SolverOptions opt;
  for (int i = 0; i < 3; ++i) step(s, &body, noise, opt);
  CHECK(s.step == 3);
  CHECK(s.time == doctest::Approx(0.09));
  CHECK(s.cloud.positions() == x0);
  for (const auto& p : s.cloud.points) {
    CHECK(p.velocity == Vec3::Zero());
    CHECK(p.pressure == 0.0);
  }
  CHECK(body.center == c0);
  CHECK(body.velocity == Vec3::Zero());
}

TEST_CASE("thermal noise heats the fluid") {
  auto body = RigidSphere::make(Vec3(5, 5, 5), 2.0, 1.0, 2);
  FluidState s = make_fluid_state(10.0, 1.0, {1.0, 1.0, 0.83}, &body);
  CHECK(s.fluid_volume == doctest::Approx(1000.0 - 4.0 / 3.0 * std::numbers::pi * 8.0));
  s.dt = 0.02;
  NoiseStream noise(4);
  SolverOptions opt;
  StepReport r;
  for (int i = 0; i < 5; ++i) {
    r = step(s, &body, noise, opt);
    CHECK(r.max_divergence_after <= std::max(1e-8, 0.05 * r.max_divergence_before));
  }
  CHECK(kinetic_energy(s.cloud, 1.0, s.cell_volume) > 0.0);
  CHECK(body.velocity.norm() > 0.0);
  CHECK(r.force.norm() > 0.0);
  for (std::size_t k = 0; k < s.cloud.surface_count; ++k)
    CHECK((s.cloud.points[k].velocity - interface_velocity(body, body.centroid_offset(k))).norm() <
          1e-14);
}

TEST_CASE("failed step leaves the state untouched") {
  auto body = RigidSphere::make(Vec3(5, 5, 5), 2.0, 1.0, 1);
  FluidState s = make_fluid_state(10.0, 1.0, {1.0, 1.0, 0.0}, &body);
  s.cloud.points.back().velocity = Vec3(50.0, 0, 0);
  s.dt = 0.05;
  const FluidState before = s;
  const RigidSphere b0 = body;
  CHECK_THROWS_AS(step(s, &body, NoiseStream(1), SolverOptions{}), StabilityError);
  CHECK(s.step == before.step);
  CHECK(s.cloud.positions() == before.cloud.positions());
  CHECK(body.center == b0.center);
}
