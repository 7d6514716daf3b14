#include <doctest.h>

#include <cmath>

#include "fhd/config.hpp"
#include "fhd/errors.hpp"

using namespace fhd;

namespace {

const char* kText = R"([fluid]
units = physical
rho = 998.2
mu = 1.002e-3
kT = 4.11e-21
dx = 2.5e-7
box_length = 6.25e-6

[body]
radius = 7.75e-7
rho_s = 1050
subdivision_level = 2
fixed = true
virtual_mass_check = warn

[run]
steps = 250
seed = 99
dt = 0.0125
checkpoint_interval = 50
snapshot_interval = 10
poisson_tolerance = 1e-9
manage_particles = false

[output]
directory = out/run_a
)";

}  // namespace

TEST_CASE("parse") {
  const auto c = parse_config(kText);
  CHECK(c.units == Units::physical);
  CHECK(c.parameters.viscosity == 1.002e-3);
  CHECK(c.parameters.radius == 7.75e-7);
  CHECK(c.subdivision_level == 2);
  CHECK(c.body_fixed);
  CHECK(c.virtual_mass_warn_only);
  CHECK(c.steps == 250);
  CHECK(c.seed == 99);
  REQUIRE(c.dt.has_value());
  CHECK(*c.dt == 0.0125);
  CHECK_FALSE(c.u_max.has_value());
  CHECK_FALSE(c.manage_particles);
  CHECK(c.output_directory == "out/run_a");
}

TEST_CASE("round trip") {
  const auto c = parse_config(kText);
  CHECK(parse_config(serialize_config(c)) == c);
  SimulationConfig d;
  d.parameters.kT = 1.0 / 3.0;
  d.u_max = 2.0 / 7.0;
  d.with_body = false;
  CHECK(parse_config(serialize_config(d)) == d);
}

TEST_CASE("rejections") {
  CHECK_THROWS_AS(parse_config("[fluid]\nviscosity = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[solver]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[fluid]\nunits = metric\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[fluid]\nrho = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[fluid]\nrho = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nsteps = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\ndt = 0\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("scales") {
  ModelParameters unit;
  CHECK(nondimensionalize(unit) == unit);
  const Scales s1 = Scales::from(unit);
  CHECK(s1.time == 1.0);
  CHECK(s1.pressure == 1.0);

  ModelParameters p;
  p.density = 2.0;
  p.dx = 0.5;
  p.viscosity = 4.0;
  CHECK(Scales::from(p).time == doctest::Approx(0.125));
  p.density = 1.0;
  p.viscosity = 2.0;
  CHECK(Scales::from(p).velocity == doctest::Approx(4.0));
}

TEST_CASE("physical to solver units and back") {
  const auto c = parse_config(kText);
  const ModelParameters d = c.solver_parameters();
  CHECK(d.density == doctest::Approx(1.0));
  CHECK(d.viscosity == doctest::Approx(1.0));
  CHECK(d.dx == doctest::Approx(1.0));
  CHECK(d.box_length == doctest::Approx(25.0));
  CHECK(d.radius == doctest::Approx(3.1));
  const ModelParameters back = redimensionalize(d, Scales::from(c.parameters));
  const auto& p = c.parameters;
  for (auto [a, b] : {std::pair{back.density, p.density}, {back.viscosity, p.viscosity},
                      {back.kT, p.kT}, {back.dx, p.dx}, {back.box_length, p.box_length},
                      {back.radius, p.radius}, {back.solid_density, p.solid_density}})
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
}
