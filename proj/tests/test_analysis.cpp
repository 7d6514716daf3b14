#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "fhd/analysis.hpp"
#include "fhd/errors.hpp"

using namespace fhd;

namespace {

// Ornstein-Uhlenbeck velocity: exact discretization with C(t) = c0 exp(-gamma t).
std::vector<Vec3> ou_series(std::size_t n, double gamma, double dt, double c0, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const double a = std::exp(-gamma * dt), s = std::sqrt(c0 * (1.0 - a * a));
  std::vector<Vec3> u(n);
  u[0] = std::sqrt(c0) * Vec3(g(rng), g(rng), g(rng));
  for (std::size_t i = 1; i < n; ++i) u[i] = a * u[i - 1] + s * Vec3(g(rng), g(rng), g(rng));
  return u;
}

VacfSeries power_law(double exponent, double dt, std::size_t n) {
  VacfSeries c;
  c.dt = dt;
  c.values.resize(n);
  c.values[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) c.values[k] = std::pow(c.time(k), exponent);
  return c;
}

}  // namespace

TEST_CASE("vacf of simple series") {
  std::vector<Vec3> constant(10, Vec3(1, 2, 2));
  const auto c = vacf(constant, 0.5, 4);
  REQUIRE(c.size() == 5);
  for (double v : c.values) CHECK(v == doctest::Approx(3.0));
  CHECK(c.counts[4] == 6);

  std::vector<Vec3> alt(11);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = (i % 2 ? -1.0 : 1.0) * Vec3(0, 3, 0);
  const auto a = vacf(alt, 1.0, 5);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.values[k] == doctest::Approx(k % 2 ? -3.0 : 3.0));
  CHECK_THROWS_AS(vacf(alt, 1.0, 11), Error);
}

TEST_CASE("vacf of an overdamped langevin process") {
  const double gamma = 2.0, dt = 0.02, c0 = 0.7;
  const auto u = ou_series(1000000, gamma, dt, c0, 17);
  const auto k_max = static_cast<std::size_t>(3.0 / (gamma * dt));
  const auto c = vacf(u, dt, k_max);
  for (std::size_t k = 0; k <= k_max; ++k)
    CHECK(c.values[k] == doctest::Approx(c0 * std::exp(-gamma * c.time(k))).epsilon(0.05));
}

TEST_CASE("running integral") {
  VacfSeries c;
  c.dt = 0.1;
  c.values.assign(20, 2.0);
  CHECK(diffusion_coefficient(c, 7) == doctest::Approx(2.0 * 0.1 * 6.5));
  c.values.assign(20, 0.0);
  CHECK(diffusion_coefficient(c, 20) == 0.0);
  CHECK_THROWS_AS(diffusion_coefficient(c, 21), Error);
  CHECK_THROWS_AS(diffusion_coefficient(c, 0), Error);

  const double gamma = 1.5, c0 = 0.4;
  VacfSeries e;
  e.dt = 0.01;
  for (int k = 0; k < 2000; ++k) e.values.push_back(c0 * std::exp(-gamma * e.time(k)));
  CHECK(diffusion_coefficient(e, e.size()) == doctest::Approx(c0 / gamma).epsilon(0.02));
  const auto r = running_diffusion(e);
  CHECK(r.size() == e.size());
  CHECK(r.back() == diffusion_coefficient(e, e.size()));
}

TEST_CASE("stokes-einstein quantities") {
  const double kT = 0.83, R = 6.2;
  const double d0 = kT / (6.0 * std::numbers::pi * R);
  CHECK(drag_correction(kT, 1.0, 1.0, R, d0) == doctest::Approx(1.0));
  CHECK(drag_correction(kT, 1.0, 1.0, R, 4.728e-3) == doctest::Approx(1.5021).epsilon(1e-3));
  CHECK_THROWS_AS(drag_correction(kT, 1.0, 1.0, R, 0.0), Error);
  const double sc = schmidt_number(kT, 1.0, 1.0, R);
  CHECK(sc == doctest::Approx(140.8).epsilon(1e-3));
  CHECK(std::abs(sc - 140.6) / 140.6 < 0.002);
  CHECK(schmidt_number(2 * kT, 1.0, 1.0, R) == doctest::Approx(sc / 2));
  CHECK(schmidt_number(kT, 1.0, 2.0, R) == doctest::Approx(4 * sc));
  CHECK(viscous_time(1.0, 1.0, 3.1) == doctest::Approx(9.61));
}

TEST_CASE("tail exponent") {
  CHECK(tail_exponent(power_law(-1.5, 0.1, 500), 2.0, 40.0) == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(tail_exponent(power_law(-1.0, 0.1, 500), 2.0, 40.0) == doctest::Approx(-1.0).epsilon(1e-12));
  auto bad = power_law(-1.5, 0.1, 500);
  bad.values[100] = -1e-4;
  CHECK_THROWS_AS(tail_exponent(bad, 2.0, 40.0), Error);
  CHECK_THROWS_AS(tail_exponent(bad, 2.0, 2.05), Error);
}

TEST_CASE("ensemble average") {
  VacfSeries a, b;
  a.dt = b.dt = 0.5;
  a.values = {1.0, 0.5};
  b.values = {3.0, 0.5};
  const std::vector<VacfSeries> both = {a, b};
  const auto m = ensemble_vacf(both);
  CHECK(m.values[0] == 2.0);
  CHECK(m.values[1] == 0.5);
  CHECK(m.standard_error[0] == doctest::Approx(1.0));
  CHECK(m.standard_error[1] == 0.0);
  b.dt = 0.25;
  const std::vector<VacfSeries> mixed = {a, b};
  CHECK_THROWS_AS(ensemble_vacf(mixed), Error);
}

TEST_CASE("trajectory files") {
  Trajectory t(3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i].time = 0.1 * static_cast<double>(i);
    t[i].velocity = Vec3(1.0 / 3.0, -2e-17, 1e300);
    t[i].torque = Vec3(0.1, 0.2, 0.3);
  }
  std::stringstream ss;
  ss << trajectory_header() << '\n';
  for (const auto& r : t) write_trajectory_row(ss, r);
  const Trajectory back = read_trajectory(ss);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].time == t[i].time);
    CHECK(back[i].velocity == t[i].velocity);
    CHECK(back[i].torque == t[i].torque);
  }
  CHECK(trajectory_timestep(back) == doctest::Approx(0.1));
  t[2].time = 0.5;
  CHECK_THROWS_AS(trajectory_timestep(t), Error);
}

TEST_CASE("analysis of trivial and synthetic trajectories") {
  AnalysisOptions o;
  o.radius = 1.0;
  o.box_length = 4.0;
  o.discard = 0.0;

  Trajectory still(400);
  for (std::size_t i = 0; i < still.size(); ++i) still[i].time = 0.05 * static_cast<double>(i);
  const std::vector<Trajectory> one = {still};
  const auto s0 = analyze(one, o);
  CHECK(s0.diffusion == 0.0);
  CHECK_FALSE(s0.drag_correction.has_value());
  CHECK_FALSE(s0.notes.empty());

  const double gamma = 1.0, dt = 0.05, c0 = 0.5;
  std::vector<Trajectory> ens;
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const auto u = ou_series(250000, gamma, dt, c0, seed);
    Trajectory t(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      t[i].time = dt * static_cast<double>(i);
      t[i].velocity = u[i];
    }
    ens.push_back(std::move(t));
  }
  o.horizon = 12.0 / gamma;
  const auto s = analyze(ens, o);
  CHECK(s.members == 4);
  CHECK(s.diffusion == doctest::Approx(c0 / gamma).epsilon(0.02));
  CHECK(s.drag_correction.has_value());
  CHECK(s.vacf_positive);
  CHECK(s.vacf_decaying);

  ens[1][1].time = 0.07;
  CHECK_THROWS_AS(analyze(ens, o), Error);
}
