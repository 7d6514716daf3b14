#include "fhd/validation.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "fhd/errors.hpp"
#include "fhd/fluid_solver.hpp"
#include "fhd/meshfree_operators.hpp"
#include "fhd/rigid_body.hpp"
#include "fhd/snapshot.hpp"
#include "fhd/stochastic_stress.hpp"

namespace fhd {

std::optional<Suite> parse_suite(const std::string& name) {
  if (name == "operators") return Suite::operators;
  if (name == "poisson") return Suite::poisson;
  if (name == "noise") return Suite::noise;
  if (name == "quadrature") return Suite::quadrature;
  if (name == "body") return Suite::body;
  return std::nullopt;
}

std::string suite_name(Suite s) {
  switch (s) {
    case Suite::operators: return "operators";
    case Suite::poisson: return "poisson";
    case Suite::noise: return "noise";
    case Suite::quadrature: return "quadrature";
    case Suite::body: return "body";
  }
  return "?";
}

bool ValidationReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

void print_report(std::ostream& out, const ValidationReport& r) {
  out << "suite " << r.suite << '\n';
  if (!r.table.empty()) out << r.table;
  for (const auto& c : r.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " value " << format_number(c.value)
        << " threshold " << format_number(c.threshold) << '\n';
  out << (r.passed() ? "suite passed" : "suite FAILED") << '\n';
}

PointCloud jittered_cloud(int n, double box_length, double jitter, std::uint64_t seed) {
  PointCloud c = build_cloud(box_length, box_length / n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  for (auto& p : c.points)
    for (int k = 0; k < 3; ++k) p.position[k] = c.box.wrap(p.position[k] + u(rng) * c.dx0);
  return c;
}

namespace {

ValidationCheck at_most(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold};
}
ValidationCheck at_least(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value >= threshold};
}

struct Quadratic {
  double c0;
  Vec3 g;
  Mat3 H;  // symmetric
  double at(const Vec3& x) const { return c0 + g.dot(x) + 0.5 * x.dot(H * x); }
  Vec3 grad(const Vec3& x) const { return g + H * x; }
  double second(int k) const {
    static const int a[] = {0, 0, 0, 1, 1, 2};
    static const int b[] = {0, 1, 2, 1, 2, 2};
    return H(a[k], b[k]);
  }
};

Quadratic random_quadratic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Quadratic q;
  q.c0 = u(rng);
  q.g = Vec3(u(rng), u(rng), u(rng));
  Mat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = u(rng);
  q.H = a + a.transpose();
  return q;
}

// Worst relative error of the stencil rows and Laplacian on random quadratics,
// with f_j - f_i evaluated from minimum-image displacements.
double stencil_polynomial_error(const PointCloud& cloud, const StencilSet& st, std::mt19937_64& rng) {
  const Quadratic q = random_quadratic(rng);
  double worst = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 xi = cloud.points[i].position;
    const Vec3 g = q.grad(xi);
    double exact[kDerivativeCount] = {g[0], g[1], g[2], q.H(0, 0), q.H(0, 1), q.H(0, 2),
                                      q.H(1, 1), q.H(1, 2), q.H(2, 2)};
    double approx[kDerivativeCount] = {};
    double lap = 0.0;
    for (std::size_t e = st.begin(i); e < st.end(i); ++e) {
      const Vec3 d = cloud.box.displacement(xi, cloud.points[st.neighbor(e)].position);
      const double df = q.at(xi + d) - q.at(xi);
      for (int k = 0; k < kDerivativeCount; ++k) approx[k] += st.coefficient(k, e) * df;
      lap += st.laplacian_coefficient(e) * df;
    }
    const double scale = std::max({1.0, g.cwiseAbs().maxCoeff(), q.H.cwiseAbs().maxCoeff()});
    for (int k = 0; k < kDerivativeCount; ++k)
      worst = std::max(worst, std::abs(approx[k] - exact[k]) / scale);
    worst = std::max(worst, std::abs(lap - q.H.trace()) / scale);
  }
  return worst;
}

ValidationReport operators_suite(std::uint64_t seed) {
  ValidationReport r{"operators", {}, {}};
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  const int clouds = 50;
  for (int c = 0; c < clouds; ++c) {
    PointCloud cloud;
    if (c % 5 == 4) {
      const auto body = RigidSphere::make(Vec3(5.0, 5.0, 5.0), 2.0, 1.0, 2);
      cloud = build_cloud(10.0, 1.0, body);
    } else {
      cloud = jittered_cloud(8, 8.0, 0.35, seed * 1000 + c);
    }
    const auto nl = find_neighbors(cloud);
    const auto st = build_stencils(cloud, nl);
    worst = std::max(worst, stencil_polynomial_error(cloud, st, rng));
  }
  std::ostringstream t;
  t << "clouds " << clouds << " worst_relative_error " << format_number(worst) << '\n';
  r.table = t.str();
  r.checks.push_back(at_most("quadratic exactness of all derivative rows", worst, 1e-9));
  return r;
}

}  // namespace

std::vector<ConvergenceRow> poisson_convergence(const std::vector<int>& resolutions,
                                                double jitter, std::uint64_t seed) {
  const double L = 1.0, k = 2.0 * std::numbers::pi / L;
  std::vector<ConvergenceRow> rows;
  for (int n : resolutions) {
    const auto cloud = jittered_cloud(n, L, jitter, seed + static_cast<std::uint64_t>(n));
    const auto nl = find_neighbors(cloud);
    const auto st = build_stencils(cloud, nl);
    std::vector<double> rhs(cloud.size()), exact(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& x = cloud.points[i].position;
      exact[i] = std::sin(k * x[0]) * std::sin(k * x[1]) * std::sin(k * x[2]);
      rhs[i] = -3.0 * k * k * exact[i];
    }
    PoissonOptions opt;
    opt.tolerance = 1e-11;
    opt.max_iterations = 20000;
    const auto sol = solve_pressure_poisson(rhs, cloud, st, {}, opt);
    double mean = 0.0;
    for (double e : exact) mean += e;
    mean /= static_cast<double>(exact.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
      const double d = sol.pressure[i] - (exact[i] - mean);
      sq += d * d;
    }
    ConvergenceRow row{cloud.dx0, std::sqrt(sq / static_cast<double>(exact.size())), 0.0};
    if (!rows.empty())
      row.order = std::log(rows.back().error / row.error) / std::log(rows.back().dx / row.dx);
    rows.push_back(row);
  }
  return rows;
}

double fitted_order(const std::vector<ConvergenceRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const double x = std::log(r.dx), y = std::log(r.error);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double n = static_cast<double>(rows.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

ValidationReport poisson_suite(std::uint64_t seed) {
  ValidationReport r{"poisson", {}, {}};
  const auto rows = poisson_convergence({12, 16, 24}, 0.2, seed);
  std::ostringstream t;
  t << "# dx error order\n";
  for (const auto& row : rows)
    t << format_number(row.dx) << ' ' << format_number(row.error) << ' '
      << format_number(row.order) << '\n';
  r.table = t.str();
  r.checks.push_back(at_least("observed order", fitted_order(rows), 1.7));
  return r;
}

ValidationReport noise_suite(std::uint64_t seed) {
  ValidationReport r{"noise", {}, {}};
  const StressParameters p{0.83, 1.0, 1.0, 0.035};
  const NoiseStream stream(seed);
  const std::size_t samples = 100000;
  double sum[3][3] = {}, sq[3][3] = {};
  double asym = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Mat3 m = sample_stress(p, stream, s % 7, s);
    asym = std::max(asym, (m - m.transpose()).cwiseAbs().maxCoeff());
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        sum[a][b] += m(a, b);
        sq[a][b] += m(a, b) * m(a, b);
      }
  }
  const double n = static_cast<double>(samples);
  const double base = p.kT * p.viscosity / (p.cell_volume * p.dt);
  double worst_ratio = 0.0, worst_mean = 0.0;
  std::ostringstream t;
  t << "# entry variance expected ratio mean/stderr\n";
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      const double mean = sum[a][b] / n;
      const double var = sq[a][b] / n - mean * mean;
      const double expected = a == b ? 4.0 * base : base;
      const double ratio = var / expected;
      const double z = std::abs(mean) / std::sqrt(var / n);
      worst_ratio = std::max(worst_ratio, std::abs(ratio - 1.0));
      worst_mean = std::max(worst_mean, z);
      t << "S" << a + 1 << b + 1 << ' ' << format_number(var) << ' ' << format_number(expected)
        << ' ' << format_number(ratio) << ' ' << format_number(z) << '\n';
    }
  r.table = t.str();
  r.checks.push_back(at_most("variance relative error", worst_ratio, 0.03));
  r.checks.push_back(at_most("mean in standard errors", worst_mean, 5.0));
  r.checks.push_back(at_most("max |S - S^T|", asym, 0.0));
  return r;
}

ValidationReport quadrature_suite(std::uint64_t seed) {
  ValidationReport r{"quadrature", {}, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double R = 1.0;
  Mat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = u(rng);
  const Mat3 sym = a + a.transpose();
  const Vec3 grad_p(u(rng), u(rng), u(rng));

  std::ostringstream t;
  t << "# level triangles area_error linear_force_error\n";
  double prev = 0.0, worst_ratio = 1e300, const_force = 0.0, sym_torque = 0.0;
  double area3 = 0.0, force3 = 0.0;
  for (int level = 1; level <= 4; ++level) {
    auto body = RigidSphere::make(Vec3(0.3, -0.2, 0.1), R, 1.0, level);
    const auto tc = surface_stress(body, [&](const Vec3&) { return a; });
    const_force = std::max(const_force, hydrodynamic_force(tc, body).norm());
    const auto ts = surface_stress(body, [&](const Vec3&) { return sym; });
    sym_torque = std::max(sym_torque, hydrodynamic_torque(ts, body).norm());
    const auto tp = surface_stress(body, [&](const Vec3& off) {
      return Mat3(-(grad_p.dot(off) + 2.0) * Mat3::Identity());
    });
    const Vec3 exact = 4.0 / 3.0 * std::numbers::pi * R * R * R * grad_p;
    const double err = (hydrodynamic_force(tp, body) - exact).norm() / exact.norm();
    const double area_err = std::abs(body.surface.total_area() / (4.0 * std::numbers::pi * R * R) - 1.0);
    if (level > 1) worst_ratio = std::min(worst_ratio, prev / err);
    prev = err;
    if (level == 3) area3 = area_err, force3 = err;
    t << level << ' ' << body.surface.size() << ' ' << format_number(area_err) << ' '
      << format_number(err) << '\n';
  }
  r.table = t.str();
  r.checks.push_back(at_most("constant-tensor force", const_force, 1e-12));
  r.checks.push_back(at_most("symmetric-tensor torque", sym_torque, 1e-12));
  r.checks.push_back(at_most("linear-pressure force error, level 3", force3, 0.01));
  r.checks.push_back(at_most("area error, level 3", area3, 0.005));
  r.checks.push_back(at_least("force error reduction per level", worst_ratio, 3.5));
  return r;
}

ValidationReport body_suite(std::uint64_t) {
  ValidationReport r{"body", {}, {}};
  auto flag = [](bool b) { return b ? 1.0 : 0.0; };
  r.checks.push_back(at_least("neutrally buoyant passes", flag(check_virtual_mass(1.0, 1.0)), 1.0));
  r.checks.push_back(at_most("rho_f = 2 rho_s rejected", flag(check_virtual_mass(2.0, 1.0)), 0.0));
  r.checks.push_back(at_most("rho_f = 3 rho_s rejected", flag(check_virtual_mass(3.0, 1.0)), 0.0));

  auto body = RigidSphere::make(Vec3::Zero(), 2.0, 1.0, 2);
  body.velocity = Vec3(1, 0, 0);
  body.angular_velocity = Vec3(0, 0, 1);
  const Vec3 v = interface_velocity(body, Vec3(0, 2.0, 0));
  r.checks.push_back(at_most("interface velocity U + w x r", (v - Vec3(-1.0, 0, 0)).norm(), 1e-15));

  body.angular_velocity = Vec3(0.3, -0.7, 1.1);
  double drift = 0.0;
  for (int i = 0; i < 1000; ++i) {
    newton_euler_step(body, Vec3::Zero(), Vec3::Zero(), 0.05);
    drift = std::max(drift, std::abs(body.orientation.norm() - 1.0));
  }
  r.checks.push_back(at_most("quaternion norm drift", drift, 1e-14));

  // quiescent fluid without noise: the body must stay exactly at rest
  auto sphere = RigidSphere::make(Vec3(5, 5, 5), 2.0, 1.0, 2);
  auto state = make_fluid_state(10.0, 1.0, FluidParameters{1.0, 1.0, 0.0}, &sphere);
  state.dt = cfl_timestep(state.cloud.h, 0.0, 1.0).dt;
  const NoiseStream noise(1);
  const SolverOptions opt;
  double motion = 0.0;
  for (int i = 0; i < 3; ++i) {
    step(state, &sphere, noise, opt);
    motion = std::max({motion, sphere.velocity.norm(), sphere.angular_velocity.norm(),
                       (sphere.center - Vec3(5, 5, 5)).norm()});
  }
  r.checks.push_back(at_most("body at rest without noise", motion, 0.0));
  return r;
}

}  // namespace

ValidationReport validate(Suite suite, std::uint64_t seed) {
  switch (suite) {
    case Suite::operators: return operators_suite(seed);
    case Suite::poisson: return poisson_suite(seed);
    case Suite::noise: return noise_suite(seed);
    case Suite::quadrature: return quadrature_suite(seed);
    case Suite::body: return body_suite(seed);
  }
  throw Error("unknown suite");
}

}  // namespace fhd
