#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fhd/errors.hpp"
#include "fhd/least_squares.hpp"
#include "fhd/meshfree_operators.hpp"
#include "fhd/validation.hpp"

using namespace fhd;

namespace {

struct Setup {
  PointCloud cloud;
  NeighborList neighbors;
  StencilSet stencils;
};

Setup jittered(int n, double L, unsigned seed) {
  Setup s;
  s.cloud = jittered_cloud(n, L, 0.25, seed);
  s.neighbors = find_neighbors(s.cloud);
  s.stencils = build_stencils(s.cloud, s.neighbors);
  return s;
}

// Quadratic in the minimum-image displacement from a reference point, so the
// field is a polynomial inside every stencil of the small test region.
std::vector<double> local_field(const PointCloud& c, const Vec3& ref, const Vec3& a,
                                const Mat3& b) {
  std::vector<double> f(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec3 d = c.box.displacement(ref, c.points[i].position);
    f[i] = 1.0 + a.dot(d) + 0.5 * d.dot(b * d);
  }
  return f;
}

}  // namespace

TEST_CASE("stencil on the regular lattice") {
  const PointCloud c = build_cloud(8.0, 1.0);
  const auto nl = find_neighbors(c);
  const auto st = build_stencils(c, nl);
  CHECK(st.size() == c.size());
  CHECK(st.enlarged().empty());
  std::vector<double> f(c.size(), 4.0);
  for (std::size_t i = 0; i < c.size(); i += 37) {
    CHECK(st.gradient_at(i, f).norm() < 1e-13);
    CHECK(std::abs(st.laplacian_at(i, f)) < 1e-12);
  }
}

TEST_CASE("gradient and laplacian exact on quadratics") {
  Setup s = jittered(10, 10.0, 21);
  const Vec3 ref(5, 5, 5);
  const Vec3 a(0.3, -1.1, 2.0);
  Mat3 b;
  b << 2.0, 0.5, -0.3, 0.5, -1.0, 0.8, -0.3, 0.8, 3.0;
  const auto f = local_field(s.cloud, ref, a, b);
  const auto g = gradient(f, s.stencils);
  const auto l = laplacian(f, s.stencils);
  int checked = 0;
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    const Vec3 d = s.cloud.box.displacement(ref, s.cloud.points[i].position);
    if (d.norm() > 1.0) continue;
    ++checked;
    CHECK((g[i] - (a + b * d)).norm() < 1e-10 * a.norm());
    CHECK(l[i] == doctest::Approx(b.trace()).epsilon(1e-10));
    CHECK(s.stencils.derivative(i, d_xy, f) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(s.stencils.derivative(i, d_zz, f) == doctest::Approx(3.0).epsilon(1e-10));
  }
  CHECK(checked > 0);
}

TEST_CASE("vector and tensor operators") {
  Setup s = jittered(10, 10.0, 7);
  const Vec3 ref(5, 5, 5);
  std::vector<Vec3> u(s.cloud.size(), Vec3(1, -2, 3));
  for (double v : divergence(u, s.stencils)) CHECK(std::abs(v) < 1e-12);

  std::vector<Mat3> t(s.cloud.size(), Mat3::Zero());
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    const Vec3 d = s.cloud.box.displacement(ref, s.cloud.points[i].position);
    t[i](0, 0) = d.x();
    u[i] = Vec3(d.x() * d.y(), d.z(), d.x() * d.x());
  }
  const auto dt = divergence(t, s.stencils);
  const auto div = divergence(u, s.stencils);
  const auto gu = velocity_gradient(u, s.stencils);
  const auto lu = laplacian(u, s.stencils);
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    const Vec3 d = s.cloud.box.displacement(ref, s.cloud.points[i].position);
    if (d.norm() > 1.0) continue;
    CHECK((dt[i] - Vec3(1, 0, 0)).norm() < 1e-10);
    CHECK(div[i] == doctest::Approx(d.y()).epsilon(1e-10).scale(1.0));
    Mat3 exact;
    exact << d.y(), d.x(), 0, 0, 0, 1, 2 * d.x(), 0, 0;
    CHECK((gu[i] - exact).norm() < 1e-10);
    CHECK((lu[i] - Vec3(0, 0, 2)).norm() < 1e-10);
  }
}

TEST_CASE("too few neighbors") {
  std::vector<Vec3> d = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(-1, 0, 0)};
  std::vector<double> w(d.size(), 1.0);
  CHECK_THROWS_AS(build_stencil(d, w, 3.0), StencilIllConditioned);
}
