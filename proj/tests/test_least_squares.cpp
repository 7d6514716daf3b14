#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fhd/errors.hpp"
#include "fhd/least_squares.hpp"

using namespace fhd;

TEST_CASE("gaussian weight") {
  CHECK(weight(Vec3::Zero(), 1.0, 6.25) == 1.0);
  CHECK(weight(Vec3(1.01, 0, 0), 1.0, 6.25) == 0.0);
  CHECK(weight(Vec3(0, 2.0, 0), 2.0, 6.25) == doctest::Approx(std::exp(-6.25)));
  CHECK(weight(Vec3(0, 2.0, 0), 2.0, 6.25) == doctest::Approx(1.93e-3).epsilon(0.01));
}

namespace {

struct Fit {
  std::vector<Vec3> d;
  std::vector<double> w;
};

Fit random_fit(int n, double h, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-h, h);
  Fit f;
  while (static_cast<int>(f.d.size()) < n) {
    const Vec3 d(u(rng), u(rng), u(rng));
    if (d.norm() > h || d.norm() < 1e-3) continue;
    f.d.push_back(d);
    f.w.push_back(weight(d, h, 6.25));
  }
  return f;
}

double quad(const Vec3& x) {
  return 0.3 + 1.5 * x.x() - 2.0 * x.y() + 0.7 * x.z() + 0.5 * x.x() * x.x() -
         1.2 * x.x() * x.y() + 0.4 * x.y() * x.z() + 2.5 * x.z() * x.z() - 0.9 * x.y() * x.y();
}

}  // namespace

TEST_CASE("second-order fit recovers quadratic Taylor coefficients") {
  const Fit f = random_fit(30, 0.9, 3);
  const Eigen::MatrixXd a = taylor_fit(f.d, f.w, 0.9, 2, false, 1e10);
  REQUIRE(a.rows() == 9);
  Eigen::VectorXd b(f.d.size());
  for (std::size_t j = 0; j < f.d.size(); ++j) b(static_cast<Eigen::Index>(j)) = quad(f.d[j]) - quad(Vec3::Zero());
  const Eigen::VectorXd c = a * b;
  // f^x f^y f^z f^xx f^xy f^xz f^yy f^yz f^zz
  const double expected[9] = {1.5, -2.0, 0.7, 1.0, -1.2, 0.0, -1.8, 0.4, 5.0};
  for (int k = 0; k < 9; ++k) CHECK(c(k) == doctest::Approx(expected[k]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("fit of x gives a unit x-derivative only") {
  const Fit f = random_fit(30, 1.0, 8);
  const Eigen::MatrixXd a = taylor_fit(f.d, f.w, 1.0, 2, false, 1e10);
  Eigen::VectorXd b(f.d.size());
  for (std::size_t j = 0; j < f.d.size(); ++j) b(static_cast<Eigen::Index>(j)) = f.d[j].x();
  const Eigen::VectorXd c = a * b;
  CHECK(c(0) == doctest::Approx(1.0).epsilon(1e-10));
  for (int k = 1; k < 9; ++k) CHECK(std::abs(c(k)) < 1e-10);
}

TEST_CASE("fit with value term interpolates") {
  const Fit f = random_fit(25, 1.0, 4);
  const Eigen::MatrixXd a = taylor_fit(f.d, f.w, 1.0, 1, true, 1e10);
  REQUIRE(a.rows() == 4);
  Eigen::VectorXd b(f.d.size());
  for (std::size_t j = 0; j < f.d.size(); ++j)
    b(static_cast<Eigen::Index>(j)) = 2.0 + f.d[j].dot(Vec3(1, -1, 3));
  const Eigen::VectorXd c = a * b;
  CHECK(c(0) == doctest::Approx(2.0));
  CHECK(c(1) == doctest::Approx(1.0));
  CHECK(c(2) == doctest::Approx(-1.0));
  CHECK(c(3) == doctest::Approx(3.0));
}

TEST_CASE("planar neighborhood is rejected") {
  std::vector<Vec3> d;
  std::vector<double> w;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) {
      if (i == 0 && j == 0) continue;
      d.emplace_back(0.3 * i, 0.3 * j, 0.0);
      w.push_back(1.0);
    }
  CHECK_THROWS_AS(taylor_fit(d, w, 1.0, 2, false, 1e8), StencilIllConditioned);
}
