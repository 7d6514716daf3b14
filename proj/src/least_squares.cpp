#include "fhd/least_squares.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fhd/errors.hpp"

namespace fhd {

double weight(const Vec3& displacement, double h, double alpha) {
  const double r2 = displacement.squaredNorm() / (h * h);
  return r2 <= 1.0 ? std::exp(-alpha * r2) : 0.0;
}

Eigen::MatrixXd taylor_fit(std::span<const Vec3> displacements,
                           std::span<const double> weights, double length_scale,
                           int order, bool with_value, double max_condition) {
  const int k = taylor_unknowns(order, with_value);
  const Eigen::Index m = static_cast<Eigen::Index>(displacements.size());
  if (m < k) {
    throw StencilIllConditioned("least-squares fit needs at least " + std::to_string(k) +
                                    " neighbors, got " + std::to_string(m),
                                std::numeric_limits<double>::infinity());
  }

  const int first = with_value ? 1 : 0;
  Eigen::MatrixXd design(m, k);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vec3 d = displacements[j] / length_scale;
    if (with_value) design(j, 0) = 1.0;
    design(j, first + 0) = d.x();
    design(j, first + 1) = d.y();
    design(j, first + 2) = d.z();
    if (order == 2) {
      design(j, first + 3) = 0.5 * d.x() * d.x();
      design(j, first + 4) = d.x() * d.y();
      design(j, first + 5) = d.x() * d.z();
      design(j, first + 6) = 0.5 * d.y() * d.y();
      design(j, first + 7) = d.y() * d.z();
      design(j, first + 8) = 0.5 * d.z() * d.z();
    }
  }
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), m);

  const Eigen::MatrixXd weighted = design.transpose() * w.asDiagonal();  // k x m
  const Eigen::MatrixXd normal = weighted * design;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
  const auto& lambda = eig.eigenvalues();
  const double lo = lambda.minCoeff();
  const double hi = lambda.maxCoeff();
  const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition <= max_condition)) {
    throw StencilIllConditioned(
        "least-squares normal matrix condition number " + std::to_string(condition) +
            " exceeds " + std::to_string(max_condition),
        condition);
  }

  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd coefficients =
      v * lambda.cwiseInverse().asDiagonal() * (v.transpose() * weighted);

  // undo the length scaling: first derivatives carry 1/s, second 1/s^2
  const double inv = 1.0 / length_scale;
  coefficients.middleRows(first, 3) *= inv;
  if (order == 2) coefficients.middleRows(first + 3, 6) *= inv * inv;
  return coefficients;
}

}  // namespace fhd
