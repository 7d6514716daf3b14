#pragma once

#include <span>

#include <Eigen/Dense>

#include "fhd/geometry.hpp"

namespace fhd {

/// Number of Taylor unknowns for a fit of the given order (1 or 2), with or
/// without the zeroth-order term.
constexpr int taylor_unknowns(int order, bool with_value) {
  return (order == 1 ? 3 : 9) + (with_value ? 1 : 0);
}

/// Gaussian weight with compact support h: exp(-alpha |d|^2 / h^2) inside the
/// support, 0 outside.
double weight(const Vec3& displacement, double h, double alpha);

/// Weighted least-squares Taylor fit around a center.
///
/// Rows of the returned matrix map neighbor data to Taylor coefficients,
/// ordered [f, f^x, f^y, f^z, f^xx, f^xy, f^xz, f^yy, f^yz, f^zz] with the
/// leading f present only when `with_value` is set. Without the value term
/// the rows act on differences f_j - f(center); with it they act on raw
/// neighbor values.
///
/// Displacements are scaled by `length_scale` before the normal equations are
/// formed, so the reported condition number is that of the scaled system. A
/// condition number above `max_condition` (or a non-positive eigenvalue)
/// throws StencilIllConditioned.
Eigen::MatrixXd taylor_fit(std::span<const Vec3> displacements,
                           std::span<const double> weights, double length_scale,
                           int order, bool with_value, double max_condition);

}  // namespace fhd
