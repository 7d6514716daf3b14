#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fhd/geometry.hpp"
#include "fhd/point_cloud.hpp"

namespace fhd {

/// Taylor unknowns of a second-order stencil, in row order.
enum Derivative : int { d_x = 0, d_y, d_z, d_xx, d_xy, d_xz, d_yy, d_yz, d_zz };
inline constexpr int kDerivativeCount = 9;

using StencilRows = Eigen::Matrix<double, kDerivativeCount, Eigen::Dynamic>;

/// Weighted least-squares derivative rows for one center: row k applied to the
/// neighbor differences f_j - f_center gives derivative k. Exact for every
/// polynomial of total degree <= 2. Throws StencilIllConditioned with fewer
/// than 10 neighbors or when the scaled normal matrix has condition number
/// above `max_condition`.
StencilRows build_stencil(std::span<const Vec3> displacements, std::span<const double> weights,
                          double h, double max_condition = 1e8);

struct StencilOptions {
  double alpha = 6.25;
  double max_condition = 1e8;
  std::size_t min_neighbors = 10;
  /// Support radii (in units of h) tried, in order, when the stencil on the
  /// regular neighborhood is rejected.
  std::vector<double> enlargement = {1.25, 1.5};
};

/// Derivative stencils of every point of a cloud, stored compressed and
/// coefficient-major: coefficient k of entry e lives at rows[k][e].
class StencilSet {
 public:
  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t begin(std::size_t i) const { return offsets_[i]; }
  std::size_t end(std::size_t i) const { return offsets_[i + 1]; }
  std::uint32_t neighbor(std::size_t e) const { return indices_[e]; }
  double coefficient(int k, std::size_t e) const { return rows_[k][e]; }
  double laplacian_coefficient(std::size_t e) const { return laplacian_[e]; }

  /// Points whose stencil needed an enlarged support.
  const std::vector<std::size_t>& enlarged() const { return enlarged_; }

  double derivative(std::size_t i, int k, std::span<const double> f) const {
    double s = 0.0;
    const double fi = f[i];
    for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e)
      s += rows_[k][e] * (f[indices_[e]] - fi);
    return s;
  }
  Vec3 gradient_at(std::size_t i, std::span<const double> f) const;
  double laplacian_at(std::size_t i, std::span<const double> f) const;

 private:
  friend StencilSet build_stencils(const PointCloud&, const NeighborList&,
                                   const StencilOptions&);
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> indices_;
  std::array<std::vector<double>, kDerivativeCount> rows_;
  std::vector<double> laplacian_;
  std::vector<std::size_t> enlarged_;
};

StencilSet build_stencils(const PointCloud& cloud, const NeighborList& neighbors,
                          const StencilOptions& options = {});

std::vector<Vec3> gradient(std::span<const double> f, const StencilSet& stencils);
std::vector<double> laplacian(std::span<const double> f, const StencilSet& stencils);
std::vector<Vec3> laplacian(std::span<const Vec3> u, const StencilSet& stencils);
std::vector<double> divergence(std::span<const Vec3> u, const StencilSet& stencils);
/// Row-wise divergence: result_a = sum_b d/dx_b S_ab.
std::vector<Vec3> divergence(std::span<const Mat3> s, const StencilSet& stencils);
/// Velocity gradient with entries (Gu)_ab = d u_a / d x_b.
std::vector<Mat3> velocity_gradient(std::span<const Vec3> u, const StencilSet& stencils);

}  // namespace fhd
