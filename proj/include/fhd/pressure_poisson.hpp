#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fhd/meshfree_operators.hpp"
#include "fhd/point_cloud.hpp"

namespace fhd {

enum class KrylovMethod { gmres, bicgstab };

struct PoissonOptions {
  KrylovMethod method = KrylovMethod::gmres;
  double tolerance = 1e-8;  // on ||A p - b|| / ||b||
  int max_iterations = 10000;
  int restart = 60;  // GMRES basis size
  /// Follow the pressure correction by remove_discrete_divergence.
  bool enforce_divergence = true;
};

struct PoissonResult {
  std::vector<double> pressure;  // mean zero
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
};

/// Pressure operator: the least-squares Laplacian on interior rows and
/// homogeneous Neumann rows (G p . n = 0) at surface points. The normal
/// derivative at a surface point is a one-sided second-order fit over its
/// interior neighbors only. Matrix-free; `apply` and `diagonal` expose it for
/// tests and diagnostics.
class PressureOperator {
 public:
  PressureOperator(const PointCloud& cloud, const StencilSet& stencils,
                   std::span<const Vec3> surface_normals, double alpha = 6.25);

  std::size_t size() const { return n_; }
  void apply(std::span<const double> p, std::span<double> out) const;
  const std::vector<double>& diagonal() const { return diagonal_; }

 private:
  const StencilSet& stencils_;
  std::vector<std::size_t> normal_offsets_;
  std::vector<std::uint32_t> normal_indices_;
  std::vector<double> normal_coefficients_;
  std::size_t surface_count_;
  std::size_t n_;
  std::vector<double> diagonal_;
};

/// Solves A p = rhs for the pressure.
///
/// `rhs` holds one value per point; entries on surface points are ignored
/// (their Neumann rows are homogeneous). The interior right-hand side is first
/// projected to mean zero, the constant nullspace is removed with a rank-one
/// correction, and the system is solved by Jacobi-preconditioned GMRES(m) or
/// BiCGSTAB.
/// The returned pressure has mean zero. Throws SolverDiverged when the
/// tolerance is not reached within the iteration budget.
PoissonResult solve_pressure_poisson(std::span<const double> rhs, const PointCloud& cloud,
                                     const StencilSet& stencils,
                                     std::span<const Vec3> surface_normals,
                                     const PoissonOptions& options = {},
                                     std::span<const double> initial_guess = {});

struct DivergenceCleanup {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Smallest change of the interior velocities, in the Euclidean norm, that
/// makes the discrete divergence vanish at every interior point:
/// u <- u - D^T lambda with D D^T lambda = D u, solved by Jacobi-preconditioned
/// conjugate gradients to `tolerance` on ||D u|| relative to its initial
/// value. Surface velocities stay fixed. Throws SolverDiverged when the
/// iteration budget runs out.
DivergenceCleanup remove_discrete_divergence(std::span<Vec3> velocity, const PointCloud& cloud,
                                             const StencilSet& stencils, double tolerance,
                                             int max_iterations);

}  // namespace fhd
