#pragma once

#include <span>
#include <vector>

#include "fhd/meshfree_operators.hpp"
#include "fhd/point_cloud.hpp"
#include "fhd/rigid_sphere.hpp"
#include "fhd/stochastic_stress.hpp"

namespace fhd {

/// Cauchy stress -p I + mu (G u + (G u)^T) + S at every point of the cloud.
std::vector<Mat3> fluid_stress(const PointCloud& cloud, const StencilSet& stencils,
                               const StochasticStressField& noise, double viscosity);

/// Traction sigma . n at each triangle centroid of the body. The stress at a
/// centroid comes from a weighted first-order least-squares fit (value and
/// gradient) over interior fluid points within h of the centroid.
///
/// Requires the cloud layout produced by build_cloud: surface point k sits at
/// the centroid of triangle k.
std::vector<Vec3> surface_stress(const PointCloud& cloud, const NeighborList& neighbors,
                                 std::span<const Mat3> stress, const RigidSphere& body,
                                 double alpha = 6.25);

/// Tractions for a stress field given analytically at the centroids (world
/// position relative to the body center).
template <typename StressAt>
std::vector<Vec3> surface_stress(const RigidSphere& body, StressAt&& stress_at) {
  std::vector<Vec3> t(body.surface.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    t[k] = stress_at(body.centroid_offset(k)) * body.normal(k);
  return t;
}

/// F = -sum (sigma . n) ds over the triangles. With n the outward sphere
/// normal this is the load the body puts on the fluid; step() drives the body
/// with -F (and -T).
Vec3 hydrodynamic_force(std::span<const Vec3> tractions, const RigidSphere& body);

/// T = -sum (x - X) x (sigma . n) ds over the triangles.
Vec3 hydrodynamic_torque(std::span<const Vec3> tractions, const RigidSphere& body);

/// Explicit Euler for the Newton-Euler system: the center moves with the old
/// velocity, then U and omega take the force and torque. The orientation
/// quaternion is rotated by the old angular velocity and renormalized.
void newton_euler_step(RigidSphere& body, const Vec3& force, const Vec3& torque, double dt);

}  // namespace fhd
