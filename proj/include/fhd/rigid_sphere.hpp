#pragma once

#include <array>
#include <vector>

#include <Eigen/Geometry>

#include "fhd/geometry.hpp"

namespace fhd {

/// Flat triangle of a sphere triangulation, stored in the body frame
/// (origin at the sphere center, reference orientation).
struct SurfaceTriangle {
  std::array<Vec3, 3> vertices;
  Vec3 centroid;
  Vec3 normal;  // outward unit normal of the flat face
  double area;
};

struct TriangulatedSurface {
  std::vector<SurfaceTriangle> triangles;

  std::size_t size() const { return triangles.size(); }
  double total_area() const;
  /// Volume enclosed by the flat faces.
  double enclosed_volume() const;
};

/// Icosahedron subdivided `level` times with vertices projected onto the
/// sphere of the given radius: 20 * 4^level triangles.
TriangulatedSurface triangulate_sphere(double radius, int level);

/// Rigid homogeneous sphere. `center` is the unwrapped center of mass; the
/// triangulation is kept in the body frame and mapped to world coordinates
/// through `orientation`.
struct RigidSphere {
  Vec3 center = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  double mass = 0.0;
  double inertia = 0.0;  // scalar moment, (2/5) M R^2
  double radius = 0.0;
  double density = 0.0;
  TriangulatedSurface surface;

  static RigidSphere make(const Vec3& center, double radius, double density,
                          int subdivision_level);

  /// Centroid of triangle k relative to the center, in world orientation.
  Vec3 centroid_offset(std::size_t k) const {
    return orientation * surface.triangles[k].centroid;
  }
  Vec3 normal(std::size_t k) const { return orientation * surface.triangles[k].normal; }
  double area(std::size_t k) const { return surface.triangles[k].area; }
};

/// Rigid-body velocity U + omega x r at offset r = x - X from the center.
Vec3 interface_velocity(const RigidSphere& body, const Vec3& offset);

/// Added mass of a sphere in an unbounded fluid, (2/3) pi r^3 rho_f.
double virtual_mass(double fluid_density, double radius);

/// Explicit fluid-structure coupling is stable only while the virtual mass
/// stays below the body mass, i.e. rho_f < 2 rho_s. Equality fails.
bool check_virtual_mass(double fluid_density, double solid_density);

}  // namespace fhd
