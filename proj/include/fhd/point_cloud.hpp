#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fhd/geometry.hpp"
#include "fhd/rigid_sphere.hpp"

namespace fhd {

enum class PointKind : std::uint8_t {
  interior = 0,
  surface = 1,  // sphere-surface node; carries the rigid-body velocity
  image = 2,    // ghost copy across Γ; minimum-image stencils never create one
};

struct FluidPoint {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double pressure = 0.0;
  PointKind kind = PointKind::interior;
  std::uint64_t id = 0;  // stable identity, keys the noise stream
};

/// Moving Lagrangian discretization points in a periodic cube.
///
/// Surface points, when a sphere is present, occupy indices [0, surface_count)
/// in triangle order of the sphere triangulation; interior points follow.
struct PointCloud {
  std::vector<FluidPoint> points;
  PeriodicBox box;
  double h = 0.0;    // neighborhood radius
  double dx0 = 0.0;  // initial lattice spacing
  std::size_t surface_count = 0;
  std::uint64_t next_id = 0;

  std::size_t size() const { return points.size(); }
  std::vector<Vec3> positions() const;
  std::size_t add_point(FluidPoint p);
};

/// Points within h of each point, symmetric, with minimum-image displacements
/// x_j - x_i. Stored compressed: neighbors of i are [offsets[i], offsets[i+1]).
struct NeighborList {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> indices;
  std::vector<Vec3> displacements;
  /// Points with fewer neighbors than the requested minimum.
  std::vector<std::size_t> underpopulated;

  std::size_t size() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t count(std::size_t i) const { return offsets[i + 1] - offsets[i]; }
  std::span<const std::size_t> neighbors(std::size_t i) const {
    return {indices.data() + offsets[i], count(i)};
  }
  std::span<const Vec3> displacements_of(std::size_t i) const {
    return {displacements.data() + offsets[i], count(i)};
  }
};

/// Regular lattice of spacing close to dx0 (adjusted so that a whole number of
/// cells fits the box), with h = 3 * spacing. No sphere.
PointCloud build_cloud(double box_length, double dx0);

/// Same lattice with the sphere carved out: lattice sites closer than
/// R + dx0/2 to the center are dropped and one surface point is placed at each
/// triangle centroid, carrying the interface velocity.
PointCloud build_cloud(double box_length, double dx0, const RigidSphere& sphere);

NeighborList find_neighbors(const PointCloud& cloud, std::size_t min_neighbors = 10);

/// Same search with an explicit radius.
NeighborList find_neighbors(const PointCloud& cloud, double radius,
                            std::size_t min_neighbors);

struct Exclusion {
  Vec3 center;
  double radius;
};

struct ManagementOptions {
  double r_min = 0.0;
  double r_max = 0.0;
  /// A hole candidate is filled only if no point lies closer than this.
  double hole_radius = 0.0;
  double alpha = 6.25;
  std::optional<Exclusion> exclusion;  // region that never receives new points

  /// r_min = 0.2 dx0, r_max = 1.5 dx0, hole_radius = 0.6 r_max.
  static ManagementOptions defaults(const PointCloud& cloud);
};

struct ManagementReport {
  std::size_t merged = 0;    // points removed by merging
  std::size_t inserted = 0;  // points added in sparse regions
  std::size_t interpolation_fallbacks = 0;

  long net_change() const {
    return static_cast<long>(inserted) - static_cast<long>(merged);
  }
};

/// Merges interior pairs closer than r_min (midpoint position, averaged
/// fields), drops interior points closer than r_min to a surface point, and
/// fills sparse regions with points whose velocity and pressure come from a
/// second-order least-squares interpolation of their neighbors.
ManagementReport manage_particles(PointCloud& cloud, const ManagementOptions& options);

/// Moves interior points that ended up inside the sphere radially onto the
/// shell at distance R + dx0/2. Returns the number of points moved.
std::size_t repair_penetration(PointCloud& cloud, const Vec3& center, double radius);

}  // namespace fhd
