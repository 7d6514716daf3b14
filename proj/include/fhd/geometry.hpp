#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fhd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Cubic domain [0, L)^3 with periodic images in every direction.
class PeriodicBox {
 public:
  PeriodicBox() = default;
  explicit PeriodicBox(double length);

  double length() const { return length_; }
  double volume() const { return length_ * length_ * length_; }

  /// Maps x into [0, L)^3.
  Vec3 wrap(const Vec3& x) const;
  double wrap(double x) const;

  /// Minimum-image displacement pointing from `from` to `to`.
  Vec3 displacement(const Vec3& from, const Vec3& to) const;
  double distance(const Vec3& a, const Vec3& b) const {
    return displacement(a, b).norm();
  }

 private:
  double length_ = 1.0;
};

/// Uniform cell list over a periodic box. Cell edge is at least `cell_size`.
/// Supports insertion after construction, which particle management uses while
/// it fills holes.
class CellList {
 public:
  CellList(const PeriodicBox& box, double cell_size);

  void build(std::span<const Vec3> positions);
  /// Registers a new position under index `index` (caller keeps indices dense).
  void insert(std::size_t index, const Vec3& position);

  /// Indices of all stored positions within `radius` of `x` (periodic metric),
  /// in ascending order. `exclude` is skipped.
  void query(const Vec3& x, double radius, std::vector<std::size_t>& out,
             std::size_t exclude = static_cast<std::size_t>(-1)) const;

  /// Nearest stored position to `x` other than `exclude`; returns its distance
  /// (infinity when none lies within `max_radius`).
  double nearest(const Vec3& x, double max_radius, std::size_t* index = nullptr,
                 std::size_t exclude = static_cast<std::size_t>(-1)) const;

  int cells_per_side() const { return cells_per_side_; }

 private:
  int cell_coordinate(double x) const;
  std::size_t cell_of(const Vec3& x) const;

  PeriodicBox box_;
  int cells_per_side_;
  double cell_edge_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<Vec3> positions_;
};

/// Fixed-order sum: the result depends only on the data, never on the thread
/// count. Blocks are reduced in parallel, block totals serially.
double deterministic_sum(std::span<const double> values);
double deterministic_dot(std::span<const double> a, std::span<const double> b);

}  // namespace fhd
