#include "fhd/point_cloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "fhd/errors.hpp"
#include "fhd/least_squares.hpp"

namespace fhd {

std::vector<Vec3> PointCloud::positions() const {
  std::vector<Vec3> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = points[i].position;
  return out;
}

std::size_t PointCloud::add_point(FluidPoint p) {
  p.id = next_id++;
  points.push_back(p);
  return points.size() - 1;
}

namespace {

PointCloud lattice(double box_length, double dx0, const RigidSphere* sphere) {
  if (!(box_length > 0.0) || !(dx0 > 0.0))
    throw GeometryError("box length and spacing must be positive");
  const int n = std::max(1, static_cast<int>(std::lround(box_length / dx0)));

  PointCloud cloud;
  cloud.box = PeriodicBox(box_length);
  cloud.dx0 = box_length / n;
  cloud.h = 3.0 * cloud.dx0;
  if (box_length < 2.0 * cloud.h) {
    throw GeometryError("box length " + std::to_string(box_length) +
                        " is smaller than two neighborhood radii");
  }

  Vec3 center = Vec3::Zero();
  double excluded = -1.0;
  if (sphere) {
    if (!(box_length > 2.0 * sphere->radius)) {
      throw GeometryError("sphere of radius " + std::to_string(sphere->radius) +
                          " does not fit in a box of length " + std::to_string(box_length));
    }
    center = cloud.box.wrap(sphere->center);
    excluded = sphere->radius + 0.5 * cloud.dx0;
    for (std::size_t k = 0; k < sphere->surface.size(); ++k) {
      FluidPoint p;
      const Vec3 offset = sphere->centroid_offset(k);
      p.position = cloud.box.wrap(center + offset);
      p.velocity = interface_velocity(*sphere, offset);
      p.kind = PointKind::surface;
      cloud.add_point(p);
    }
    cloud.surface_count = sphere->surface.size();
  }

  cloud.points.reserve(cloud.points.size() + static_cast<std::size_t>(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Vec3 x{(i + 0.5) * cloud.dx0, (j + 0.5) * cloud.dx0, (k + 0.5) * cloud.dx0};
        if (sphere && cloud.box.distance(center, x) < excluded) continue;
        FluidPoint p;
        p.position = x;
        cloud.add_point(p);
      }
  return cloud;
}

}  // namespace

PointCloud build_cloud(double box_length, double dx0) {
  return lattice(box_length, dx0, nullptr);
}

PointCloud build_cloud(double box_length, double dx0, const RigidSphere& sphere) {
  return lattice(box_length, dx0, &sphere);
}

NeighborList find_neighbors(const PointCloud& cloud, std::size_t min_neighbors) {
  return find_neighbors(cloud, cloud.h, min_neighbors);
}

NeighborList find_neighbors(const PointCloud& cloud, double radius,
                            std::size_t min_neighbors) {
  if (cloud.points.empty()) throw GeometryError("neighbor search on an empty cloud");
  if (cloud.box.length() < 2.0 * radius)
    throw GeometryError("neighbor radius exceeds half the box length");

  const auto positions = cloud.positions();
  CellList cells(cloud.box, radius);
  cells.build(positions);

  const std::size_t n = positions.size();
  std::vector<std::vector<std::size_t>> lists(n);
#pragma omp parallel
  {
    std::vector<std::size_t> scratch;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      cells.query(positions[i], radius, scratch, i);
      lists[i] = scratch;
    }
  }

  NeighborList out;
  out.offsets.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) out.offsets[i + 1] = out.offsets[i] + lists[i].size();
  out.indices.resize(out.offsets[n]);
  out.displacements.resize(out.offsets[n]);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t at = out.offsets[i];
    for (std::size_t j : lists[i]) {
      out.indices[at] = j;
      out.displacements[at] = cloud.box.displacement(positions[i], positions[j]);
      ++at;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (lists[i].size() < min_neighbors) out.underpopulated.push_back(i);
  return out;
}

ManagementOptions ManagementOptions::defaults(const PointCloud& cloud) {
  ManagementOptions o;
  o.r_min = 0.2 * cloud.dx0;
  o.r_max = 1.5 * cloud.dx0;
  o.hole_radius = 0.6 * o.r_max;
  return o;
}

namespace {

void remove_flagged(PointCloud& cloud, const std::vector<char>& removed) {
  std::size_t at = 0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    if (!removed[i]) cloud.points[at++] = cloud.points[i];
  cloud.points.resize(at);
}

std::size_t merge_close_pairs(PointCloud& cloud, double r_min) {
  std::size_t total = 0;
  for (;;) {
    const auto positions = cloud.positions();
    CellList cells(cloud.box, std::max(r_min, cloud.dx0));
    cells.build(positions);
    const std::size_t n = positions.size();
    std::vector<char> removed(n, 0), touched(n, 0);
    std::vector<std::size_t> close;
    std::size_t merged = 0;
    for (std::size_t i = cloud.surface_count; i < n; ++i) {
      if (removed[i] || touched[i]) continue;
      cells.query(positions[i], r_min, close, i);
      for (std::size_t j : close) {
        if (removed[j] || touched[j]) continue;
        if (cloud.box.distance(positions[i], positions[j]) >= r_min) continue;
        if (cloud.points[j].kind == PointKind::surface) {
          removed[i] = 1;
        } else {
          auto& a = cloud.points[i];
          const auto& b = cloud.points[j];
          a.position = cloud.box.wrap(a.position +
                                      0.5 * cloud.box.displacement(a.position, b.position));
          a.velocity = 0.5 * (a.velocity + b.velocity);
          a.pressure = 0.5 * (a.pressure + b.pressure);
          touched[i] = 1;
          removed[j] = 1;
        }
        ++merged;
        break;
      }
    }
    if (merged == 0) break;
    remove_flagged(cloud, removed);
    total += merged;
  }
  return total;
}

// 0..5 for +x, -x, +y, -y, +z, -z; -1 when the displacement sits on a
// pyramid boundary.
int pyramid_of(const Vec3& d) {
  const Vec3 a = d.cwiseAbs();
  int axis = 0;
  if (a.y() > a[axis]) axis = 1;
  if (a.z() > a[axis]) axis = 2;
  for (int k = 0; k < 3; ++k)
    if (k != axis && a[k] >= a[axis]) return -1;
  return 2 * axis + (d[axis] < 0.0 ? 1 : 0);
}

Vec3 axis_direction(int pyramid) {
  Vec3 e = Vec3::Zero();
  e[pyramid / 2] = (pyramid % 2 == 0) ? 1.0 : -1.0;
  return e;
}

class HoleFiller {
 public:
  HoleFiller(PointCloud& cloud, const ManagementOptions& options, ManagementReport& report)
      : cloud_(cloud), options_(options), report_(report), cells_(cloud.box, options.r_max) {
    cells_.build(cloud.positions());
  }

  bool try_insert(const Vec3& raw, double clearance) {
    const Vec3 c = cloud_.box.wrap(raw);
    if (options_.exclusion &&
        cloud_.box.distance(options_.exclusion->center, c) < options_.exclusion->radius)
      return false;
    if (cells_.nearest(c, clearance) < clearance) return false;

    FluidPoint p;
    p.position = c;
    interpolate(p);
    const std::size_t index = cloud_.add_point(p);
    cells_.insert(index, c);
    ++report_.inserted;
    return true;
  }

  const CellList& cells() const { return cells_; }

 private:
  void interpolate(FluidPoint& p) {
    cells_.query(p.position, cloud_.h, scratch_);
    std::vector<Vec3> d;
    std::vector<double> w;
    d.reserve(scratch_.size());
    w.reserve(scratch_.size());
    for (std::size_t j : scratch_) {
      d.push_back(cloud_.box.displacement(p.position, cloud_.points[j].position));
      w.push_back(weight(d.back(), cloud_.h, options_.alpha));
    }
    try {
      const Eigen::MatrixXd c =
          taylor_fit(d, w, cloud_.h, 2, /*with_value=*/true, 1e8);
      p.velocity.setZero();
      p.pressure = 0.0;
      for (std::size_t k = 0; k < scratch_.size(); ++k) {
        const auto& q = cloud_.points[scratch_[k]];
        p.velocity += c(0, static_cast<Eigen::Index>(k)) * q.velocity;
        p.pressure += c(0, static_cast<Eigen::Index>(k)) * q.pressure;
      }
    } catch (const StencilIllConditioned&) {
      ++report_.interpolation_fallbacks;
      std::size_t nearest = 0;
      if (std::isfinite(cells_.nearest(p.position, cloud_.h, &nearest))) {
        p.velocity = cloud_.points[nearest].velocity;
        p.pressure = cloud_.points[nearest].pressure;
      }
    }
  }

  PointCloud& cloud_;
  const ManagementOptions& options_;
  ManagementReport& report_;
  CellList cells_;
  std::vector<std::size_t> scratch_;
};

}  // namespace

ManagementReport manage_particles(PointCloud& cloud, const ManagementOptions& options) {
  if (!(options.r_min > 0.0) || !(options.r_max > options.r_min) ||
      !(options.hole_radius >= options.r_min))
    throw GeometryError("particle management needs 0 < r_min <= hole_radius, r_min < r_max");

  ManagementReport report;
  report.merged = merge_close_pairs(cloud, options.r_min);

  HoleFiller filler(cloud, options, report);
  std::vector<std::size_t> near;
  constexpr int kMaxPasses = 10;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const std::size_t before = report.inserted;
    const std::size_t n = cloud.points.size();
    for (std::size_t i = cloud.surface_count; i < n; ++i) {
      const Vec3 x = cloud.points[i].position;
      filler.cells().query(x, options.r_max, near, i);
      double nearest = std::numeric_limits<double>::infinity();
      std::array<bool, 6> occupied{};
      for (std::size_t j : near) {
        const Vec3 d = cloud.box.displacement(x, cloud.points[j].position);
        nearest = std::min(nearest, d.norm());
        if (const int p = pyramid_of(d); p >= 0) occupied[p] = true;
      }
      if (nearest > options.r_max) {
        // isolated: any axial point at distance dx0 keeps clear of r_min
        for (int p = 0; p < 6; ++p)
          if (filler.try_insert(x + cloud.dx0 * axis_direction(p), options.r_min)) break;
        continue;
      }
      for (int p = 0; p < 6; ++p)
        if (!occupied[p]) filler.try_insert(x + cloud.dx0 * axis_direction(p), options.hole_radius);
    }
    if (report.inserted == before) break;
  }
  return report;
}

std::size_t repair_penetration(PointCloud& cloud, const Vec3& center, double radius) {
  const Vec3 c = cloud.box.wrap(center);
  const double shell = radius + 0.5 * cloud.dx0;
  std::size_t moved = 0;
  for (std::size_t i = cloud.surface_count; i < cloud.points.size(); ++i) {
    auto& p = cloud.points[i];
    if (p.kind != PointKind::interior) continue;
    const Vec3 r = cloud.box.displacement(c, p.position);
    const double dist = r.norm();
    if (dist >= radius) continue;
    const Vec3 dir = dist > 0.0 ? Vec3(r / dist) : Vec3::UnitX();
    p.position = cloud.box.wrap(c + shell * dir);
    ++moved;
  }
  return moved;
}

}  // namespace fhd
