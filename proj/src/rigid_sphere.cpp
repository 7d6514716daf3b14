#include "fhd/rigid_sphere.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "fhd/errors.hpp"

namespace fhd {

double TriangulatedSurface::total_area() const {
  double a = 0.0;
  for (const auto& t : triangles) a += t.area;
  return a;
}

double TriangulatedSurface::enclosed_volume() const {
  // signed tetrahedra against the origin
  double v = 0.0;
  for (const auto& t : triangles)
    v += t.vertices[0].dot(t.vertices[1].cross(t.vertices[2])) / 6.0;
  return v;
}

namespace {

using Face = std::array<int, 3>;

int midpoint(int a, int b, std::vector<Vec3>& vertices,
             std::map<std::pair<int, int>, int>& cache) {
  const auto key = std::minmax(a, b);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  vertices.push_back((vertices[a] + vertices[b]).normalized());
  const int id = static_cast<int>(vertices.size()) - 1;
  cache.emplace(key, id);
  return id;
}

}  // namespace

TriangulatedSurface triangulate_sphere(double radius, int level) {
  if (!(radius > 0.0)) throw GeometryError("sphere radius must be positive");
  if (level < 0) throw GeometryError("subdivision level must be non-negative");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> cache;
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int a = midpoint(f[0], f[1], v, cache);
      const int b = midpoint(f[1], f[2], v, cache);
      const int c = midpoint(f[2], f[0], v, cache);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }

  TriangulatedSurface surface;
  surface.triangles.reserve(faces.size());
  for (const auto& f : faces) {
    SurfaceTriangle t;
    t.vertices = {radius * v[f[0]], radius * v[f[1]], radius * v[f[2]]};
    t.centroid = (t.vertices[0] + t.vertices[1] + t.vertices[2]) / 3.0;
    Vec3 n = (t.vertices[1] - t.vertices[0]).cross(t.vertices[2] - t.vertices[0]);
    t.area = 0.5 * n.norm();
    n.normalize();
    if (n.dot(t.centroid) < 0.0) {
      std::swap(t.vertices[1], t.vertices[2]);
      n = -n;
    }
    t.normal = n;
    surface.triangles.push_back(t);
  }
  return surface;
}

RigidSphere RigidSphere::make(const Vec3& center, double radius, double density,
                              int subdivision_level) {
  if (!(density > 0.0)) throw GeometryError("solid density must be positive");
  RigidSphere s;
  s.center = center;
  s.radius = radius;
  s.density = density;
  s.mass = density * 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  s.inertia = 0.4 * s.mass * radius * radius;
  s.surface = triangulate_sphere(radius, subdivision_level);
  return s;
}

Vec3 interface_velocity(const RigidSphere& body, const Vec3& offset) {
  return body.velocity + body.angular_velocity.cross(offset);
}

double virtual_mass(double fluid_density, double radius) {
  return 2.0 / 3.0 * std::numbers::pi * radius * radius * radius * fluid_density;
}

bool check_virtual_mass(double fluid_density, double solid_density) {
  return fluid_density < 2.0 * solid_density;
}

}  // namespace fhd
