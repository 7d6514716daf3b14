#include "fhd/rigid_body.hpp"

#include <string>

#include "fhd/errors.hpp"
#include "fhd/least_squares.hpp"

namespace fhd {

std::vector<Mat3> fluid_stress(const PointCloud& cloud, const StencilSet& stencils,
                               const StochasticStressField& noise, double viscosity) {
  std::vector<Vec3> u(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) u[i] = cloud.points[i].velocity;
  auto sigma = velocity_gradient(u, stencils);
  const bool with_noise = noise.tensors.size() == cloud.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const Mat3 g = sigma[i];
    sigma[i] = viscosity * (g + g.transpose());
    sigma[i].diagonal().array() -= cloud.points[i].pressure;
    if (with_noise) sigma[i] += noise.tensors[i];
  }
  return sigma;
}

std::vector<Vec3> surface_stress(const PointCloud& cloud, const NeighborList& neighbors,
                                 std::span<const Mat3> stress, const RigidSphere& body,
                                 double alpha) {
  if (cloud.surface_count != body.surface.size())
    throw Error("cloud surface points do not match the body triangulation");

  std::vector<Vec3> tractions(body.surface.size());
  std::vector<std::string> failures(tractions.size());
#pragma omp parallel
  {
    std::vector<Vec3> d;
    std::vector<double> w;
    std::vector<std::size_t> idx;
#pragma omp for schedule(static)
    for (std::size_t k = 0; k < tractions.size(); ++k) {
      d.clear();
      w.clear();
      idx.clear();
      const auto nb = neighbors.neighbors(k);
      const auto disp = neighbors.displacements_of(k);
      for (std::size_t e = 0; e < nb.size(); ++e) {
        if (cloud.points[nb[e]].kind != PointKind::interior) continue;
        idx.push_back(nb[e]);
        d.push_back(disp[e]);
        w.push_back(weight(disp[e], cloud.h, alpha));
      }
      try {
        const Eigen::MatrixXd c = taylor_fit(d, w, cloud.h, 1, /*with_value=*/true, 1e8);
        Mat3 sigma = Mat3::Zero();
        for (std::size_t e = 0; e < idx.size(); ++e)
          sigma += c(0, static_cast<Eigen::Index>(e)) * stress[idx[e]];
        tractions[k] = sigma * body.normal(k);
      } catch (const StencilIllConditioned& err) {
        failures[k] = "surface stress at triangle " + std::to_string(k) + ": " + err.what();
      }
    }
  }
  for (const auto& f : failures)
    if (!f.empty()) throw StencilIllConditioned(f, std::numeric_limits<double>::infinity());
  return tractions;
}

Vec3 hydrodynamic_force(std::span<const Vec3> tractions, const RigidSphere& body) {
  Vec3 f = Vec3::Zero();
  for (std::size_t k = 0; k < tractions.size(); ++k) f -= tractions[k] * body.area(k);
  return f;
}

Vec3 hydrodynamic_torque(std::span<const Vec3> tractions, const RigidSphere& body) {
  Vec3 t = Vec3::Zero();
  for (std::size_t k = 0; k < tractions.size(); ++k)
    t -= body.centroid_offset(k).cross(tractions[k]) * body.area(k);
  return t;
}

void newton_euler_step(RigidSphere& body, const Vec3& force, const Vec3& torque, double dt) {
  body.center += dt * body.velocity;
  const double angle = body.angular_velocity.norm() * dt;
  if (angle > 0.0) {
    const Eigen::AngleAxisd turn(angle, body.angular_velocity.normalized());
    body.orientation = Eigen::Quaterniond(turn) * body.orientation;
  }
  body.orientation.normalize();
  body.velocity += (dt / body.mass) * force;
  body.angular_velocity += (dt / body.inertia) * torque;
}

}  // namespace fhd
