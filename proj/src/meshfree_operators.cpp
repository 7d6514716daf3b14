#include "fhd/meshfree_operators.hpp"

#include <memory>
#include <optional>
#include <string>

#include "fhd/errors.hpp"
#include "fhd/least_squares.hpp"

namespace fhd {

StencilRows build_stencil(std::span<const Vec3> displacements, std::span<const double> weights,
                          double h, double max_condition) {
  if (displacements.size() < 10) {
    throw StencilIllConditioned(
        "derivative stencil needs at least 10 neighbors, got " +
            std::to_string(displacements.size()),
        std::numeric_limits<double>::infinity());
  }
  return taylor_fit(displacements, weights, h, 2, /*with_value=*/false, max_condition);
}

Vec3 StencilSet::gradient_at(std::size_t i, std::span<const double> f) const {
  Vec3 g = Vec3::Zero();
  const double fi = f[i];
  for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
    const double df = f[indices_[e]] - fi;
    g.x() += rows_[d_x][e] * df;
    g.y() += rows_[d_y][e] * df;
    g.z() += rows_[d_z][e] * df;
  }
  return g;
}

double StencilSet::laplacian_at(std::size_t i, std::span<const double> f) const {
  double s = 0.0;
  const double fi = f[i];
  for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e)
    s += laplacian_[e] * (f[indices_[e]] - fi);
  return s;
}

namespace {

struct LocalStencil {
  std::vector<std::uint32_t> neighbors;
  StencilRows rows;
  bool enlarged = false;
};

}  // namespace

StencilSet build_stencils(const PointCloud& cloud, const NeighborList& neighbors,
                          const StencilOptions& options) {
  const std::size_t n = cloud.size();
  std::vector<LocalStencil> local(n);
  std::vector<std::string> failures(n);

  // Lazily built for the rare points that need an enlarged support.
  std::unique_ptr<CellList> wide;
  std::vector<Vec3> positions;
  double widest = 1.0;
  for (double f : options.enlargement) widest = std::max(widest, f);
  const double wide_radius = std::min(widest * cloud.h, 0.5 * cloud.box.length());

#pragma omp parallel
  {
    std::vector<double> w;
    std::vector<Vec3> d;
    std::vector<std::size_t> idx;
#pragma omp for schedule(dynamic, 64)
    for (std::size_t i = 0; i < n; ++i) {
      const auto disp = neighbors.displacements_of(i);
      const auto nb = neighbors.neighbors(i);
      w.resize(disp.size());
      for (std::size_t e = 0; e < disp.size(); ++e) w[e] = weight(disp[e], cloud.h, options.alpha);
      try {
        if (nb.size() < options.min_neighbors)
          throw StencilIllConditioned("too few neighbors", 0.0);
        local[i].rows = build_stencil(disp, w, cloud.h, options.max_condition);
        local[i].neighbors.assign(nb.begin(), nb.end());
      } catch (const StencilIllConditioned&) {
#pragma omp critical(fhd_wide_cells)
        {
          if (!wide) {
            positions = cloud.positions();
            wide = std::make_unique<CellList>(cloud.box, wide_radius);
            wide->build(positions);
          }
        }
        bool ok = false;
        for (double factor : options.enlargement) {
          const double radius = std::min(factor * cloud.h, 0.5 * cloud.box.length());
          wide->query(positions[i], radius, idx, i);
          if (idx.size() < options.min_neighbors) continue;
          d.resize(idx.size());
          w.resize(idx.size());
          for (std::size_t e = 0; e < idx.size(); ++e) {
            d[e] = cloud.box.displacement(positions[i], positions[idx[e]]);
            w[e] = weight(d[e], radius, options.alpha);
          }
          try {
            local[i].rows = build_stencil(d, w, cloud.h, options.max_condition);
          } catch (const StencilIllConditioned&) {
            continue;
          }
          local[i].neighbors.assign(idx.begin(), idx.end());
          local[i].enlarged = true;
          ok = true;
          break;
        }
        if (!ok) failures[i] = "no admissible stencil at point " + std::to_string(i);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!failures[i].empty())
      throw StencilIllConditioned(failures[i], std::numeric_limits<double>::infinity());

  StencilSet set;
  set.offsets_.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    set.offsets_[i + 1] = set.offsets_[i] + local[i].neighbors.size();
  const std::size_t entries = set.offsets_[n];
  set.indices_.resize(entries);
  for (auto& r : set.rows_) r.resize(entries);
  set.laplacian_.resize(entries);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = local[i];
    for (std::size_t e = 0; e < s.neighbors.size(); ++e) {
      const std::size_t at = set.offsets_[i] + e;
      set.indices_[at] = s.neighbors[e];
      for (int k = 0; k < kDerivativeCount; ++k)
        set.rows_[k][at] = s.rows(k, static_cast<Eigen::Index>(e));
      set.laplacian_[at] = set.rows_[d_xx][at] + set.rows_[d_yy][at] + set.rows_[d_zz][at];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (local[i].enlarged) set.enlarged_.push_back(i);
  return set;
}

std::vector<Vec3> gradient(std::span<const double> f, const StencilSet& stencils) {
  std::vector<Vec3> out(stencils.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stencils.gradient_at(i, f);
  return out;
}

std::vector<double> laplacian(std::span<const double> f, const StencilSet& stencils) {
  std::vector<double> out(stencils.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stencils.laplacian_at(i, f);
  return out;
}

std::vector<Vec3> laplacian(std::span<const Vec3> u, const StencilSet& stencils) {
  std::vector<Vec3> out(stencils.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < out.size(); ++i) {
    Vec3 s = Vec3::Zero();
    for (std::size_t e = stencils.begin(i); e < stencils.end(i); ++e)
      s += stencils.laplacian_coefficient(e) * (u[stencils.neighbor(e)] - u[i]);
    out[i] = s;
  }
  return out;
}

std::vector<double> divergence(std::span<const Vec3> u, const StencilSet& stencils) {
  std::vector<double> out(stencils.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t e = stencils.begin(i); e < stencils.end(i); ++e) {
      const Vec3 du = u[stencils.neighbor(e)] - u[i];
      s += stencils.coefficient(d_x, e) * du.x() + stencils.coefficient(d_y, e) * du.y() +
           stencils.coefficient(d_z, e) * du.z();
    }
    out[i] = s;
  }
  return out;
}

std::vector<Vec3> divergence(std::span<const Mat3> s, const StencilSet& stencils) {
  std::vector<Vec3> out(stencils.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < out.size(); ++i) {
    Vec3 acc = Vec3::Zero();
    for (std::size_t e = stencils.begin(i); e < stencils.end(i); ++e) {
      const Mat3 ds = s[stencils.neighbor(e)] - s[i];
      const Vec3 c{stencils.coefficient(d_x, e), stencils.coefficient(d_y, e),
                   stencils.coefficient(d_z, e)};
      acc += ds * c;
    }
    out[i] = acc;
  }
  return out;
}

std::vector<Mat3> velocity_gradient(std::span<const Vec3> u, const StencilSet& stencils) {
  std::vector<Mat3> out(stencils.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < out.size(); ++i) {
    Mat3 g = Mat3::Zero();
    for (std::size_t e = stencils.begin(i); e < stencils.end(i); ++e) {
      const Vec3 du = u[stencils.neighbor(e)] - u[i];
      const Vec3 c{stencils.coefficient(d_x, e), stencils.coefficient(d_y, e),
                   stencils.coefficient(d_z, e)};
      g += du * c.transpose();
    }
    out[i] = g;
  }
  return out;
}

}  // namespace fhd
