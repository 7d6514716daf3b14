#include "fhd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fhd/errors.hpp"

namespace fhd {

PeriodicBox::PeriodicBox(double length) : length_(length) {
  if (!(length > 0.0)) throw GeometryError("box length must be positive");
}

double PeriodicBox::wrap(double x) const {
  double w = x - length_ * std::floor(x / length_);
  // floor() can leave w == L for tiny negative x
  if (w >= length_) w -= length_;
  if (w < 0.0) w = 0.0;
  return w;
}

Vec3 PeriodicBox::wrap(const Vec3& x) const {
  return {wrap(x.x()), wrap(x.y()), wrap(x.z())};
}

Vec3 PeriodicBox::displacement(const Vec3& from, const Vec3& to) const {
  Vec3 d = to - from;
  for (int k = 0; k < 3; ++k) d[k] -= length_ * std::nearbyint(d[k] / length_);
  return d;
}

CellList::CellList(const PeriodicBox& box, double cell_size) : box_(box) {
  if (!(cell_size > 0.0)) throw GeometryError("cell size must be positive");
  cells_per_side_ = std::max(1, static_cast<int>(std::floor(box.length() / cell_size)));
  cell_edge_ = box.length() / cells_per_side_;
  cells_.resize(static_cast<std::size_t>(cells_per_side_) * cells_per_side_ *
                cells_per_side_);
}

int CellList::cell_coordinate(double x) const {
  int c = static_cast<int>(std::floor(box_.wrap(x) / cell_edge_));
  return std::clamp(c, 0, cells_per_side_ - 1);
}

std::size_t CellList::cell_of(const Vec3& x) const {
  const std::size_t n = cells_per_side_;
  return (cell_coordinate(x.x()) * n + cell_coordinate(x.y())) * n +
         cell_coordinate(x.z());
}

void CellList::build(std::span<const Vec3> positions) {
  for (auto& c : cells_) c.clear();
  positions_.assign(positions.begin(), positions.end());
  for (std::size_t i = 0; i < positions_.size(); ++i)
    cells_[cell_of(positions_[i])].push_back(i);
}

void CellList::insert(std::size_t index, const Vec3& position) {
  if (index >= positions_.size()) positions_.resize(index + 1);
  positions_[index] = position;
  cells_[cell_of(position)].push_back(index);
}

namespace {

// Distinct periodic cell coordinates covering [c - layers, c + layers].
std::vector<int> cell_range(int c, int layers, int n) {
  std::vector<int> out;
  if (2 * layers + 1 >= n) {
    out.resize(n);
    for (int k = 0; k < n; ++k) out[k] = k;
    return out;
  }
  for (int k = -layers; k <= layers; ++k) out.push_back(((c + k) % n + n) % n);
  return out;
}

}  // namespace

void CellList::query(const Vec3& x, double radius, std::vector<std::size_t>& out,
                     std::size_t exclude) const {
  out.clear();
  const int layers = static_cast<int>(std::ceil(radius / cell_edge_));
  const int n = cells_per_side_;
  const auto rx = cell_range(cell_coordinate(x.x()), layers, n);
  const auto ry = cell_range(cell_coordinate(x.y()), layers, n);
  const auto rz = cell_range(cell_coordinate(x.z()), layers, n);
  const double r2 = radius * radius;
  for (int cx : rx)
    for (int cy : ry)
      for (int cz : rz) {
        const auto& cell = cells_[(static_cast<std::size_t>(cx) * n + cy) * n + cz];
        for (std::size_t j : cell) {
          if (j == exclude) continue;
          if (box_.displacement(x, positions_[j]).squaredNorm() <= r2) out.push_back(j);
        }
      }
  std::sort(out.begin(), out.end());
}

double CellList::nearest(const Vec3& x, double max_radius, std::size_t* index,
                         std::size_t exclude) const {
  std::vector<std::size_t> candidates;
  query(x, max_radius, candidates, exclude);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j : candidates) {
    const double d = box_.distance(x, positions_[j]);
    if (d < best) {
      best = d;
      if (index) *index = j;
    }
  }
  return best;
}

namespace {
constexpr std::size_t kSumBlock = 1024;
}

double deterministic_sum(std::span<const double> values) {
  const std::size_t blocks = (values.size() + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(values.size(), (b + 1) * kSumBlock);
    double s = 0.0;
    for (std::size_t i = b * kSumBlock; i < end; ++i) s += values[i];
    partial[b] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

double deterministic_dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t blocks = (a.size() + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < blocks; ++k) {
    const std::size_t end = std::min(a.size(), (k + 1) * kSumBlock);
    double s = 0.0;
    for (std::size_t i = k * kSumBlock; i < end; ++i) s += a[i] * b[i];
    partial[k] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace fhd
