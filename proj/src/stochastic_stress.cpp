#include "fhd/stochastic_stress.hpp"

#include <cmath>
#include <numbers>

#include "fhd/errors.hpp"

namespace fhd {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

namespace {

// Uniform in (0, 1) from 64 random bits; never 0, so log() is finite.
double open_uniform(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Two normals per Philox block (Box-Muller). Block b holds slots 2b, 2b+1.
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t step,
                                  std::uint64_t point, std::uint32_t block) {
  const std::array<std::uint32_t, 4> ctr = {
      block, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(point),
      static_cast<std::uint32_t>((point >> 32) << 16 | ((step >> 32) & 0xFFFFu))};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  const auto bits = philox4x32(ctr, key);
  const double u1 = open_uniform(bits[0], bits[1]);
  const double u2 = open_uniform(bits[2], bits[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace

Mat3 NoiseStream::normal_matrix(std::uint64_t step, std::uint64_t point) const {
  std::array<double, 10> z;
  for (std::uint32_t b = 0; b < 5; ++b) {
    const auto pair = normal_pair(seed_, step, point, b);
    z[2 * b] = pair[0];
    z[2 * b + 1] = pair[1];
  }
  Mat3 m;
  m << z[0], z[1], z[2], z[3], z[4], z[5], z[6], z[7], z[8];
  return m;
}

double NoiseStream::normal(std::uint64_t step, std::uint64_t point, unsigned slot) const {
  return normal_pair(seed_, step, point, slot / 2)[slot % 2];
}

double update_cell_volume(double fluid_volume, std::size_t point_count) {
  if (point_count == 0) throw Error("cell volume needs at least one point");
  return fluid_volume / static_cast<double>(point_count);
}

Mat3 sample_stress(const StressParameters& params, const NoiseStream& stream,
                   std::uint64_t step, std::uint64_t point) {
  if (params.kT == 0.0) return Mat3::Zero();
  const double base = params.kT * params.viscosity / (params.cell_volume * params.dt);
  const double diagonal = std::sqrt(4.0 * base);
  const double off_diagonal = std::sqrt(2.0 * base);
  const Mat3 r = stream.normal_matrix(step, point);
  Mat3 s = 0.5 * (r + r.transpose());
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s(a, b) *= (a == b) ? diagonal : off_diagonal;
  return s;
}

StochasticStressField sample_stress_field(const StressParameters& params,
                                          const NoiseStream& stream, std::uint64_t step,
                                          const PointCloud& cloud) {
  StochasticStressField field;
  field.step = step;
  field.cell_volume = params.cell_volume;
  field.dt = params.dt;
  field.tensors.resize(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < cloud.size(); ++i)
    field.tensors[i] = sample_stress(params, stream, step, cloud.points[i].id);
  return field;
}

}  // namespace fhd
