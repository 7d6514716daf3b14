#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fhd/geometry.hpp"
#include "fhd/point_cloud.hpp"

namespace fhd {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Keyed source of standard normal variates. A draw depends only on
/// (seed, step, point id, slot), never on call order or thread schedule.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed = 0) : seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

  /// 3x3 matrix of independent standard normals for (step, point).
  Mat3 normal_matrix(std::uint64_t step, std::uint64_t point) const;
  /// Single standard normal for (step, point, slot); slots 0..8 coincide
  /// with the row-major entries of normal_matrix.
  double normal(std::uint64_t step, std::uint64_t point, unsigned slot) const;

 private:
  std::uint64_t seed_;
};

struct StressParameters {
  double kT = 0.0;
  double viscosity = 1.0;
  double cell_volume = 1.0;  // ΔV = V / N
  double dt = 1.0;
};

/// ΔV = V / N: coarse-graining volume per discretization point.
double update_cell_volume(double fluid_volume, std::size_t point_count);

/// One symmetric stochastic stress realization. R is the keyed normal matrix,
/// R~ = (R + R^T)/2; diagonal entries are scaled by sqrt(4 kT mu / (ΔV Δt)),
/// off-diagonal entries by sqrt(2 kT mu / (ΔV Δt)).
Mat3 sample_stress(const StressParameters& params, const NoiseStream& stream,
                   std::uint64_t step, std::uint64_t point);

struct StochasticStressField {
  std::vector<Mat3> tensors;  // one per cloud point, in cloud order
  std::uint64_t step = 0;
  double cell_volume = 0.0;
  double dt = 0.0;
};

/// Realizations for every point of the cloud at `step`, keyed by point id.
StochasticStressField sample_stress_field(const StressParameters& params,
                                          const NoiseStream& stream, std::uint64_t step,
                                          const PointCloud& cloud);

}  // namespace fhd
