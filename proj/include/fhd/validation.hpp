#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fhd/point_cloud.hpp"
#include "fhd/pressure_poisson.hpp"

namespace fhd {

enum class Suite { operators, poisson, noise, quadrature, body };

std::optional<Suite> parse_suite(const std::string& name);
std::string suite_name(Suite suite);

struct ValidationCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct ValidationReport {
  std::string suite;
  std::vector<ValidationCheck> checks;
  std::string table;  // columnar detail (convergence table, variances, ...)
  bool passed() const;
};

ValidationReport validate(Suite suite, std::uint64_t seed = 1);
void print_report(std::ostream& out, const ValidationReport& report);

/// Lattice of n^3 points in a periodic box of side L, each displaced uniformly
/// by up to `jitter` lattice spacings per axis.
PointCloud jittered_cloud(int n, double box_length, double jitter, std::uint64_t seed);

struct ConvergenceRow {
  double dx = 0.0;
  double error = 0.0;     // RMS over points
  double order = 0.0;     // against the previous row; 0 for the first
};

/// Manufactured periodic solution p = sin(kx) sin(ky) sin(kz), k = 2 pi / L,
/// solved on jittered clouds of n^3 points for each n.
std::vector<ConvergenceRow> poisson_convergence(const std::vector<int>& resolutions,
                                                double jitter, std::uint64_t seed);
/// Least-squares slope of log error against log dx.
double fitted_order(const std::vector<ConvergenceRow>& rows);

}  // namespace fhd
