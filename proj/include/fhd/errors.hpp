#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fhd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Geometry that cannot be discretized (sphere larger than the box, box
/// smaller than two neighborhood radii, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A run that violates a stability requirement: the virtual-mass bound of
/// the explicit coupling or the CFL time step bound.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// The weighted normal-equation matrix of a least-squares stencil is
/// singular or too badly conditioned to be trusted.
class StencilIllConditioned : public Error {
 public:
  StencilIllConditioned(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class SolverDiverged : public Error {
 public:
  SolverDiverged(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace fhd
