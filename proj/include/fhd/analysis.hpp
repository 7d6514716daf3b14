#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fhd/geometry.hpp"

namespace fhd {

struct VacfSeries {
  double dt = 1.0;
  int dimension = 3;
  std::vector<double> values;  // C_k at t_k = k dt
  std::vector<double> standard_error;  // empty for a single series
  std::vector<std::size_t> counts;  // samples behind each lag
  std::size_t size() const { return values.size(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// C_k = (1/d) mean_s U(s+k).U(s) over all time origins s, for k = 0..max_lag.
/// Requires more than max_lag samples.
VacfSeries vacf(std::span<const Vec3> velocity, double dt, std::size_t max_lag, int dimension = 3);

/// Mean over independent members with the standard error of that mean.
VacfSeries ensemble_vacf(std::span<const VacfSeries> members);

/// D(k dt) = (dt/2) C_0 + dt sum_{i=1}^{k-1} C_i, for 1 <= k <= size.
double diffusion_coefficient(const VacfSeries& c, std::size_t k);
/// D(k dt) for k = 1..size.
std::vector<double> running_diffusion(const VacfSeries& c);

/// xi_c = kT rho / (6 pi mu^2 R D). Throws for D <= 0.
double drag_correction(double kT, double density, double viscosity, double radius,
                       double diffusion);
/// S_c = 6 pi mu^2 R / (rho kT).
double schmidt_number(double kT, double density, double viscosity, double radius);
/// tau = rho R^2 / mu.
double viscous_time(double density, double viscosity, double radius);

/// Least-squares slope of log C against log t over lags with t in [t_lo, t_hi].
/// Throws when a value in the window is not positive or fewer than two lags fall
/// inside it.
double tail_exponent(const VacfSeries& c, double t_lo, double t_hi);

struct TrajectoryRow {
  double time = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

using Trajectory = std::vector<TrajectoryRow>;

/// Column header line of a trajectory file.
std::string trajectory_header();
void write_trajectory_row(std::ostream& out, const TrajectoryRow& row);
Trajectory read_trajectory(std::istream& in);
Trajectory read_trajectory(const std::string& path);
/// Spacing of the time column; throws when it is not uniform.
double trajectory_timestep(const Trajectory& t);

struct AnalysisOptions {
  double kT = 0.83;
  double density = 1.0;
  double viscosity = 1.0;
  double radius = 1.0;
  double box_length = 1.0;
  /// Defaults: discard one viscous time, integrate to L^2/nu, fit the tail over
  /// [1.1 tau, min(5 tau, horizon)].
  std::optional<double> discard;
  std::optional<double> horizon;
  std::optional<double> tail_lo;
  std::optional<double> tail_hi;
};

struct AnalysisSummary {
  std::size_t members = 0;
  double dt = 0.0;
  double viscous_time = 0.0;
  double horizon = 0.0;
  double diffusion = 0.0;
  std::optional<double> drag_correction;  // unset when D <= 0
  double schmidt_number = 0.0;
  std::optional<double> tail_slope;  // unset when the window has C <= 0
  double tail_lo = 0.0;
  double tail_hi = 0.0;
  bool vacf_positive = false;  // C > 0 up to the tail window end
  bool vacf_decaying = false;  // C at the window end below C at its start
  VacfSeries vacf;
  std::vector<double> running_diffusion;
  std::vector<std::string> notes;
};

/// Ensemble VACF of the body velocity after the equilibration discard, its
/// running integral, drag correction, Schmidt number and tail slope. Members
/// must share the time step.
AnalysisSummary analyze(std::span<const Trajectory> members, const AnalysisOptions& options);

void write_vacf_table(std::ostream& out, const VacfSeries& c);
void write_diffusion_table(std::ostream& out, const VacfSeries& c,
                           std::span<const double> running);
void write_summary(std::ostream& out, const AnalysisSummary& s);
/// gnuplot script plotting the VACF table on log-log axes with a t^-3/2 guide.
void write_plot_script(std::ostream& out, const std::string& vacf_file, double tau);

}  // namespace fhd
