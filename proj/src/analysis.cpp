#include "fhd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fhd/errors.hpp"
#include "fhd/snapshot.hpp"

namespace fhd {

VacfSeries vacf(std::span<const Vec3> velocity, double dt, std::size_t max_lag, int dimension) {
  if (velocity.size() <= max_lag)
    throw Error("vacf: series of " + std::to_string(velocity.size()) +
                " samples is too short for lag " + std::to_string(max_lag));
  if (dimension < 1 || dimension > 3) throw Error("vacf: dimension must be 1, 2 or 3");
  VacfSeries c;
  c.dt = dt;
  c.dimension = dimension;
  c.values.assign(max_lag + 1, 0.0);
  c.counts.assign(max_lag + 1, 0);
  const std::size_t n = velocity.size();
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t)
      s += velocity[t + k].head(dimension).dot(velocity[t].head(dimension));
    c.counts[k] = n - k;
    c.values[k] = s / static_cast<double>((n - k) * dimension);
  }
  return c;
}

VacfSeries ensemble_vacf(std::span<const VacfSeries> members) {
  if (members.empty()) throw Error("ensemble_vacf: no members");
  std::size_t len = members[0].size();
  for (const auto& m : members) {
    len = std::min(len, m.size());
    if (std::abs(m.dt - members[0].dt) > 1e-12 * std::abs(members[0].dt))
      throw Error("ensemble_vacf: members have different time steps");
  }
  VacfSeries out;
  out.dt = members[0].dt;
  out.dimension = members[0].dimension;
  out.values.assign(len, 0.0);
  out.standard_error.assign(len, 0.0);
  out.counts.assign(len, 0);
  const double n = static_cast<double>(members.size());
  for (std::size_t k = 0; k < len; ++k) {
    double mean = 0.0;
    for (const auto& m : members) {
      mean += m.values[k];
      if (k < m.counts.size()) out.counts[k] += m.counts[k];
    }
    mean /= n;
    double var = 0.0;
    for (const auto& m : members) var += (m.values[k] - mean) * (m.values[k] - mean);
    out.values[k] = mean;
    out.standard_error[k] = members.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
  }
  return out;
}

double diffusion_coefficient(const VacfSeries& c, std::size_t k) {
  if (k == 0 || k > c.size())
    throw Error("diffusion_coefficient: horizon " + std::to_string(k) + " outside [1, " +
                std::to_string(c.size()) + "]");
  double s = 0.5 * c.values[0];
  for (std::size_t i = 1; i < k; ++i) s += c.values[i];
  return c.dt * s;
}

std::vector<double> running_diffusion(const VacfSeries& c) {
  std::vector<double> d(c.size());
  double s = 0.0;
  for (std::size_t k = 1; k <= c.size(); ++k) {
    s += k == 1 ? 0.5 * c.values[0] : c.values[k - 1];
    d[k - 1] = c.dt * s;
  }
  return d;
}

double drag_correction(double kT, double density, double viscosity, double radius,
                       double diffusion) {
  if (!(diffusion > 0.0))
    throw Error("drag_correction: diffusion coefficient " + format_number(diffusion) +
                " is not positive (VACF integral not converged)");
  return kT * density / (6.0 * std::numbers::pi * viscosity * viscosity * radius * diffusion);
}

double schmidt_number(double kT, double density, double viscosity, double radius) {
  return 6.0 * std::numbers::pi * viscosity * viscosity * radius / (density * kT);
}

double viscous_time(double density, double viscosity, double radius) {
  return density * radius * radius / viscosity;
}

double tail_exponent(const VacfSeries& c, double t_lo, double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double t = c.time(k);
    if (t < t_lo || t > t_hi) continue;
    if (!(c.values[k] > 0.0))
      throw Error("tail_exponent: C(" + format_number(t) + ") = " + format_number(c.values[k]) +
                  " is not positive");
    const double x = std::log(t), y = std::log(c.values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw Error("tail_exponent: fewer than two lags in the window");
  const double nn = static_cast<double>(n);
  return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

std::string trajectory_header() {
  return "# time X Y Z U V W wx wy wz Fx Fy Fz Tx Ty Tz";
}

void write_trajectory_row(std::ostream& out, const TrajectoryRow& r) {
  out << format_number(r.time);
  for (const Vec3* v : {&r.position, &r.velocity, &r.angular_velocity, &r.force, &r.torque})
    for (int k = 0; k < 3; ++k) out << ' ' << format_number((*v)[k]);
  out << '\n';
}

Trajectory read_trajectory(std::istream& in) {
  Trajectory t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    std::string f[16];
    for (auto& x : f)
      if (!(s >> x)) throw Error("trajectory: malformed line " + std::to_string(lineno));
    TrajectoryRow r;
    r.time = parse_number(f[0]);
    Vec3* cols[] = {&r.position, &r.velocity, &r.angular_velocity, &r.force, &r.torque};
    for (int c = 0; c < 5; ++c)
      for (int k = 0; k < 3; ++k) (*cols[c])[k] = parse_number(f[1 + 3 * c + k]);
    t.push_back(r);
  }
  return t;
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return read_trajectory(in);
}

double trajectory_timestep(const Trajectory& t) {
  if (t.size() < 2) throw Error("trajectory: fewer than two rows");
  const double dt = t[1].time - t[0].time;
  for (std::size_t i = 2; i < t.size(); ++i) {
    const double d = t[i].time - t[i - 1].time;
    if (std::abs(d - dt) > 1e-9 * std::max(1.0, std::abs(t[i].time)))
      throw Error("trajectory: non-uniform time step at row " + std::to_string(i));
  }
  return dt;
}

AnalysisSummary analyze(std::span<const Trajectory> members, const AnalysisOptions& o) {
  if (members.empty()) throw Error("analyze: no trajectories");
  AnalysisSummary s;
  s.members = members.size();
  s.dt = trajectory_timestep(members[0]);
  for (const auto& m : members)
    if (std::abs(trajectory_timestep(m) - s.dt) > 1e-9 * s.dt)
      throw Error("analyze: ensemble members have different time steps");

  s.viscous_time = viscous_time(o.density, o.viscosity, o.radius);
  const double nu = o.viscosity / o.density;
  s.horizon = o.horizon.value_or(o.box_length * o.box_length / nu);
  const double discard = o.discard.value_or(s.viscous_time);
  s.tail_lo = o.tail_lo.value_or(1.1 * s.viscous_time);
  s.tail_hi = o.tail_hi.value_or(std::min(5.0 * s.viscous_time, s.horizon));

  const auto skip = static_cast<std::size_t>(std::ceil(discard / s.dt - 1e-9));
  std::size_t shortest = members[0].size();
  for (const auto& m : members) shortest = std::min(shortest, m.size());
  if (shortest <= skip + 1) throw Error("analyze: trajectories end before the equilibration discard");
  const std::size_t usable = shortest - skip;
  auto max_lag = static_cast<std::size_t>(std::llround(s.horizon / s.dt));
  if (max_lag >= usable) {
    max_lag = usable - 1;
    s.notes.push_back("horizon truncated to " + format_number(max_lag * s.dt) +
                      " by trajectory length");
    s.horizon = max_lag * s.dt;
    s.tail_hi = std::min(s.tail_hi, s.horizon);
  }

  std::vector<VacfSeries> series;
  for (const auto& m : members) {
    std::vector<Vec3> u;
    u.reserve(m.size() - skip);
    for (std::size_t i = skip; i < m.size(); ++i) u.push_back(m[i].velocity);
    series.push_back(vacf(u, s.dt, max_lag));
  }
  s.vacf = ensemble_vacf(series);
  s.running_diffusion = running_diffusion(s.vacf);
  s.diffusion = s.running_diffusion.back();
  s.schmidt_number = schmidt_number(o.kT, o.density, o.viscosity, o.radius);
  if (s.diffusion > 0.0)
    s.drag_correction = drag_correction(o.kT, o.density, o.viscosity, o.radius, s.diffusion);
  else
    s.notes.push_back("drag correction undefined: D <= 0");

  const double t_end = std::min(s.tail_hi, s.vacf.time(s.vacf.size() - 1));
  s.vacf_positive = true;
  for (std::size_t k = 0; k < s.vacf.size() && s.vacf.time(k) <= t_end; ++k)
    if (!(s.vacf.values[k] > 0.0)) s.vacf_positive = false;
  const auto k_lo = static_cast<std::size_t>(std::llround(s.tail_lo / s.dt));
  const auto k_hi = static_cast<std::size_t>(std::llround(t_end / s.dt));
  s.vacf_decaying = k_hi > k_lo && k_hi < s.vacf.size() &&
                    s.vacf.values[k_hi] < s.vacf.values[k_lo] &&
                    s.vacf.values[k_lo] < s.vacf.values[0];
  try {
    s.tail_slope = tail_exponent(s.vacf, s.tail_lo, t_end);
  } catch (const Error& e) {
    s.notes.push_back(e.what());
  }
  return s;
}

void write_vacf_table(std::ostream& out, const VacfSeries& c) {
  out << "# t C stderr n\n";
  for (std::size_t k = 0; k < c.size(); ++k)
    out << format_number(c.time(k)) << ' ' << format_number(c.values[k]) << ' '
        << format_number(c.standard_error.empty() ? 0.0 : c.standard_error[k]) << ' '
        << c.counts[k] << '\n';
}

void write_diffusion_table(std::ostream& out, const VacfSeries& c,
                           std::span<const double> running) {
  out << "# t D\n";
  for (std::size_t k = 0; k < running.size(); ++k)
    out << format_number(c.time(k + 1)) << ' ' << format_number(running[k]) << '\n';
}

void write_summary(std::ostream& out, const AnalysisSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : "nan"; };
  out << "members " << s.members << '\n'
      << "dt " << format_number(s.dt) << '\n'
      << "viscous_time " << format_number(s.viscous_time) << '\n'
      << "horizon " << format_number(s.horizon) << '\n'
      << "D " << format_number(s.diffusion) << '\n'
      << "xi_c " << opt(s.drag_correction) << '\n'
      << "S_c " << format_number(s.schmidt_number) << '\n'
      << "tail_window " << format_number(s.tail_lo) << ' ' << format_number(s.tail_hi) << '\n'
      << "tail_slope " << opt(s.tail_slope) << '\n'
      << "vacf_positive " << s.vacf_positive << '\n'
      << "vacf_decaying " << s.vacf_decaying << '\n';
  for (const auto& n : s.notes) out << "# " << n << '\n';
}

void write_plot_script(std::ostream& out, const std::string& vacf_file, double tau) {
  out << "set logscale xy\n"
      << "set xlabel 't'\nset ylabel 'C(t)'\n"
      << "tau = " << format_number(tau) << '\n'
      << "plot '" << vacf_file << "' using 1:2 with lines title 'VACF', \\\n"
      << "     '" << vacf_file << "' using 1:2:3 with yerrorbars notitle, \\\n"
      << "     (x > tau ? 0.01 * (x / tau)**(-1.5) : 1/0) title 't^{-3/2}'\n";
}

}  // namespace fhd
