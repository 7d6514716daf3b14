#include "fhd/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fhd/analysis.hpp"
#include "fhd/errors.hpp"
#include "fhd/snapshot.hpp"

namespace fhd {

namespace fs = std::filesystem;

Simulation::Simulation(SimulationConfig config, std::ostream* log)
    : config_(std::move(config)), noise_(config_.seed) {
  parameters_ = config_.solver_parameters();
  const auto& p = parameters_;
  FluidParameters fluid{p.density, p.viscosity, p.kT};

  if (config_.with_body) {
    if (!check_virtual_mass(p.density, p.solid_density)) {
      const std::string msg = "virtual-mass bound violated: rho_f = " + format_number(p.density) +
                              " >= 2 rho_s = " + format_number(2.0 * p.solid_density) +
                              "; the explicit coupling is unstable";
      if (!config_.virtual_mass_warn_only) throw StabilityError(msg);
      if (log) *log << "warning: " << msg << '\n';
    }
    const double c = 0.5 * p.box_length;
    body_ = RigidSphere::make(Vec3(c, c, c), p.radius, p.solid_density,
                              config_.subdivision_level);
  }
  state_ = make_fluid_state(p.box_length, p.dx, fluid, body_ ? &*body_ : nullptr);

  u_max_ = config_.u_max.value_or(5.0 * thermal_speed(fluid, state_.cell_volume));
  bound_ = cfl_timestep(state_.cloud.h, u_max_, fluid.kinematic_viscosity());
  if (config_.dt) {
    if (*config_.dt > bound_.dt)
      throw StabilityError("dt = " + format_number(*config_.dt) + " exceeds the CFL bound " +
                           format_number(bound_.dt));
    state_.dt = *config_.dt;
  } else {
    state_.dt = bound_.dt;
  }

  options_.poisson.tolerance = config_.poisson_tolerance;
  options_.poisson.max_iterations = config_.poisson_max_iterations;
  options_.manage_particles = config_.manage_particles;
  options_.body_fixed = config_.body_fixed;
  options_.div_tol = config_.poisson_tolerance;
}

StepReport Simulation::advance() {
  return step(state_, body_ ? &*body_ : nullptr, noise_, options_);
}

namespace {

void write_vec(std::ostream& out, const char* key, const Vec3& v) {
  out << key;
  for (int k = 0; k < 3; ++k) out << ' ' << format_number(v[k]);
  out << '\n';
}

std::vector<std::string> fields_of(std::istream& in, const std::string& key, std::size_t n) {
  std::string line;
  if (!std::getline(in, line)) throw Error("checkpoint: missing " + key);
  std::istringstream s(line);
  std::string k;
  s >> k;
  if (k != key) throw Error("checkpoint: expected " + key + ", found '" + k + "'");
  std::vector<std::string> out(n);
  for (auto& f : out)
    if (!(s >> f)) throw Error("checkpoint: short record " + key);
  return out;
}

Vec3 vec_of(std::istream& in, const std::string& key) {
  const auto f = fields_of(in, key, 3);
  return {parse_number(f[0]), parse_number(f[1]), parse_number(f[2])};
}

}  // namespace

void Simulation::save_checkpoint(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write " + tmp);
    out << "# fhd checkpoint\n";
    out << "seed " << config_.seed << '\n';
    out << "dt " << format_number(state_.dt) << '\n';
    out << "fluid_volume " << format_number(state_.fluid_volume) << '\n';
    out << "cell_volume " << format_number(state_.cell_volume) << '\n';
    out << "body " << (body_ ? 1 : 0) << '\n';
    if (body_) {
      write_vec(out, "center", body_->center);
      write_vec(out, "velocity", body_->velocity);
      write_vec(out, "angular_velocity", body_->angular_velocity);
      const auto& q = body_->orientation;
      out << "orientation " << format_number(q.w()) << ' ' << format_number(q.x()) << ' '
          << format_number(q.y()) << ' ' << format_number(q.z()) << '\n';
    }
    write_snapshot(out, Snapshot{state_.step, state_.time, state_.cloud});
    if (!out) throw Error("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

void Simulation::load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line != "# fhd checkpoint") throw Error(path + " is not a checkpoint");
  const auto seed = fields_of(in, "seed", 1);
  if (std::stoull(seed[0]) != config_.seed)
    throw Error("checkpoint seed " + seed[0] + " differs from the configured seed");
  state_.dt = parse_number(fields_of(in, "dt", 1)[0]);
  state_.fluid_volume = parse_number(fields_of(in, "fluid_volume", 1)[0]);
  state_.cell_volume = parse_number(fields_of(in, "cell_volume", 1)[0]);
  const bool has_body = fields_of(in, "body", 1)[0] == "1";
  if (has_body != body_.has_value()) throw Error("checkpoint body does not match the config");
  if (body_) {
    body_->center = vec_of(in, "center");
    body_->velocity = vec_of(in, "velocity");
    body_->angular_velocity = vec_of(in, "angular_velocity");
    const auto q = fields_of(in, "orientation", 4);
    body_->orientation = Eigen::Quaterniond(parse_number(q[0]), parse_number(q[1]),
                                            parse_number(q[2]), parse_number(q[3]));
  }
  auto snap = read_snapshot(in);
  state_.step = snap.step;
  state_.time = snap.time;
  state_.cloud = std::move(snap.cloud);
}

SimulationConfig apply_overrides(SimulationConfig c, const RunOverrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.output_directory) c.output_directory = *o.output_directory;
  if (o.checkpoint_interval) c.checkpoint_interval = *o.checkpoint_interval;
  if (o.steps) c.steps = *o.steps;
  return c;
}

namespace {

struct RunFiles {
  fs::path dir;
  fs::path config() const { return dir / "config.ini"; }
  fs::path metadata() const { return dir / "metadata.ini"; }
  fs::path trajectory() const { return dir / "trajectory.dat"; }
  fs::path diagnostics() const { return dir / "diagnostics.dat"; }
  fs::path checkpoint() const { return dir / "checkpoint.dat"; }
  fs::path snapshot(std::uint64_t step) const {
    std::ostringstream name;
    name << "snapshot_" << std::setw(8) << std::setfill('0') << step << ".dat";
    return dir / "snapshots" / name.str();
  }
};

TrajectoryRow trajectory_row(const Simulation& sim, const Vec3& force, const Vec3& torque) {
  TrajectoryRow r;
  r.time = sim.state().time;
  if (sim.body()) {
    r.position = sim.body()->center;
    r.velocity = sim.body()->velocity;
    r.angular_velocity = sim.body()->angular_velocity;
  }
  r.force = force;
  r.torque = torque;
  return r;
}

const char* kDiagnosticsHeader =
    "# step time div_before div_after max_speed N dV poisson_iterations poisson_residual "
    "merged inserted repaired enlarged kinetic_energy cleanup_iterations";

void write_metadata(const Simulation& sim, const RunFiles& files) {
  const auto& p = sim.parameters();
  const auto& s = sim.state();
  const Scales scales = sim.config().units == Units::physical
                            ? Scales::from(sim.config().parameters)
                            : Scales{};
  std::ofstream o(files.metadata());
  o << "[run]\n"
    << "seed = " << sim.config().seed << '\n'
    << "dt = " << format_number(s.dt) << '\n'
    << "cfl_advective = " << format_number(sim.bound().advective) << '\n'
    << "cfl_viscous = " << format_number(sim.bound().viscous) << '\n'
    << "u_max = " << format_number(sim.u_max()) << '\n'
    << "h = " << format_number(s.cloud.h) << '\n'
    << "lattice_spacing = " << format_number(s.cloud.dx0) << '\n'
    << "initial_points = " << s.cloud.size() << '\n'
    << "surface_points = " << s.cloud.surface_count << '\n'
    << "fluid_volume = " << format_number(s.fluid_volume) << '\n'
    << "initial_cell_volume = " << format_number(s.cell_volume) << '\n'
    << "checkpoint_interval = " << sim.config().checkpoint_interval << '\n'
    << "snapshot_interval = " << sim.config().snapshot_interval << "\n\n"
    << "[solver_units]\n"
    << "rho = " << format_number(p.density) << '\n'
    << "mu = " << format_number(p.viscosity) << '\n'
    << "kT = " << format_number(p.kT) << '\n'
    << "box_length = " << format_number(p.box_length) << '\n'
    << "radius = " << format_number(p.radius) << '\n'
    << "rho_s = " << format_number(p.solid_density) << "\n\n"
    << "[scales]\n"
    << "length = " << format_number(scales.length) << '\n'
    << "time = " << format_number(scales.time) << '\n'
    << "mass = " << format_number(scales.mass) << '\n'
    << "velocity = " << format_number(scales.velocity) << '\n'
    << "pressure = " << format_number(scales.pressure) << '\n'
    << "energy = " << format_number(scales.energy) << "\n\n";
  const double tau = viscous_time(p.density, p.viscosity, p.radius);
  o << "[analysis_defaults]\n"
    << "equilibration_discard = " << format_number(tau) << '\n'
    << "horizon = " << format_number(p.box_length * p.box_length * p.density / p.viscosity)
    << '\n'
    << "tail_window = " << format_number(1.1 * tau) << ' ' << format_number(5.0 * tau) << '\n';
}

void truncate_rows(const fs::path& path, std::size_t keep) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string text, line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      if (rows == keep) break;
      ++rows;
    }
    text += line;
    text += '\n';
  }
  if (rows < keep)
    throw Error(path.string() + " has " + std::to_string(rows) + " rows, checkpoint needs " +
                std::to_string(keep));
  in.close();
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

RunSummary loop(Simulation& sim, const RunFiles& files, std::uint64_t target, std::ostream* log) {
  std::ofstream traj(files.trajectory(), std::ios::app);
  std::ofstream diag(files.diagnostics(), std::ios::app);
  if (!traj || !diag) throw Error("cannot open output files in " + files.dir.string());
  const auto& cfg = sim.config();
  RunSummary summary;
  summary.first_step = sim.state().step;
  summary.dt = sim.state().dt;
  summary.output_directory = files.dir.string();

  while (sim.state().step < target) {
    const StepReport r = sim.advance();
    const auto& s = sim.state();
    write_trajectory_row(traj, trajectory_row(sim, r.force, r.torque));
    const double ke = kinetic_energy(s.cloud, s.params.density, s.cell_volume);
    diag << r.step << ' ' << format_number(r.time) << ' ' << format_number(r.max_divergence_before)
         << ' ' << format_number(r.max_divergence_after) << ' ' << format_number(r.max_speed)
         << ' ' << r.point_count << ' ' << format_number(r.cell_volume) << ' '
         << r.poisson_iterations << ' ' << format_number(r.poisson_residual) << ' ' << r.merged
         << ' ' << r.inserted << ' ' << r.repaired << ' ' << r.enlarged_stencils << ' '
         << format_number(ke) << ' ' << r.cleanup_iterations << '\n';

    if (cfg.snapshot_interval > 0 && s.step % cfg.snapshot_interval == 0)
      save_snapshot(files.snapshot(s.step).string(), Snapshot{s.step, s.time, s.cloud});
    if (cfg.checkpoint_interval > 0 && s.step % cfg.checkpoint_interval == 0) {
      traj.flush();
      diag.flush();
      sim.save_checkpoint(files.checkpoint().string());
    }
    if (log && (s.step % 100 == 0 || s.step == target)) {
      *log << "step " << s.step << " t " << s.time << " N " << r.point_count << " div "
           << r.max_divergence_after << " iters " << r.poisson_iterations;
      if (sim.body()) *log << " |U| " << sim.body()->velocity.norm();
      *log << '\n';
    }
  }
  traj.flush();
  diag.flush();
  const auto& s = sim.state();
  if (!fs::exists(files.snapshot(s.step)))
    save_snapshot(files.snapshot(s.step).string(), Snapshot{s.step, s.time, s.cloud});
  sim.save_checkpoint(files.checkpoint().string());
  summary.last_step = s.step;
  summary.time = s.time;
  return summary;
}

}  // namespace

RunSummary run(const SimulationConfig& config, std::ostream* log) {
  Simulation sim(config, log);
  RunFiles files{config.output_directory};
  fs::create_directories(files.dir / "snapshots");
  {
    std::ofstream c(files.config());
    c << serialize_config(config);
  }
  write_metadata(sim, files);
  if (log)
    *log << "dt " << sim.state().dt << " (advective " << sim.bound().advective << ", viscous "
         << sim.bound().viscous << "), N " << sim.state().cloud.size() << ", seed "
         << config.seed << '\n';
  {
    std::ofstream traj(files.trajectory(), std::ios::trunc);
    traj << trajectory_header() << '\n';
    write_trajectory_row(traj, trajectory_row(sim, Vec3::Zero(), Vec3::Zero()));
    std::ofstream diag(files.diagnostics(), std::ios::trunc);
    diag << kDiagnosticsHeader << '\n';
  }
  const auto& s = sim.state();
  save_snapshot(files.snapshot(0).string(), Snapshot{s.step, s.time, s.cloud});
  sim.save_checkpoint(files.checkpoint().string());
  return loop(sim, files, config.steps, log);
}

RunSummary resume(const std::string& output_directory, std::optional<std::uint64_t> steps,
                  std::ostream* log) {
  RunFiles files{output_directory};
  auto config = load_config(files.config().string());
  config.output_directory = output_directory;
  Simulation sim(config, log);
  sim.load_checkpoint(files.checkpoint().string());
  const auto at = sim.state().step;
  truncate_rows(files.trajectory(), at + 1);
  truncate_rows(files.diagnostics(), at);
  if (log) *log << "resuming at step " << at << '\n';
  return loop(sim, files, steps.value_or(config.steps), log);
}

}  // namespace fhd
