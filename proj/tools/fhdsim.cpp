// fhdsim: fluctuating-hydrodynamics runs around a rigid sphere.
#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fhd/analysis.hpp"
#include "fhd/config.hpp"
#include "fhd/errors.hpp"
#include "fhd/simulation.hpp"
#include "fhd/snapshot.hpp"
#include "fhd/validation.hpp"

namespace {

enum Exit : int {
  ok = 0,
  other = 1,
  config_error = 2,
  stability_error = 3,
  solver_diverged = 4,
  validation_failed = 5,
};

void write_surface(const std::string& path, const fhd::RigidSphere& body) {
  std::ofstream out(path);
  out << "# centroid_x centroid_y centroid_z normal_x normal_y normal_z area\n";
  for (std::size_t k = 0; k < body.surface.size(); ++k) {
    const fhd::Vec3 c = body.center + body.centroid_offset(k);
    const fhd::Vec3 n = body.normal(k);
    for (int i = 0; i < 3; ++i) out << fhd::format_number(c[i]) << ' ';
    for (int i = 0; i < 3; ++i) out << fhd::format_number(n[i]) << ' ';
    out << fhd::format_number(body.area(k)) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meshfree fluctuating hydrodynamics with a rigid Brownian sphere"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed, checkpoint_interval, steps;
  std::optional<std::string> output;
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)");

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "configuration file")->required();
    cmd->add_option("--seed", seed, "noise seed (overrides the config)");
    cmd->add_option("-o,--output", output, "output directory (overrides the config)");
    cmd->add_option("--checkpoint-interval", checkpoint_interval, "steps between checkpoints");
    cmd->add_option("--steps", steps, "number of steps (overrides the config)");
  };

  auto* generate = app.add_subcommand("generate", "write the initial cloud and the sphere surface");
  add_run_flags(generate);
  auto* run = app.add_subcommand("run", "run a simulation");
  add_run_flags(run);

  std::string resume_dir;
  auto* resume = app.add_subcommand("resume", "continue a run from its last checkpoint");
  resume->add_option("directory", resume_dir, "run output directory")->required();
  resume->add_option("--steps", steps, "total step count to reach");

  std::string suite;
  std::uint64_t validate_seed = 1;
  auto* validate = app.add_subcommand("validate", "run a property suite");
  validate->add_option("suite", suite, "operators | poisson | noise | quadrature | body")
      ->required();
  validate->add_option("--seed", validate_seed, "seed for random clouds and samples");

  std::vector<std::string> trajectories;
  std::string analyze_out = "analysis";
  std::optional<double> discard, horizon;
  auto* analyze = app.add_subcommand("analyze", "VACF, diffusion and drag correction of runs");
  analyze->add_option("trajectories", trajectories, "trajectory.dat files")->required();
  analyze->add_option("-c,--config", config_path, "configuration of the runs")->required();
  analyze->add_option("-o,--output", analyze_out, "directory for the tables");
  analyze->add_option("--discard", discard, "equilibration time dropped (default: viscous time)");
  analyze->add_option("--horizon", horizon, "VACF integration horizon (default: L^2/nu)");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*generate || *run) {
      auto config = fhd::apply_overrides(fhd::load_config(config_path),
                                         {seed, output, checkpoint_interval, steps});
      if (*run) {
        const auto s = fhd::run(config, &std::cout);
        std::cout << "finished step " << s.last_step << " t " << s.time << " in "
                  << s.output_directory << '\n';
      } else {
        fhd::Simulation sim(config, &std::cout);
        std::filesystem::create_directories(config.output_directory);
        const auto& st = sim.state();
        fhd::save_snapshot(config.output_directory + "/cloud.dat",
                           fhd::Snapshot{st.step, st.time, st.cloud});
        if (sim.body()) write_surface(config.output_directory + "/surface.dat", *sim.body());
        std::cout << "points " << st.cloud.size() << " surface " << st.cloud.surface_count
                  << " h " << st.cloud.h << " dt " << st.dt << '\n';
      }
    } else if (*resume) {
      const auto s = fhd::resume(resume_dir, steps, &std::cout);
      std::cout << "finished step " << s.last_step << " t " << s.time << '\n';
    } else if (*validate) {
      const auto which = fhd::parse_suite(suite);
      if (!which) {
        std::cerr << "unknown suite '" << suite << "'\n";
        return config_error;
      }
      const auto report = fhd::validate(*which, validate_seed);
      fhd::print_report(std::cout, report);
      return report.passed() ? ok : validation_failed;
    } else if (*analyze) {
      const auto config = fhd::load_config(config_path);
      const auto p = config.solver_parameters();
      std::vector<fhd::Trajectory> members;
      for (const auto& path : trajectories) members.push_back(fhd::read_trajectory(path));
      fhd::AnalysisOptions opt;
      opt.kT = p.kT;
      opt.density = p.density;
      opt.viscosity = p.viscosity;
      opt.radius = p.radius;
      opt.box_length = p.box_length;
      opt.discard = discard;
      opt.horizon = horizon;
      const auto s = fhd::analyze(members, opt);
      std::filesystem::create_directories(analyze_out);
      std::ofstream vacf(analyze_out + "/vacf.dat");
      fhd::write_vacf_table(vacf, s.vacf);
      std::ofstream diff(analyze_out + "/diffusion.dat");
      fhd::write_diffusion_table(diff, s.vacf, s.running_diffusion);
      std::ofstream summary(analyze_out + "/summary.txt");
      fhd::write_summary(summary, s);
      std::ofstream plot(analyze_out + "/vacf.gp");
      fhd::write_plot_script(plot, "vacf.dat", s.viscous_time);
      fhd::write_summary(std::cout, s);
      if (!s.drag_correction) {
        std::cerr << "drag correction undefined: D = " << s.diffusion << " <= 0\n";
        return other;
      }
    }
  } catch (const fhd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const fhd::StabilityError& e) {
    std::cerr << "stability check failed: " << e.what() << '\n';
    return stability_error;
  } catch (const fhd::SolverDiverged& e) {
    std::cerr << "solver diverged: " << e.what() << '\n';
    return solver_diverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return other;
  }
  return ok;
}
