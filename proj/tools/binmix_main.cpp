#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "binmix/common.hpp"
#include "binmix/io_cli.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw binmix::IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw binmix::IoError("cannot write " + path);
  out << text;
  if (!out) throw binmix::IoError("write failure on " + path);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staggered-grid simulator for binary compressible mixtures"};
  app.require_subcommand(1);

  std::string config_path, out_override, axis = "time", scales_path,
                           params_path, out_path;
  std::vector<double> levels;
  double kmin = 1.0, kmax = 100.0;
  int samples = 64, contour_n = 128;
  bool no_hydro = false, full_scale = false;

  CLI::App* cmd_run = app.add_subcommand("run", "advance a configured problem");
  cmd_run->add_option("--config", config_path, "config file")->required();
  cmd_run->add_option("--out", out_override, "override the output directory");
  cmd_run->add_flag("--no-hydro", no_hydro, "freeze the velocity at zero");
  cmd_run->add_flag("--full-scale", full_scale,
                    "apply the config's full-scale overrides");

  CLI::App* cmd_refine =
      app.add_subcommand("refine", "run a convergence study");
  cmd_refine->add_option("--config", config_path, "config file")->required();
  cmd_refine->add_option("--axis", axis, "time or space")->required();
  cmd_refine->add_option("--levels", levels, "comma-separated levels")
      ->required()
      ->delimiter(',');
  cmd_refine->add_option("--out", out_path, "write the table here");

  CLI::App* cmd_disp =
      app.add_subcommand("dispersion", "tabulate the linear growth modes");
  cmd_disp->add_option("--config", config_path, "config file")->required();
  cmd_disp->add_option("--kmin", kmin, "smallest wave number")->required();
  cmd_disp->add_option("--kmax", kmax, "largest wave number")->required();
  cmd_disp->add_option("--samples", samples, "number of rows")->required();
  cmd_disp->add_option("--out", out_path, "write the CSV here");

  CLI::App* cmd_nondim =
      app.add_subcommand("nondim", "reduce physical parameters");
  cmd_nondim->add_option("--scales", scales_path, "characteristic scales file")
      ->required();
  cmd_nondim->add_option("--params", params_path, "physical parameters file")
      ->required();

  CLI::App* cmd_contour = app.add_subcommand(
      "eqcontour", "tabulate the tangent-shifted bulk energy");
  cmd_contour->add_option("--config", config_path, "config file")->required();
  cmd_contour->add_option("--grid", contour_n, "contour grid size");
  cmd_contour->add_option("--out", out_path, "write the CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_run->parsed()) {
      binmix::RunConfig c = binmix::load_config(config_path);
      if (!out_override.empty()) c.output.dir = out_override;
      if (no_hydro) c.model.no_hydro = true;
      if (full_scale) binmix::apply_full_scale(c);
      const binmix::RunResult r = binmix::run(c);
      std::cout << "steps = " << r.steps << "\n"
                << "final_time = " << binmix::format_double(r.final_time) << "\n"
                << "final_energy = " << binmix::format_double(r.final_energy)
                << "\n"
                << "total_iterations = " << r.total_iterations << "\n"
                << "precond_rebuilds = " << r.precond_rebuilds << "\n";
    } else if (cmd_refine->parsed()) {
      const binmix::RunConfig c = binmix::load_config(config_path);
      const auto rows = binmix::refinement_study(c, axis, levels);
      emit(out_path, binmix::format_refinement_table(rows, axis));
    } else if (cmd_disp->parsed()) {
      const binmix::RunConfig c = binmix::load_config(config_path);
      emit(out_path, binmix::dispersion_csv(c, kmin, kmax, samples));
    } else if (cmd_nondim->parsed()) {
      const binmix::CharacteristicScales s =
          binmix::parse_scales(slurp(scales_path));
      const binmix::PhysicalParams p =
          binmix::parse_physical(slurp(params_path));
      std::cout << binmix::format_dimensionless(binmix::nondimensionalize(s, p));
    } else if (cmd_contour->parsed()) {
      const binmix::RunConfig c = binmix::load_config(config_path);
      emit(out_path, binmix::eqcontour_csv(c, contour_n));
    }
  } catch (const binmix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const binmix::SolveError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const binmix::PositivityError& e) {
    std::cerr << "positivity abort: " << e.what() << "\n";
    return 4;
  } catch (const binmix::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
