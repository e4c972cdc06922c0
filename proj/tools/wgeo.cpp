#include <iostream>

#include <CLI11.hpp>

#include "wgeo/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Geodesics and the W_g metric on weighted graphs"};
  app.require_subcommand(1);
  wgeo::RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--graph", cfg.graph_path, "graph JSON file");
    sub->add_option("--mobility", cfg.mobility, "arithmetic, logarithmic or harmonic");
    sub->add_option("--rho0", cfg.rho0, "start density, inline list or file");
    sub->add_option("--rho1", cfg.rho1, "end density, inline list or file");
    sub->add_option("--K", cfg.K, "time intervals");
    sub->add_option("--tol", cfg.tol, "solver tolerance");
    sub->add_option("--max-iter", cfg.max_iter, "solver iteration cap");
    sub->add_option("--out", cfg.output_dir, "output directory");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_flag("-v,--verbose", cfg.verbose, "solver progress on stderr");
  };

  common(app.add_subcommand("dist", "print W_g and write report.json"));
  common(app.add_subcommand("geodesic", "dist plus trajectory, momentum and dual CSV"));
  common(app.add_subcommand("poincare", "gamma_P and g-components of --rho0"));
  CLI::App* cert = app.add_subcommand("certify", "check a trajectory and dual pair");
  common(cert);
  cert->add_option("--in", cfg.input_dir, "directory holding the CSV files");
  CLI::App* orc = app.add_subcommand("oracle", "reference geodesics");
  common(orc);
  orc->add_option("case", cfg.oracle_case, "two-vertex, boundary3 or ode")
      ->required()
      ->check(CLI::IsMember({"two-vertex", "boundary3", "ode"}));
  orc->add_option("--omega", cfg.omega, "edge weight for two-vertex");
  orc->add_option("--delta1", cfg.delta1, "initial half window for ode");
  orc->add_option("--step", cfg.step, "RK4 step for ode");
  CLI::App* aud = app.add_subcommand("audit", "randomized mobility audit");
  common(aud);
  aud->add_option("--samples", cfg.samples, "sample count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : wgeo::kExitInvalid;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return wgeo::run(cfg, std::cout, std::cerr);
}
