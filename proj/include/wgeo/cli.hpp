#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace wgeo {

enum ExitCode { kExitOk = 0, kExitInvalid = 2, kExitNotConverged = 3 };

struct RunConfig {
  std::string command;      // dist, geodesic, poincare, certify, oracle, audit
  std::string oracle_case;  // two-vertex, boundary3, ode
  std::string graph_path;
  std::string mobility = "arithmetic";
  std::string rho0;
  std::string rho1;
  int K = 64;
  double tol = 1e-7;
  int max_iter = 20000;
  std::string output_dir = ".";
  std::string input_dir;  // certify; defaults to output_dir
  std::uint64_t seed = 1;
  double omega = 1.0;     // two-vertex oracle
  double delta1 = 0.05;   // ode oracle
  double step = 1e-4;     // ode oracle
  int samples = 1000;     // audit
  bool verbose = false;
};

/// Runs one command. Human-readable output goes to out, diagnostics to err.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace wgeo
