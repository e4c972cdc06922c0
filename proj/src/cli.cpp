#include "wgeo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "wgeo/io.hpp"
#include "wgeo/mobility.hpp"
#include "wgeo/oracle.hpp"
#include "wgeo/simplex.hpp"
#include "wgeo/solver.hpp"

namespace wgeo {

namespace {

namespace fs = std::filesystem;

Mobility load_mobility(const std::string& name) {
  Mobility g = Mobility::builtin(name);
  if (c_g(g).divergent) {
    throw std::invalid_argument("mobility " + name +
                                " has C_g = infinity; a finite C_g is required");
  }
  return g;
}

WeightedGraph load_graph(const RunConfig& c) {
  if (c.graph_path.empty()) throw std::invalid_argument("--graph is required");
  if (!fs::exists(c.graph_path)) {
    throw std::invalid_argument("graph file not found: " + c.graph_path);
  }
  return load_graph_json(c.graph_path);
}

Vector load_rho(const std::string& text, int n, const char* what) {
  if (text.empty()) throw std::invalid_argument(std::string("--") + what + " is required");
  const Vector rho = parse_vector(text);
  validate_prob_vector(rho, n, what);
  return rho;
}

std::string out_file(const RunConfig& c, const std::string& file) {
  return (fs::path(c.output_dir) / file).string();
}

double distance_of(const CertificateReport& r) {
  return r.action_infinite ? INFINITY : std::sqrt(2.0 * std::max(r.action, 0.0));
}

void emit_path(const RunConfig& c, const WeightedGraph& G, const DiscretePath& p,
               const DualPath& d) {
  write_trajectory_csv(out_file(c, "trajectory.csv"), p);
  write_momentum_csv(out_file(c, "momentum.csv"), G, p);
  write_dual_csv(out_file(c, "dual.csv"), d);
}

RunReport base_report(const RunConfig& c) {
  RunReport r;
  r.command = c.command;
  r.mobility = c.mobility;
  r.K = c.K;
  r.seed = c.seed;
  return r;
}

int solve_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const WeightedGraph G = load_graph(c);
  const Mobility g = load_mobility(c.mobility);
  const Vector rho0 = load_rho(c.rho0, G.n(), "rho0");
  const Vector rho1 = load_rho(c.rho1, G.n(), "rho1");
  SolverOptions opts;
  opts.K = c.K;
  opts.tol = c.tol;
  opts.max_iter = c.max_iter;
  opts.verbose = c.verbose;
  const GeodesicResult res = solve_geodesic(G, g, rho0, rho1, opts);

  RunReport rep = base_report(c);
  rep.cert = res.report;
  rep.distance = distance_of(res.report);
  rep.continuity_residual = continuity_residual(G, res.path);
  rep.primal_residual = res.primal_residual;
  rep.dual_residual = res.dual_residual;
  rep.converged = res.converged;
  rep.iterations = res.iterations;
  write_text(out_file(c, "report.json"), report_json(rep));
  if (c.command == "geodesic") emit_path(c, G, res.path, res.dual);

  out << "W_g " << format_double(rep.distance) << "\n";
  out << "gap " << format_double(rep.cert.gap) << "\n";
  if (!res.converged) {
    err << "solver did not converge in " << res.iterations << " iterations\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int poincare_command(const RunConfig& c, std::ostream& out) {
  const WeightedGraph G = load_graph(c);
  const Mobility g = load_mobility(c.mobility);
  const Vector rho = load_rho(c.rho0, G.n(), "rho0");
  const double gamma = poincare(G, g, rho);
  const ComponentPartition part = g_components(G, g, rho);

  auto one_based = [](std::vector<int> v) {
    for (int& i : v) ++i;
    return v;
  };
  nlohmann::ordered_json j;
  j["gamma_P"] = gamma;
  j["components"] = nlohmann::json::array();
  for (const auto& comp : part.components) j["components"].push_back(one_based(comp));
  j["unassigned"] = one_based(part.unassigned);
  j["isolated_mass"] = one_based(part.isolated_mass);
  write_text(out_file(c, "poincare.json"), j.dump(2) + "\n");

  out << "gamma_P " << format_double(gamma) << "\n";
  out << "components " << j["components"].dump() << "\n";
  return kExitOk;
}

int certify_command(const RunConfig& c, std::ostream& out) {
  const WeightedGraph G = load_graph(c);
  const Mobility g = load_mobility(c.mobility);
  const fs::path dir(c.input_dir.empty() ? c.output_dir : c.input_dir);
  const DiscretePath p = read_path_csv((dir / "trajectory.csv").string(),
                                       (dir / "momentum.csv").string(), G);
  const DualPath d = read_dual_csv((dir / "dual.csv").string(), G.n());
  if (d.K() != p.K) throw std::invalid_argument("dual and trajectory grids differ");

  RunReport rep = base_report(c);
  rep.K = p.K;
  rep.cert = certify(G, g, p, d);
  rep.distance = distance_of(rep.cert);
  rep.continuity_residual = continuity_residual(G, p);
  write_text(out_file(c, "certificate.json"), report_json(rep));
  out << "action " << format_double(rep.cert.action) << "\n";
  out << "gap " << format_double(rep.cert.gap) << "\n";
  return kExitOk;
}

int oracle_command(const RunConfig& c, std::ostream& out) {
  const std::string& which = c.oracle_case;
  RunReport rep = base_report(c);
  if (which == "two-vertex" || which == "boundary3") {
    const Mobility g = load_mobility(c.mobility);
    OracleResult res = [&] {
      if (which == "boundary3") return three_vertex_boundary(g, c.K);
      const Vector r0 = c.rho0.empty() ? Vector::Unit(2, 0) : load_rho(c.rho0, 2, "rho0");
      const Vector r1 = c.rho1.empty() ? Vector::Unit(2, 1) : load_rho(c.rho1, 2, "rho1");
      return two_vertex_geodesic(g, c.omega, r0[0], r1[0], c.K);
    }();
    rep.cert = certify(res.graph, g, res.path, res.dual);
    rep.distance = std::sqrt(res.w_squared);
    rep.continuity_residual = continuity_residual(res.graph, res.path);
    emit_path(c, res.graph, res.path, res.dual);
    write_text(out_file(c, "report.json"), report_json(rep));
    out << "W_squared " << format_double(res.w_squared) << "\n";
    return kExitOk;
  }
  if (which == "ode") {
    rep.mobility = "arithmetic";
    const OdeGeodesic res = ode_boundary_geodesic(c.delta1, c.step, c.K);
    const Mobility g = Mobility::builtin("arithmetic");
    rep.cert = certify(res.graph, g, res.path, res.dual);
    rep.distance = distance_of(rep.cert);
    rep.continuity_residual = continuity_residual(res.graph, res.path);
    emit_path(c, res.graph, res.path, res.dual);
    write_text(out_file(c, "report.json"), report_json(rep));

    const OdeChecks& k = res.checks;
    nlohmann::ordered_json j;
    j["delta1"] = k.delta1;
    j["halvings"] = k.halvings;
    j["conserved_drift"] = k.conserved_drift;
    j["hamiltonian_residual"] = k.hamiltonian_residual;
    j["hj_residual"] = k.hj_residual;
    j["action"] = k.action;
    j["dual_value"] = k.dual_value;
    j["min_rho1"] = k.min_rho1;
    j["min_rho1_time"] = k.min_rho1_time;
    j["qddot1_at_zero"] = k.qddot1_at_zero;
    j["min_qddot1"] = k.min_qddot1;
    j["q1_lower_bound_slack"] = k.q1_lower_bound_slack;
    j["window_ok"] = k.window_ok;
    j["monotone"] = k.monotone;
    write_text(out_file(c, "ode_checks.json"), j.dump(2) + "\n");
    out << "action " << format_double(k.action) << "\n";
    out << "dual_value " << format_double(k.dual_value) << "\n";
    return kExitOk;
  }
  throw std::invalid_argument("unknown oracle case: " + which);
}

int audit_command(const RunConfig& c, std::ostream& out) {
  const Mobility g = Mobility::builtin(c.mobility);
  const AuditReport a = audit(g, c.samples, c.seed);
  nlohmann::ordered_json j;
  j["mobility"] = c.mobility;
  j["seed"] = c.seed;
  j["samples"] = a.samples;
  j["symmetry"] = a.symmetry;
  j["homogeneity"] = a.homogeneity;
  j["concavity"] = a.concavity;
  j["euler"] = a.euler;
  j["partial_fd"] = a.partial_fd;
  j["positivity"] = a.positivity;
  j["passed"] = a.passed;
  write_text(out_file(c, "audit.json"), j.dump(2) + "\n");
  out << (a.passed ? "passed" : "FAILED") << "\n";
  return a.passed ? kExitOk : kExitInvalid;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.K < 2) throw std::invalid_argument("K must be >= 2");
    fs::create_directories(config.output_dir);
    const std::string& cmd = config.command;
    if (cmd == "dist" || cmd == "geodesic") return solve_command(config, out, err);
    if (cmd == "poincare") return poincare_command(config, out);
    if (cmd == "certify") return certify_command(config, out);
    if (cmd == "oracle") return oracle_command(config, out);
    if (cmd == "audit") return audit_command(config, out);
    throw std::invalid_argument("unknown command: " + cmd);
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitInvalid;
}

}  // namespace wgeo
