#pragma once

#include <string>
#include <vector>

#include "wgeo/energy.hpp"
#include "wgeo/graph.hpp"
#include "wgeo/mobility.hpp"
#include "wgeo/path.hpp"

namespace wgeo {

struct SolverOptions {
  int K = 64;
  double tol = 1e-7;
  int max_iter = 20000;
  double jump_abs = 1e-2;
  int check_every = 10;
  /// Finish with Newton steps on the detected support once the splitting
  /// residuals drop below 1e-2.
  bool polish = true;
  bool verbose = false;
};

struct CertificateReport {
  double action = 0.0;
  bool action_infinite = false;
  double dual_value = 0.0;
  double gap = 0.0;
  double velocity_residual = 0.0;
  double hj_residual = 0.0;
  double jump_residual = 0.0;
  int jump_nodes = 0;
  double monotonicity_violation = 0.0;
  double energy_drift = 0.0;
  /// Set when an endpoint has gamma_P = 0; the HJ part is then only advisory.
  bool advisory = false;
};

struct EnergyProfile {
  std::vector<double> values;
  double drift = 0.0;
  bool infinite = false;
};

struct GeodesicResult {
  DiscretePath path;
  DualPath dual;
  CertificateReport report;
  bool converged = false;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// max over nodes and vertices of |(rho^{k+1}-rho^k)/dt + div m^k|.
double continuity_residual(const WeightedGraph& G, const DiscretePath& path);

/// Least-norm edge values m with div_G(m) = -rate.
Vector momentum_from_rate(const WeightedGraph& G, const Vector& rate);

/// Replaces m by the closest momenta satisfying discrete continuity exactly.
void repair_continuity(const WeightedGraph& G, DiscretePath& path);

/// Concatenation of single-edge moves along a spanning tree, each following
/// the two-vertex geodesic reparametrization.
DiscretePath feasible_path(const WeightedGraph& G, const Mobility& g,
                           const Vector& rho0, const Vector& rho1, int K);

GeodesicResult solve_geodesic(const WeightedGraph& G, const Mobility& g,
                              const Vector& rho0, const Vector& rho1,
                              const SolverOptions& opts = {});

/// Flags increments with |d lambda_i| > 10 median and > jump_abs.
void flag_jumps(DualPath& dual, double jump_abs);

/// Builds a DualPath from node values alone: unflagged increments become
/// rates; flagged ones keep the Hamiltonian-flow rate of the path and move
/// the remainder into the jump.
DualPath dual_from_nodes(const WeightedGraph& G, const Mobility& g,
                         const DiscretePath& path, const Matrix& lambda,
                         double jump_abs);

/// Dual path from interval potentials mu (K x n) paired with the momenta,
/// m = ghat grad(mu^k). Node values add the interval's sensitivity to its
/// end densities; the remainder of each increment is left in jump.
DualPath dual_from_multipliers(const WeightedGraph& G, const Mobility& g,
                               const DiscretePath& path, const Matrix& mu,
                               double jump_abs);

/// Gauge shift by a common alpha(t) with alpha' = -H on every interval.
DualPath normalize_dual(const WeightedGraph& G, const Mobility& g,
                        const DualPath& dual);

CertificateReport certify(const WeightedGraph& G, const Mobility& g,
                          const DiscretePath& path, const DualPath& dual);

/// Minimal-norm w with h + div_rho(w) = 0. Throws std::domain_error when
/// gamma_P(rho) = 0.
EdgeField hodge_lift(const WeightedGraph& G, const Mobility& g,
                     const Vector& rho, const Vector& h);

EnergyProfile energy_profile(const WeightedGraph& G, const Mobility& g,
                             const DiscretePath& path);

}  // namespace wgeo
