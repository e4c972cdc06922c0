#pragma once

#include "wgeo/graph.hpp"
#include "wgeo/mobility.hpp"
#include "wgeo/path.hpp"

namespace wgeo {

/// Closed-form geodesic on a single edge: rho_1(t) = G^{-1}(G(rho0_1) + C t).
struct TwoVertexGeodesic {
  Mobility g;
  double omega12 = 1.0;
  double rho_start = 1.0;  // mass on vertex 1 at t = 0
  double rho_end = 0.0;    // mass on vertex 1 at t = 1
  double c_total = 0.0;    // C_g
  double C = 0.0;          // G(rho_end) - G(rho_start)

  TwoVertexGeodesic(const Mobility& mob, double omega, double r0, double r1);
  double G_fn(double tau) const { return g_primitive(g, tau); }
  /// rho_1 at time t in [0, 1].
  double rho1(double t) const;
  double w_squared() const { return C * C / omega12; }
};

struct OracleResult {
  WeightedGraph graph;
  DiscretePath path;
  DualPath dual;
  double w_squared = 0.0;
};

/// Samples the closed-form geodesic on K intervals. The dual is the exact
/// multiplier of the discrete problem (the sampled path is its minimizer),
/// gauge-normalized.
OracleResult two_vertex_geodesic(const Mobility& g, double omega12,
                                 double rho0_1, double rho1_1, int K);

/// The fixed 3-vertex path graph 1-2-3 with unit weights and no edge {1,3}.
WeightedGraph boundary_graph();

/// (0,0,1) -> (0,1/2,1/2) under arithmetic g: rho_1 stays zero and the
/// remaining motion is the two-vertex geodesic on {2,3}.
OracleResult three_vertex_boundary(const Mobility& g, int K);

/// u_1^2/(1-q_3) + u_3^2/(1-q_1). Throws std::domain_error on a
/// nonpositive denominator.
double reduced_lagrangian_l0(double q1, double q3, double u1, double u3);

struct OdeChecks {
  double delta1 = 0.0;
  double conserved_drift = 0.0;     // max |L0 - 1|
  double hamiltonian_residual = 0.0;
  double hj_residual = 0.0;         // max over interval centres of |H|
  double action = 0.0;
  double dual_value = 0.0;
  double min_rho1 = 0.0;
  double min_rho1_time = 0.0;
  double qddot1_at_zero = 0.0;
  double min_qddot1 = 0.0;
  double q1_lower_bound_slack = 0.0;  // min over the window of q1 - 0.05 t^2
  bool window_ok = false;
  bool monotone = false;
  int halvings = 0;
};

struct OdeGeodesic {
  WeightedGraph graph;
  DiscretePath path;
  DualPath dual;
  OdeChecks checks;
};

/// Integrates the reduced geodesic equations from q(0) = (0, 1/2),
/// qdot(0) = (0, 1) over [-delta1, delta1] with RK4, lifts to the 3-vertex
/// boundary graph and rescales time to [0, 1]. delta1 is halved until the
/// window bounds and qddot_1 >= 0.1 hold. K must be even.
/// Throws std::invalid_argument on bad arguments and std::runtime_error if
/// the conserved quantity drifts beyond 1e-8.
OdeGeodesic ode_boundary_geodesic(double delta1 = 0.05, double step = 1e-4,
                                  int K = 64);

}  // namespace wgeo
