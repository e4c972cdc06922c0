#include "wgeo/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wgeo/energy.hpp"
#include "wgeo/simplex.hpp"
#include "wgeo/solver.hpp"

namespace wgeo {

TwoVertexGeodesic::TwoVertexGeodesic(const Mobility& mob, double omega,
                                     double r0, double r1)
    : g(mob), omega12(omega), rho_start(r0), rho_end(r1) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("two_vertex: omega12 must be positive");
  }
  if (!(r0 >= 0.0 && r0 <= 1.0 && r1 >= 0.0 && r1 <= 1.0)) {
    throw std::invalid_argument("two_vertex: masses must lie in [0, 1]");
  }
  const CgResult cg = c_g(g);
  if (cg.divergent) throw std::invalid_argument("two_vertex: C_g is infinite");
  c_total = cg.value;
  C = G_fn(r1) - G_fn(r0);
}

double TwoVertexGeodesic::rho1(double t) const {
  if (t <= 0.0) return rho_start;
  if (t >= 1.0) return rho_end;
  if (C == 0.0) return rho_start;
  return g_primitive_inverse(g, G_fn(rho_start) + C * t, c_total);
}

namespace {

// Vertex-1 recursion for the interval potentials of a two-vertex path whose
// momenta are known: m = ghat sqrt(w) (mu_1 - mu_2).
Matrix two_vertex_multipliers(const WeightedGraph& G, const Mobility& g,
                              const DiscretePath& path) {
  const int K = path.K;
  const double dt = path.dt();
  const double sw = G.sqrt_w(0);
  const Matrix cond = interval_conductances(G, g, path);
  Vector diff(K), left(K), right(K);
  for (int k = 0; k < K; ++k) {
    diff[k] = cond(k, 0) > 0.0 ? path.m(k, 0) / (cond(k, 0) * sw) : 0.0;
    const SegmentJet J = segment_jet(g, path.rho(k, 0), path.rho(k, 1),
                                     path.rho(k + 1, 0), path.rho(k + 1, 1));
    const double b2 = G.edges()[0].w * diff[k] * diff[k];
    double dl = J.grad[0];
    double dr = J.grad[2];
    if (!std::isfinite(dl) || !std::isfinite(dr)) {
      const double d = g.partial1(0.5 * (path.rho(k, 0) + path.rho(k + 1, 0)) + 1e-12,
                                  0.5 * (path.rho(k, 1) + path.rho(k + 1, 1)));
      dl = dr = std::isfinite(d) ? 0.5 * d : 0.0;
    }
    left[k] = 0.5 * b2 * dl;
    right[k] = 0.5 * b2 * dr;
  }
  Matrix mu(K, 2);
  mu(0, 0) = 0.0;
  for (int k = 1; k < K; ++k) {
    mu(k, 0) = mu(k - 1, 0) - dt * (right[k - 1] + left[k]);
  }
  mu.col(1) = mu.col(0) - diff;
  return mu;
}

}  // namespace

OracleResult two_vertex_geodesic(const Mobility& g, double omega12,
                                 double rho0_1, double rho1_1, int K) {
  if (K < 1) throw std::invalid_argument("two_vertex: K must be >= 1");
  const TwoVertexGeodesic geo(g, omega12, rho0_1, rho1_1);
  OracleResult out{WeightedGraph(2, {{0, 1, omega12}}), {}, {}, geo.w_squared()};
  DiscretePath& path = out.path;
  path.K = K;
  path.rho.resize(K + 1, 2);
  for (int k = 0; k <= K; ++k) {
    const double r = geo.rho1(static_cast<double>(k) / K);
    path.rho(k, 0) = r;
    path.rho(k, 1) = 1.0 - r;
  }
  path.m.resize(K, 1);
  for (int k = 0; k < K; ++k) {
    // rho_1' = sqrt(w) m_12.
    path.m(k, 0) = (path.rho(k + 1, 0) - path.rho(k, 0)) * K / std::sqrt(omega12);
  }
  const Matrix mu = two_vertex_multipliers(out.graph, g, path);
  out.dual = normalize_dual(out.graph, g,
                            dual_from_multipliers(out.graph, g, path, mu, 1e-2));
  return out;
}

WeightedGraph boundary_graph() {
  return WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
}

OracleResult three_vertex_boundary(const Mobility& g, int K) {
  if (g.kind() != MobilityKind::arithmetic) {
    throw std::invalid_argument("boundary3: only the arithmetic mobility applies");
  }
  // Vertex 2 of the graph plays vertex 1 of the two-vertex problem.
  const OracleResult sub = two_vertex_geodesic(g, 1.0, 0.0, 0.5, K);
  OracleResult out{boundary_graph(), {}, {}, sub.w_squared};
  DiscretePath& path = out.path;
  path.K = K;
  path.rho = Matrix::Zero(K + 1, 3);
  path.rho.col(1) = sub.path.rho.col(0);
  path.rho.col(2) = sub.path.rho.col(1);
  path.m = Matrix::Zero(K, 2);
  path.m.col(1) = sub.path.m.col(0);

  // Vertex 1 copies vertex 2, so grad on {1,2} vanishes.
  DualPath& d = out.dual;
  d.lambda.resize(K + 1, 3);
  d.abs_rate.resize(K, 3);
  d.jump.resize(K, 3);
  d.mid.resize(K, 3);
  for (int c = 0; c < 2; ++c) {
    d.lambda.col(c + 1) = sub.dual.lambda.col(c);
    d.abs_rate.col(c + 1) = sub.dual.abs_rate.col(c);
    d.jump.col(c + 1) = sub.dual.jump.col(c);
    d.mid.col(c + 1) = sub.dual.mid.col(c);
  }
  d.lambda.col(0) = d.lambda.col(1);
  d.abs_rate.col(0) = d.abs_rate.col(1);
  d.jump.col(0) = d.jump.col(1);
  d.mid.col(0) = d.mid.col(1);
  flag_jumps(d, 1e-2);
  return out;
}

double reduced_lagrangian_l0(double q1, double q3, double u1, double u3) {
  const double a = 1.0 - q3;
  const double b = 1.0 - q1;
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("reduced_lagrangian_l0: nonpositive denominator");
  }
  return u1 * u1 / a + u3 * u3 / b;
}

namespace {

// (q1, q3, qdot1, qdot3, l1)
using State = std::array<double, 5>;

State rhs(const State& y) {
  const double q1 = y[0], q3 = y[1], p1 = y[2], p3 = y[3];
  const double a = 1.0 - q3;
  const double b = 1.0 - q1;
  return {p1, p3, -p1 * p3 / a + 0.5 * p3 * p3 * a / (b * b),
          -p1 * p3 / b + 0.5 * p1 * p1 * b / (a * a), -p1 * p1 / (a * a)};
}

State rk4(const State& y, double h) {
  auto axpy = [](const State& u, double c, const State& v) {
    State w;
    for (int i = 0; i < 5; ++i) w[i] = u[i] + c * v[i];
    return w;
  };
  const State k1 = rhs(y);
  const State k2 = rhs(axpy(y, 0.5 * h, k1));
  const State k3 = rhs(axpy(y, 0.5 * h, k2));
  const State k4 = rhs(axpy(y, h, k3));
  State out;
  for (int i = 0; i < 5; ++i) {
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

struct Lifted {
  Vector rho, lambda, rho_dot, lambda_dot;  // in rescaled time s
};

Lifted lift(const State& y, double delta1) {
  const double q1 = y[0], q3 = y[1], p1 = y[2], p3 = y[3], l1 = y[4];
  const double a = 1.0 - q3;
  const double b = 1.0 - q1;
  const State d = rhs(y);
  const double l2 = l1 - 2.0 * p1 / a;
  const double l3 = l2 + 2.0 * p3 / b;
  const double dl1 = d[4];
  const double dl2 = dl1 - 2.0 * (d[2] / a + p1 * p3 / (a * a));
  const double dl3 = dl2 + 2.0 * (d[3] / b + p3 * p1 / (b * b));
  const double c = 2.0 * delta1;
  Lifted L;
  L.rho = Vector(3);
  L.rho << q1, 1.0 - q1 - q3, q3;
  L.rho_dot = Vector(3);
  L.rho_dot << c * p1, -c * (p1 + p3), c * p3;
  L.lambda = Vector(3);
  L.lambda << c * l1, c * l2, c * l3;
  L.lambda_dot = Vector(3);
  L.lambda_dot << c * c * dl1, c * c * dl2, c * c * dl3;
  return L;
}

struct Trajectory {
  std::vector<State> states;  // fine grid from -delta1 to delta1
  int per_interval = 0;
};

Trajectory integrate(double delta1, double step, int K) {
  const double half = delta1 / K;  // half of one coarse interval
  const int N = std::max(1, static_cast<int>(std::ceil(half / step - 1e-9)));
  const double h = half / N;
  const int side = N * K;  // fine steps on each side of t = 0
  Trajectory tr;
  tr.per_interval = 2 * N;
  tr.states.resize(2 * side + 1);
  const State y0{0.0, 0.5, 0.0, 1.0, 0.0};
  tr.states[side] = y0;
  State y = y0;
  for (int j = 1; j <= side; ++j) {
    y = rk4(y, h);
    tr.states[side + j] = y;
  }
  y = y0;
  for (int j = 1; j <= side; ++j) {
    y = rk4(y, -h);
    tr.states[side - j] = y;
  }
  return tr;
}

}  // namespace

OdeGeodesic ode_boundary_geodesic(double delta1, double step, int K) {
  if (!(delta1 > 0.0) || delta1 > 0.05) {
    throw std::invalid_argument("ode: delta1 must lie in (0, 0.05]");
  }
  if (!(step > 0.0)) throw std::invalid_argument("ode: step must be positive");
  if (K < 2 || K % 2 != 0) throw std::invalid_argument("ode: K must be even");
  const Mobility g = Mobility::builtin("arithmetic");

  int halvings = 0;
  Trajectory tr;
  double min_qdd = 0.0;
  for (;; ++halvings) {
    tr = integrate(delta1, step, K);
    bool ok = true;
    min_qdd = std::numeric_limits<double>::infinity();
    for (const State& y : tr.states) {
      min_qdd = std::min(min_qdd, rhs(y)[2]);
      ok = ok && std::abs(y[0]) <= 0.085 && y[1] >= 0.48 && y[1] <= 0.62;
    }
    ok = ok && min_qdd >= 0.1;
    if (ok) break;
    if (delta1 < 1e-4) throw std::runtime_error("ode: window bounds never hold");
    delta1 *= 0.5;
  }

  OdeGeodesic out{boundary_graph(), {}, {}, {}};
  OdeChecks& ck = out.checks;
  ck.delta1 = delta1;
  ck.halvings = halvings;
  ck.window_ok = true;
  ck.min_qddot1 = min_qdd;
  ck.qddot1_at_zero = rhs(State{0.0, 0.5, 0.0, 1.0, 0.0})[2];
  const int side = static_cast<int>(tr.states.size()) / 2;
  const double h = delta1 / side;

  ck.q1_lower_bound_slack = std::numeric_limits<double>::infinity();
  ck.min_rho1 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < tr.states.size(); ++j) {
    const State& y = tr.states[j];
    const double t = (static_cast<double>(j) - side) * h;
    ck.conserved_drift = std::max(
        ck.conserved_drift, std::abs(reduced_lagrangian_l0(y[0], y[1], y[2], y[3]) - 1.0));
    ck.q1_lower_bound_slack = std::min(ck.q1_lower_bound_slack, y[0] - 0.05 * t * t);
    if (y[0] < ck.min_rho1) {
      ck.min_rho1 = y[0];
      ck.min_rho1_time = (t + delta1) / (2.0 * delta1);
    }
  }
  if (ck.conserved_drift > 1e-8) {
    throw std::runtime_error("ode: conserved quantity drifted beyond 1e-8; step too coarse");
  }

  const WeightedGraph& G = out.graph;
  std::vector<Lifted> fine;
  fine.reserve(tr.states.size());
  for (const State& y : tr.states) fine.push_back(lift(y, delta1));

  // Hamiltonian system and monotonicity on the fine grid.
  ck.monotone = true;
  for (std::size_t j = 0; j < fine.size(); ++j) {
    const Lifted& L = fine[j];
    Vector grad_phi = Vector::Zero(3), grad_rho = Vector::Zero(3);
    for (const Edge& e : G.edges()) {
      const double d = L.lambda[e.i] - L.lambda[e.j];
      const double ge = g(L.rho[e.i], L.rho[e.j]);
      grad_phi[e.i] += e.w * ge * d;
      grad_phi[e.j] -= e.w * ge * d;
      grad_rho[e.i] += 0.5 * e.w * g.partial1(L.rho[e.i], L.rho[e.j]) * d * d;
      grad_rho[e.j] += 0.5 * e.w * g.partial1(L.rho[e.j], L.rho[e.i]) * d * d;
    }
    ck.hamiltonian_residual =
        std::max({ck.hamiltonian_residual, (L.rho_dot - grad_phi).lpNorm<Eigen::Infinity>(),
                  (L.lambda_dot + grad_rho).lpNorm<Eigen::Infinity>()});
    if (j > 0 && (L.lambda - fine[j - 1].lambda).maxCoeff() > 0.0) ck.monotone = false;
  }

  // Action by composite Simpson in s on the fine grid.
  const double ds = 1.0 / (fine.size() - 1);
  double act = 0.0;
  for (std::size_t j = 0; j < fine.size(); ++j) {
    const Lifted& L = fine[j];
    // m_12 = rho_1', m_23 = -rho_3'.
    const double m12 = L.rho_dot[0];
    const double m23 = -L.rho_dot[2];
    const double F = m12 * m12 / g(L.rho[0], L.rho[1]) + m23 * m23 / g(L.rho[1], L.rho[2]);
    const double wgt = (j == 0 || j + 1 == fine.size()) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    act += wgt * 0.5 * F;
  }
  ck.action = act * ds / 3.0;
  ck.dual_value = fine.back().lambda.dot(fine.back().rho) -
                  fine.front().lambda.dot(fine.front().rho);

  // Coarse path and dual.
  const int stride = tr.per_interval;
  DiscretePath& path = out.path;
  path.K = K;
  path.rho.resize(K + 1, 3);
  DualPath& dual = out.dual;
  dual.lambda.resize(K + 1, 3);
  dual.mid.resize(K, 3);
  for (int k = 0; k <= K; ++k) {
    path.rho.row(k) = fine[k * stride].rho.transpose();
    dual.lambda.row(k) = fine[k * stride].lambda.transpose();
  }
  // The lifted masses sum to one exactly; clear rounding below zero.
  for (int k = 0; k <= K; ++k) {
    path.rho.row(k) = project_simplex(path.node(k)).transpose();
  }
  path.m.resize(K, G.num_edges());
  for (int k = 0; k < K; ++k) {
    const Vector rate = (path.node(k + 1) - path.node(k)) * K;
    path.m.row(k) = momentum_from_rate(G, rate).transpose();
  }
  dual.abs_rate = (dual.lambda.bottomRows(K) - dual.lambda.topRows(K)) * K;
  dual.jump = Matrix::Zero(K, 3);
  for (int k = 0; k < K; ++k) {
    const Lifted& c = fine[k * stride + stride / 2];
    dual.mid.row(k) = c.lambda.transpose();
    const double H = dual_h(G, g, c.lambda_dot, gradient(G, c.lambda));
    ck.hj_residual = std::max(ck.hj_residual, std::abs(H));
  }
  flag_jumps(dual, 1e-2);
  return out;
}

}  // namespace wgeo
