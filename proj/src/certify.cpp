#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "wgeo/simplex.hpp"
#include "wgeo/solver.hpp"

namespace wgeo {

namespace {

void check_path(const WeightedGraph& G, const DiscretePath& path) {
  if (path.K < 1 || path.rho.rows() != path.K + 1 || path.rho.cols() != G.n() ||
      path.m.rows() != path.K || path.m.cols() != G.num_edges()) {
    throw std::invalid_argument("path does not match graph");
  }
}

void check_dual(const DiscretePath& path, const DualPath& dual) {
  const int K = path.K;
  const int n = path.n();
  if (dual.lambda.rows() != K + 1 || dual.lambda.cols() != n ||
      dual.abs_rate.rows() != K || dual.abs_rate.cols() != n ||
      dual.jump.rows() != K || dual.jump.cols() != n ||
      dual.jump_flag.rows() != K || dual.jump_flag.cols() != n ||
      dual.mid.rows() != K || dual.mid.cols() != n) {
    throw std::invalid_argument("dual does not match path");
  }
}

// Unweighted Laplacian sum_e w_e (grad) restricted to 1-perp, factorized
// once for repeated least-norm solves.
struct FlatLaplacian {
  Eigen::LDLT<Matrix> ldlt;
  int n;
  explicit FlatLaplacian(const WeightedGraph& G) : n(G.n()) {
    Matrix L = Matrix::Constant(n, n, 1.0 / n);
    for (const Edge& e : G.edges()) {
      L(e.i, e.i) += e.w;
      L(e.j, e.j) += e.w;
      L(e.i, e.j) -= e.w;
      L(e.j, e.i) -= e.w;
    }
    ldlt.compute(L);
  }
};

Vector least_norm(const WeightedGraph& G, const FlatLaplacian& lap,
                  const Vector& rate) {
  // div(grad psi) = -L psi, so L psi = rate gives div(m) = -rate.
  const Vector rhs = rate.array() - rate.mean();
  const Vector psi = lap.ldlt.solve(rhs);
  Vector m(G.num_edges());
  for (int e = 0; e < G.num_edges(); ++e) {
    const Edge& ed = G.edges()[e];
    m[e] = G.sqrt_w(e) * (psi[ed.i] - psi[ed.j]);
  }
  return m;
}

Vector div_edges(const WeightedGraph& G, const Vector& m) {
  Vector d = Vector::Zero(G.n());
  for (int e = 0; e < G.num_edges(); ++e) {
    const Edge& ed = G.edges()[e];
    d[ed.i] -= G.sqrt_w(e) * m[e];
    d[ed.j] += G.sqrt_w(e) * m[e];
  }
  return d;
}

Vector grad_vec(const WeightedGraph& G, const Vector& phi) {
  Vector b(G.num_edges());
  for (int e = 0; e < G.num_edges(); ++e) {
    const Edge& ed = G.edges()[e];
    b[e] = G.sqrt_w(e) * (phi[ed.i] - phi[ed.j]);
  }
  return b;
}

double median_abs(const Matrix& a) {
  std::vector<double> v;
  v.reserve(a.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) v.push_back(std::abs(a.data()[k]));
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

double continuity_residual(const WeightedGraph& G, const DiscretePath& path) {
  check_path(G, path);
  double worst = 0.0;
  for (int k = 0; k < path.K; ++k) {
    const Vector rate = (path.rho.row(k + 1) - path.rho.row(k)).transpose() /
                        path.dt();
    const Vector r = rate + div_edges(G, path.m.row(k).transpose());
    worst = std::max(worst, r.lpNorm<Eigen::Infinity>());
  }
  return worst;
}

Vector momentum_from_rate(const WeightedGraph& G, const Vector& rate) {
  if (rate.size() != G.n()) {
    throw std::invalid_argument("momentum_from_rate: dimension mismatch");
  }
  FlatLaplacian lap(G);
  return least_norm(G, lap, rate);
}

void repair_continuity(const WeightedGraph& G, DiscretePath& path) {
  check_path(G, path);
  FlatLaplacian lap(G);
  for (int k = 0; k < path.K; ++k) {
    const Vector rate = (path.rho.row(k + 1) - path.rho.row(k)).transpose() /
                        path.dt();
    const Vector r = rate + div_edges(G, path.m.row(k).transpose());
    path.m.row(k) += least_norm(G, lap, r).transpose();
  }
}

DiscretePath feasible_path(const WeightedGraph& G, const Mobility& g,
                           const Vector& rho0, const Vector& rho1, int K) {
  const int n = G.n();
  validate_prob_vector(rho0, n, "rho0");
  validate_prob_vector(rho1, n, "rho1");
  if (K < 1) throw std::invalid_argument("feasible_path: K must be >= 1");
  const CgResult cg = c_g(g);
  if (cg.divergent) {
    throw std::invalid_argument("feasible_path: C_g must be finite");
  }

  // BFS spanning tree rooted at vertex 0.
  std::vector<int> parent(n, -1), parent_edge(n, -1), order;
  std::vector<int> seen(n, 0);
  order.push_back(0);
  seen[0] = 1;
  for (std::size_t h = 0; h < order.size(); ++h) {
    const int v = order[h];
    for (int e : G.incident(v)) {
      const int u = G.edges()[e].i == v ? G.edges()[e].j : G.edges()[e].i;
      if (!seen[u]) {
        seen[u] = 1;
        parent[u] = v;
        parent_edge[u] = e;
        order.push_back(u);
      }
    }
  }
  // Net upward flow out of each subtree.
  Vector up = rho0 - rho1;
  for (int h = n - 1; h > 0; --h) up[parent[order[h]]] += up[order[h]];

  struct Move {
    int from, to, edge;
    double amount;
  };
  std::vector<Move> moves;
  for (int h = n - 1; h > 0; --h) {
    const int v = order[h];
    if (up[v] > 0.0) moves.push_back({v, parent[v], parent_edge[v], up[v]});
  }
  for (int h = 1; h < n; ++h) {
    const int v = order[h];
    if (up[v] < 0.0) moves.push_back({parent[v], v, parent_edge[v], -up[v]});
  }

  DiscretePath path;
  path.K = K;
  path.rho.resize(K + 1, n);
  path.m = Matrix::Zero(K, G.num_edges());
  if (moves.empty()) {
    for (int k = 0; k <= K; ++k) path.rho.row(k) = rho0.transpose();
    return path;
  }

  const int M = static_cast<int>(moves.size());
  // Start states of every move.
  std::vector<Vector> start(M + 1, rho0);
  for (int j = 0; j < M; ++j) {
    start[j + 1] = start[j];
    start[j + 1][moves[j].from] -= moves[j].amount;
    start[j + 1][moves[j].to] += moves[j].amount;
    start[j + 1][moves[j].from] = std::max(start[j + 1][moves[j].from], 0.0);
  }
  // State and cumulative transfers (in the from -> to direction) at time t.
  auto state_at = [&](double t, Vector& rho, std::vector<double>& moved) {
    moved.assign(M, 0.0);
    const double pos = std::clamp(t, 0.0, 1.0) * M;
    int j = std::min(static_cast<int>(std::floor(pos)), M);
    for (int q = 0; q < std::min(j, M); ++q) moved[q] = moves[q].amount;
    if (j >= M) {
      rho = rho1;
      return;
    }
    rho = start[j];
    const double tau = pos - j;
    if (tau <= 0.0) return;
    const Move& mv = moves[j];
    const double S = rho[mv.from] + rho[mv.to];
    const double x0 = rho[mv.from] / S;
    const double x1 = std::max(rho[mv.from] - mv.amount, 0.0) / S;
    double x;
    if (g.kind() == MobilityKind::arithmetic) {
      x = x0 + tau * (x1 - x0);
    } else {
      const double G0 = g_primitive(g, x0);
      const double G1 = g_primitive(g, x1);
      x = g_primitive_inverse(g, G0 + tau * (G1 - G0), cg.value);
    }
    moved[j] = rho[mv.from] - S * x;
    rho[mv.from] = S * x;
    rho[mv.to] = S * (1.0 - x);
  };

  std::vector<std::vector<double>> moved(K + 1);
  for (int k = 0; k <= K; ++k) {
    Vector rho;
    state_at(static_cast<double>(k) / K, rho, moved[k]);
    path.rho.row(k) = rho.transpose();
  }
  path.rho.row(0) = rho0.transpose();
  path.rho.row(K) = rho1.transpose();
  const double dt = path.dt();
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < M; ++j) {
      const double T = moved[k + 1][j] - moved[k][j];
      if (T == 0.0) continue;
      const Move& mv = moves[j];
      const Edge& ed = G.edges()[mv.edge];
      // Mass leaving vertex i along {i, j} gives m_ij = -T / (dt sqrt(w)).
      const double sign = mv.from == ed.i ? -1.0 : 1.0;
      path.m(k, mv.edge) += sign * T / (dt * G.sqrt_w(mv.edge));
    }
  }
  return path;
}

void flag_jumps(DualPath& dual, double jump_abs) {
  const int K = dual.K();
  const Matrix inc = dual.lambda.bottomRows(K) - dual.lambda.topRows(K);
  const double med = median_abs(inc);
  dual.jump_flag.setConstant(K, inc.cols(), false);
  for (int k = 0; k < K; ++k) {
    for (Eigen::Index i = 0; i < inc.cols(); ++i) {
      const double a = std::abs(inc(k, i));
      dual.jump_flag(k, i) = a > 10.0 * med && a > jump_abs;
    }
  }
}

DualPath dual_from_nodes(const WeightedGraph& G, const Mobility& g,
                         const DiscretePath& path, const Matrix& lambda,
                         double jump_abs) {
  check_path(G, path);
  const int K = path.K;
  const int n = G.n();
  if (lambda.rows() != K + 1 || lambda.cols() != n) {
    throw std::invalid_argument("dual_from_nodes: lambda does not match path");
  }
  DualPath dual;
  dual.lambda = lambda;
  dual.abs_rate = (lambda.bottomRows(K) - lambda.topRows(K)) * K;
  dual.jump = Matrix::Zero(K, n);
  flag_jumps(dual, jump_abs);
  const double dt = path.dt();
  for (int k = 0; k < K; ++k) {
    if (!dual.jump_flag.row(k).any()) continue;
    Vector phi = lambda.row(k).transpose();
    for (int i = 0; i < n; ++i) {
      if (!dual.jump_flag(k, i)) phi[i] += 0.5 * dt * dual.abs_rate(k, i);
    }
    const Vector mid = 0.5 * (path.node(k) + path.node(k + 1));
    for (int i = 0; i < n; ++i) {
      if (!dual.jump_flag(k, i)) continue;
      double flow = 0.0;
      for (int e : G.incident(i)) {
        const Edge& ed = G.edges()[e];
        const int j = ed.i == i ? ed.j : ed.i;
        const double d = phi[i] - phi[j];
        flow -= 0.5 * ed.w *
                g.partial1(std::max(mid[i], 1e-14), std::max(mid[j], 1e-14)) *
                d * d;
      }
      const double inc = lambda(k + 1, i) - lambda(k, i);
      const double rate = std::max(flow, inc / dt);
      dual.abs_rate(k, i) = rate;
      dual.jump(k, i) = inc - dt * rate;
    }
  }
  dual.reset_mid();
  return dual;
}

DualPath dual_from_multipliers(const WeightedGraph& G, const Mobility& g,
                               const DiscretePath& path, const Matrix& mu,
                               double jump_abs) {
  check_path(G, path);
  const int K = path.K;
  const int n = G.n();
  const int E = G.num_edges();
  if (mu.rows() != K || mu.cols() != n) {
    throw std::invalid_argument("dual_from_multipliers: mu does not match path");
  }
  const double dt = path.dt();
  // Left and right sensitivities of each interval to its end nodes:
  // mu^k + dt L^k is the right limit at node k, mu^k - dt R^k the left
  // limit at node k+1.
  Matrix left = Matrix::Zero(K, n), right = Matrix::Zero(K, n);
  for (int k = 0; k < K; ++k) {
    const Vector mid = 0.5 * (path.node(k) + path.node(k + 1));
    for (int e = 0; e < E; ++e) {
      const Edge& ed = G.edges()[e];
      const double b = G.sqrt_w(e) * (mu(k, ed.i) - mu(k, ed.j));
      if (b == 0.0) continue;
      const SegmentJet J =
          segment_jet(g, path.rho(k, ed.i), path.rho(k, ed.j),
                      path.rho(k + 1, ed.i), path.rho(k + 1, ed.j));
      const std::array<int, 2> ends{ed.i, ed.j};
      for (int side = 0; side < 2; ++side) {
        const int i = ends[side];
        const int j = ends[1 - side];
        double dl = J.grad[side];
        double dr = J.grad[side + 2];
        if (!std::isfinite(dl) || !std::isfinite(dr) || !(J.value > 0.0)) {
          const double d = g.partial1(mid[i] + 1e-12, mid[j]);
          if (!std::isfinite(d)) continue;
          dl = dr = 0.5 * d;
        }
        left(k, i) += 0.5 * b * b * dl;
        right(k, i) += 0.5 * b * b * dr;
      }
    }
  }
  DualPath dual;
  dual.lambda.resize(K + 1, n);
  for (int k = 0; k < K; ++k) dual.lambda.row(k) = mu.row(k) + dt * left.row(k);
  dual.lambda.row(K) = mu.row(K - 1) - dt * right.row(K - 1);
  dual.abs_rate = -(left + right);
  dual.jump = dual.lambda.bottomRows(K) - dual.lambda.topRows(K) - dt * dual.abs_rate;
  dual.mid = mu;
  flag_jumps(dual, jump_abs);
  return dual;
}

DualPath normalize_dual(const WeightedGraph& G, const Mobility& g,
                        const DualPath& dual) {
  const int K = dual.K();
  const double dt = 1.0 / K;
  DualPath out = dual;
  double alpha = 0.0;
  for (int k = 0; k < K; ++k) {
    const Vector a = dual.abs_rate.row(k).transpose();
    const double H = dual_h(G, g, a, gradient(G, dual.centre(k)));
    out.lambda.row(k) = dual.lambda.row(k).array() + alpha;
    out.abs_rate.row(k) = dual.abs_rate.row(k).array() - H;
    out.mid.row(k) = dual.mid.row(k).array() + (alpha - 0.5 * dt * H);
    alpha -= dt * H;
  }
  out.lambda.row(K) = dual.lambda.row(K).array() + alpha;
  return out;
}

EnergyProfile energy_profile(const WeightedGraph& G, const Mobility& g,
                             const DiscretePath& path) {
  check_path(G, path);
  EnergyProfile prof;
  prof.values.resize(path.K);
  double mean = 0.0;
  for (int k = 0; k < path.K; ++k) {
    const ExtReal F = interval_energy(G, g, path, k);
    if (F.infinite) prof.infinite = true;
    prof.values[k] = F.infinite ? 0.0 : F.value;
    mean += prof.values[k];
  }
  mean /= path.K;
  double var = 0.0;
  for (double v : prof.values) var += (v - mean) * (v - mean);
  var /= path.K;
  prof.drift = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  return prof;
}

CertificateReport certify(const WeightedGraph& G, const Mobility& g,
                          const DiscretePath& path, const DualPath& dual) {
  check_path(G, path);
  check_dual(path, dual);
  const int K = path.K;
  CertificateReport rep;
  const ExtReal A = action(G, g, path);
  rep.action_infinite = A.infinite;
  rep.action = A.value;
  rep.dual_value = dual.lambda.row(K).dot(path.rho.row(K)) -
                   dual.lambda.row(0).dot(path.rho.row(0));
  rep.gap = A.infinite ? std::numeric_limits<double>::infinity()
                       : rep.action - rep.dual_value;
  const Matrix cond = interval_conductances(G, g, path);
  for (int k = 0; k < K; ++k) {
    const Vector centre = dual.centre(k);
    const Vector b = grad_vec(G, centre);
    for (int e = 0; e < G.num_edges(); ++e) {
      if (cond(k, e) <= kTauG) continue;
      rep.velocity_residual = std::max(
          rep.velocity_residual, std::abs(path.m(k, e) - cond(k, e) * b[e]));
    }
    const Vector a = dual.abs_rate.row(k).transpose();
    rep.hj_residual = std::max(
        rep.hj_residual, std::abs(dual_h(G, g, a, gradient(G, centre))));
    if (dual.jump_flag.row(k).any()) {
      ++rep.jump_nodes;
      const Vector J = dual.jump.row(k).transpose();
      const double pair = J.dot(path.rho.row(k + 1));
      rep.jump_residual =
          std::max({rep.jump_residual, std::abs(h_zero(J)), std::abs(pair)});
    }
    const double up =
        (dual.lambda.row(k + 1) - dual.lambda.row(k)).maxCoeff();
    rep.monotonicity_violation = std::max(rep.monotonicity_violation, up);
  }
  rep.energy_drift = energy_profile(G, g, path).drift;
  rep.advisory = poincare(G, g, path.node(0)) <= kTauG ||
                 poincare(G, g, path.node(K)) <= kTauG;
  return rep;
}

EdgeField hodge_lift(const WeightedGraph& G, const Mobility& g,
                     const Vector& rho, const Vector& h) {
  if (h.size() != G.n()) {
    throw std::invalid_argument("hodge_lift: dimension mismatch");
  }
  if (std::abs(h.sum()) > 1e-10 * std::max(1.0, h.lpNorm<1>())) {
    throw std::invalid_argument("hodge_lift: h must have zero sum");
  }
  if (poincare(G, g, rho) <= kTauG) {
    throw std::domain_error(
        "hodge_lift: gamma_P(rho) = 0, h is not representable");
  }
  const int n = G.n();
  Matrix L = weighted_laplacian(G, g, rho);
  L.array() += 1.0 / n;
  const Vector psi = L.ldlt().solve(Vector(h.array() - h.mean()));
  return gradient(G, psi);
}

}  // namespace wgeo
