#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "wgeo/simplex.hpp"
#include "wgeo/solver.hpp"

namespace wgeo {

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Block = std::array<double, 5>;  // ai, aj, bi, bj, s

constexpr double kActiveTol = 1e-15;

struct BlockProx {
  const Mobility& g;
  double dt;
  double r;

  SegmentJet jet(const std::array<double, 4>& x) const {
    return segment_jet(g, x[0], x[1], x[2], x[3]);
  }

  static bool usable(const SegmentJet& j) {
    if (!(j.value > 0.0) || !std::isfinite(j.value)) return false;
    for (double d : j.grad) {
      if (!std::isfinite(d)) return false;
    }
    return true;
  }

  // Proximal map of 1/2 dt s^2 / ghat(x) + r/2 |. - v|^2 with some of the
  // four density entries held fixed.
  Block operator()(const Block& v, const Block& warm,
                   const std::array<bool, 4>& free) const {
    Block out = v;
    std::array<double, 4> x0{v[0], v[1], v[2], v[3]};
    std::array<double, 4> x{};
    bool any_free = false;
    for (int q = 0; q < 4; ++q) {
      x[q] = free[q] ? std::max(warm[q], 0.0) : x0[q];
      any_free = any_free || free[q];
    }
    const double s0 = v[4];
    if (s0 == 0.0) {
      for (int q = 0; q < 4; ++q) out[q] = free[q] ? std::max(x0[q], 0.0) : x0[q];
      out[4] = 0.0;
      return out;
    }
    const double beta = dt / r;
    auto psi = [&](double t) { return 0.5 * dt * s0 * s0 / (t + beta); };
    auto objective = [&](const std::array<double, 4>& p, double t) {
      double f = psi(t);
      for (int q = 0; q < 4; ++q) f += 0.5 * r * (p[q] - x0[q]) * (p[q] - x0[q]);
      return f;
    };

    SegmentJet J = jet(x);
    if (!usable(J)) {
      if (!any_free) {
        out[4] = 0.0;
        return out;
      }
      double bump = 1e-12;
      for (int tries = 0; tries < 14 && !usable(J); ++tries, bump *= 10.0) {
        for (int q = 0; q < 4; ++q) {
          if (free[q]) x[q] = std::max(x[q], bump);
        }
        J = jet(x);
      }
      if (!usable(J)) {
        for (int q = 0; q < 4; ++q) out[q] = x[q];
        out[4] = 0.0;
        return out;
      }
    }
    if (any_free) {
      double f = objective(x, J.value);
      for (int it = 0; it < 60; ++it) {
        const double t = J.value + beta;
        const double d1 = -0.5 * dt * s0 * s0 / (t * t);
        const double d2 = dt * s0 * s0 / (t * t * t);
        std::array<double, 4> grad{};
        std::array<int, 4> idx{};
        int m = 0;
        double pg = 0.0;
        for (int q = 0; q < 4; ++q) {
          if (!free[q]) continue;
          grad[q] = d1 * J.grad[q] + r * (x[q] - x0[q]);
          if (x[q] <= kActiveTol && grad[q] > 0.0) continue;
          idx[m++] = q;
          pg = std::max(pg, std::abs(grad[q]));
        }
        if (m == 0) break;
        const double scale = r * (1.0 + std::abs(x0[0]) + std::abs(x0[1]) +
                                  std::abs(x0[2]) + std::abs(x0[3]));
        if (pg <= 1e-15 * scale) break;
        Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
        Eigen::Vector4d rhs = Eigen::Vector4d::Zero();
        bool finite = true;
        for (int a = 0; a < m; ++a) {
          rhs[a] = -grad[idx[a]];
          for (int b = 0; b < m; ++b) {
            const double h2 = J.hess[4 * idx[a] + idx[b]];
            finite = finite && std::isfinite(h2);
            H(a, b) = d2 * J.grad[idx[a]] * J.grad[idx[b]] + d1 * h2 +
                      (a == b ? r : 0.0);
          }
        }
        if (!finite) {
          for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
              H(a, b) = d2 * J.grad[idx[a]] * J.grad[idx[b]] + (a == b ? r : 0.0);
            }
          }
        }
        const Eigen::VectorXd d =
            H.topLeftCorner(m, m).ldlt().solve(rhs.head(m));
        double step = 1.0;
        bool accepted = false;
        std::array<double, 4> xn{};
        SegmentJet Jn;
        double fn = f;
        double moved = 0.0;
        for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
          xn = x;
          for (int a = 0; a < m; ++a) {
            xn[idx[a]] = std::max(x[idx[a]] + step * d[a], 0.0);
          }
          Jn = jet(xn);
          if (!usable(Jn)) continue;
          fn = objective(xn, Jn.value);
          double decrease = 0.0;
          for (int q = 0; q < 4; ++q) decrease += grad[q] * (xn[q] - x[q]);
          if (fn <= f + 1e-4 * decrease + 1e-16 * std::abs(f)) {
            accepted = true;
            moved = 0.0;
            for (int q = 0; q < 4; ++q) moved = std::max(moved, std::abs(xn[q] - x[q]));
            break;
          }
        }
        if (!accepted) break;
        x = xn;
        J = Jn;
        f = fn;
        if (moved <= 1e-15 * (1.0 + std::max({x[0], x[1], x[2], x[3]}))) break;
      }
    }
    for (int q = 0; q < 4; ++q) out[q] = x[q];
    out[4] = s0 * J.value / (J.value + beta);
    return out;
  }
};

// Index bookkeeping for the stacked unknowns: interior densities followed by
// all interval momenta.
struct Layout {
  int K, n, E;
  int rho_size() const { return (K - 1) * n; }
  int size() const { return rho_size() + K * E; }
  int rho_index(int k, int i) const { return (k - 1) * n + i; }
  int m_index(int k, int e) const { return rho_size() + k * E + e; }
  int rows() const { return K * n - 1; }
};


// Position of a block entry among the unknowns, or -1 for a fixed endpoint.
struct BlockMap {
  std::vector<std::array<int, 5>> var;
  std::vector<std::array<double, 4>> fixed;
};

BlockMap block_map(const WeightedGraph& G, const Layout& L, const Vector& rho0,
                   const Vector& rho1) {
  BlockMap bm;
  const int K = L.K;
  const int E = L.E;
  bm.var.resize(K * E);
  bm.fixed.resize(K * E);
  for (int k = 0; k < K; ++k) {
    for (int e = 0; e < E; ++e) {
      const Edge& ed = G.edges()[e];
      auto& v = bm.var[k * E + e];
      auto& f = bm.fixed[k * E + e];
      const std::array<int, 2> ends{ed.i, ed.j};
      for (int side = 0; side < 2; ++side) {
        const int i = ends[side];
        v[side] = k > 0 ? L.rho_index(k, i) : -1;
        f[side] = k > 0 ? 0.0 : rho0[i];
        v[side + 2] = k + 1 < K ? L.rho_index(k + 1, i) : -1;
        f[side + 2] = k + 1 < K ? 0.0 : rho1[i];
      }
      v[4] = L.m_index(k, e);
    }
  }
  return bm;
}

struct PolishResult {
  bool converged = false;
  double stationarity = std::numeric_limits<double>::infinity();
  double feasibility = std::numeric_limits<double>::infinity();
  Vector nu;  // continuity multipliers, one per row of A
};

// Newton's method on the smooth problem restricted to the current support:
// density entries at zero stay fixed unless their multiplier says otherwise.
PolishResult newton_polish(const Mobility& g, const Layout& L,
                           const BlockMap& bm, const Sparse& A,
                           const Vector& rhs, Vector& x, double tol,
                           bool verbose) {
  const int N = L.size();
  const int nb = static_cast<int>(bm.var.size());
  const double dt = 1.0 / L.K;
  PolishResult out;

  auto entry = [&](const Vector& xv, int b, int q) {
    const int v = bm.var[b][q];
    return v >= 0 ? xv[v] : bm.fixed[b][q];
  };
  auto objective = [&](const Vector& xv) {
    double f = 0.0;
    for (int b = 0; b < nb; ++b) {
      const double s = xv[bm.var[b][4]];
      if (s == 0.0) continue;
      const double gh = segment_conductance(g, entry(xv, b, 0), entry(xv, b, 1),
                                            entry(xv, b, 2), entry(xv, b, 3));
      if (!(gh > 0.0)) return std::numeric_limits<double>::infinity();
      f += 0.5 * dt * s * s / gh;
    }
    return f;
  };

  std::vector<char> fixed(N, 0);
  for (int v = 0; v < L.rho_size(); ++v) {
    if (x[v] <= 1e-11) {
      x[v] = 0.0;
      fixed[v] = 1;
    }
  }
  for (int b = 0; b < nb; ++b) {
    const double gh = segment_conductance(g, entry(x, b, 0), entry(x, b, 1),
                                          entry(x, b, 2), entry(x, b, 3));
    if (!(gh > kTauG)) {
      x[bm.var[b][4]] = 0.0;
      fixed[bm.var[b][4]] = 1;
    }
  }

  const Sparse At = A.transpose();
  Vector grad(N);
  std::vector<Eigen::Triplet<double>> trip;
  for (int it = 0; it < 80; ++it) {
    // Free unknowns and the constraint rows that still touch them.
    std::vector<int> col(N, -1), free_vars;
    for (int v = 0; v < N; ++v) {
      if (!fixed[v]) {
        col[v] = static_cast<int>(free_vars.size());
        free_vars.push_back(v);
      }
    }
    const int nf = static_cast<int>(free_vars.size());
    std::vector<int> row_of(A.rows(), -1);
    int nr = 0;
    for (int v : free_vars) {
      for (Sparse::InnerIterator itc(A, v); itc; ++itc) {
        if (row_of[itc.row()] < 0) row_of[itc.row()] = nr++;
      }
    }
    grad.setZero();
    trip.clear();
    bool finite = true;
    for (int b = 0; b < nb && finite; ++b) {
      const int mv = bm.var[b][4];
      const double s = x[mv];
      if (fixed[mv]) continue;
      const SegmentJet J = segment_jet(g, entry(x, b, 0), entry(x, b, 1),
                                       entry(x, b, 2), entry(x, b, 3));
      if (!(J.value > 0.0)) {
        finite = false;
        break;
      }
      const double ig = 1.0 / J.value;
      std::array<double, 5> gl{};
      std::array<double, 25> hl{};
      for (int a = 0; a < 4; ++a) {
        gl[a] = -0.5 * dt * s * s * ig * ig * J.grad[a];
        for (int c = 0; c < 4; ++c) {
          hl[5 * a + c] = dt * s * s * ig * ig * ig * J.grad[a] * J.grad[c] -
                          0.5 * dt * s * s * ig * ig * J.hess[4 * a + c];
        }
        hl[5 * a + 4] = hl[5 * 4 + a] = -dt * s * ig * ig * J.grad[a];
      }
      gl[4] = dt * s * ig;
      hl[24] = dt * ig;
      for (int a = 0; a < 5; ++a) {
        const int va = bm.var[b][a];
        if (va < 0 || fixed[va]) continue;
        if (!std::isfinite(gl[a])) finite = false;
        grad[va] += gl[a];
        for (int c = 0; c < 5; ++c) {
          const int vc = bm.var[b][c];
          if (vc < 0 || fixed[vc]) continue;
          if (!std::isfinite(hl[5 * a + c])) finite = false;
          trip.emplace_back(col[va], col[vc], hl[5 * a + c]);
        }
      }
    }
    if (!finite) return out;
    const Vector viol = A * x - rhs;
    double hscale = 0.0;
    for (const auto& t : trip) hscale = std::max(hscale, std::abs(t.value()));
    for (int c = 0; c < nf; ++c) trip.emplace_back(c, c, 1e-14 * (1.0 + hscale));
    for (int v : free_vars) {
      for (Sparse::InnerIterator itc(A, v); itc; ++itc) {
        const int r = row_of[itc.row()];
        trip.emplace_back(nf + r, col[v], itc.value());
        trip.emplace_back(col[v], nf + r, itc.value());
      }
    }
    for (int r = 0; r < nr; ++r) trip.emplace_back(nf + r, nf + r, -1e-15);
    Sparse KKT(nf + nr, nf + nr);
    KKT.setFromTriplets(trip.begin(), trip.end());
    Vector krhs(nf + nr);
    for (int c = 0; c < nf; ++c) krhs[c] = -grad[free_vars[c]];
    for (int r = 0; r < A.rows(); ++r) {
      if (row_of[r] >= 0) krhs[nf + row_of[r]] = -viol[r];
    }
    Eigen::SparseLU<Sparse> lu;
    lu.compute(KKT);
    if (lu.info() != Eigen::Success) return out;
    const Vector sol = lu.solve(krhs);
    if (!sol.allFinite()) return out;

    Vector nu = Vector::Zero(A.rows());
    for (int r = 0; r < A.rows(); ++r) {
      if (row_of[r] >= 0) nu[r] = sol[nf + row_of[r]];
    }
    Vector dx = Vector::Zero(N);
    for (int c = 0; c < nf; ++c) dx[free_vars[c]] = sol[c];
    // Stationarity with the multipliers of the current linearization.
    const Vector full = grad + At * nu;
    double stat = 0.0, gscale = 1e-300;
    for (int v : free_vars) {
      stat = std::max(stat, std::abs(full[v]));
      gscale = std::max(gscale, std::abs(grad[v]));
    }
    const double decrement = -grad.dot(dx);
    const double step_norm = dx.lpNorm<Eigen::Infinity>();
    out.feasibility = viol.lpNorm<Eigen::Infinity>();
    if (verbose) {
      std::fprintf(stderr, "newton %d  free %d  decrement %.3e  step %.3e  feas %.3e\n",
                   it, nf, decrement, step_norm, out.feasibility);
    }
    if (step_norm <= 1e-10 * (1.0 + x.lpNorm<Eigen::Infinity>()) &&
        out.feasibility <= 1e-11) {
      x += dx;
      for (int v = 0; v < L.rho_size(); ++v) x[v] = std::max(x[v], 0.0);
      // Converged on this support; check the sign of the bound multipliers.
      // Objective gradient at the fixed density entries.
      std::vector<double> fixed_grad(N, 0.0);
      for (int b = 0; b < nb; ++b) {
        const int mv = bm.var[b][4];
        const double sm = x[mv];
        if (sm == 0.0) continue;
        const SegmentJet J = segment_jet(g, entry(x, b, 0), entry(x, b, 1),
                                         entry(x, b, 2), entry(x, b, 3));
        for (int a = 0; a < 4; ++a) {
          const int va = bm.var[b][a];
          if (va < 0 || !fixed[va]) continue;
          if (!std::isfinite(J.grad[a])) {
            fixed_grad[va] = -std::numeric_limits<double>::infinity();
          } else {
            fixed_grad[va] -= 0.5 * dt * sm * sm / (J.value * J.value) * J.grad[a];
          }
        }
      }
      const Vector Atnu = At * nu;
      bool released = false;
      for (int v = 0; v < L.rho_size(); ++v) {
        if (!fixed[v]) continue;
        const double mult = fixed_grad[v] + Atnu[v];
        if (mult < -std::max(tol, 1e-10) * (1.0 + gscale)) {
          fixed[v] = 0;
          released = true;
        }
      }
      if (released) {
        // Freed entries may have a block with zero conductance nearby.
        for (int b = 0; b < nb; ++b) {
          const int mv = bm.var[b][4];
          if (!fixed[mv]) continue;
          for (int a = 0; a < 4; ++a) {
            const int va = bm.var[b][a];
            if (va >= 0 && !fixed[va]) fixed[mv] = 0;
          }
        }
        continue;
      }
      out.converged = true;
      out.stationarity = stat;
      out.nu = std::move(nu);
      return out;
    }

    // Largest step keeping every free density nonnegative.
    double amax = 1.0;
    int hit = -1;
    for (int v : free_vars) {
      if (v >= L.rho_size() || dx[v] >= 0.0) continue;
      const double a = -x[v] / dx[v];
      if (a < amax) {
        amax = a;
        hit = v;
      }
    }
    const double f0 = objective(x);
    double alpha = amax;
    Vector xn;
    bool accepted = false;
    const double slope = grad.dot(dx);
    for (int ls = 0; ls < 50; ++ls, alpha *= 0.5) {
      xn = x + alpha * dx;
      for (int v = 0; v < L.rho_size(); ++v) xn[v] = std::max(xn[v], 0.0);
      const double f1 = objective(xn);
      if (!std::isfinite(f1)) continue;
      if (out.feasibility > 1e-12 ||
          f1 <= f0 + 1e-4 * alpha * std::min(slope, 0.0) + 1e-15 * std::abs(f0)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return out;
    if (alpha == amax && hit >= 0 && amax < 1.0) {
      xn[hit] = 0.0;
      fixed[hit] = 1;
    }
    x = xn;
  }
  return out;
}

}  // namespace

GeodesicResult solve_geodesic(const WeightedGraph& G, const Mobility& g,
                              const Vector& rho0, const Vector& rho1,
                              const SolverOptions& opts) {
  const int n = G.n();
  const int K = opts.K;
  const int E = G.num_edges();
  if (K < 2) throw std::invalid_argument("solve_geodesic: K must be >= 2");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_geodesic: tol must be > 0");
  validate_prob_vector(rho0, n, "rho0");
  validate_prob_vector(rho1, n, "rho1");
  if (rho0 == rho1) {
    GeodesicResult res;
    res.path.K = K;
    res.path.rho = rho0.transpose().replicate(K + 1, 1);
    res.path.m = Matrix::Zero(K, E);
    res.dual = normalize_dual(G, g, dual_from_multipliers(G, g, res.path, Matrix::Zero(K, n), opts.jump_abs));
    res.report = certify(G, g, res.path, res.dual);
    res.converged = true;
    return res;
  }
  const Layout L{K, n, E};
  const double dt = 1.0 / K;

  // Continuity rows (k, i): rho^{k+1}_i - rho^k_i + dt div(m^k)_i = rhs.
  std::vector<Eigen::Triplet<double>> trip;
  Vector rhs = Vector::Zero(L.rows());
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < n; ++i) {
      const int row = k * n + i;
      if (row >= L.rows()) continue;
      if (k + 1 < K) trip.emplace_back(row, L.rho_index(k + 1, i), 1.0);
      else rhs[row] -= rho1[i];
      if (k > 0) trip.emplace_back(row, L.rho_index(k, i), -1.0);
      else rhs[row] += rho0[i];
    }
    for (int e = 0; e < E; ++e) {
      const Edge& ed = G.edges()[e];
      const double c = dt * G.sqrt_w(e);
      if (k * n + ed.i < L.rows()) trip.emplace_back(k * n + ed.i, L.m_index(k, e), -c);
      if (k * n + ed.j < L.rows()) trip.emplace_back(k * n + ed.j, L.m_index(k, e), c);
    }
  }
  Sparse A(L.rows(), L.size());
  A.setFromTriplets(trip.begin(), trip.end());

  Vector dinv = Vector::Ones(L.size());
  for (int k = 1; k < K; ++k) {
    for (int i = 0; i < n; ++i) {
      dinv[L.rho_index(k, i)] = 1.0 / (2.0 * G.incident(i).size());
    }
  }
  const Sparse S = A * dinv.asDiagonal() * A.transpose();
  Eigen::SimplicialLLT<Sparse> chol(S);
  if (chol.info() != Eigen::Success) {
    throw std::runtime_error("solve_geodesic: continuity system is singular");
  }

  const DiscretePath start = feasible_path(G, g, rho0, rho1, K);
  Vector x(L.size());
  for (int k = 1; k < K; ++k) {
    for (int i = 0; i < n; ++i) x[L.rho_index(k, i)] = start.rho(k, i);
  }
  for (int k = 0; k < K; ++k) {
    for (int e = 0; e < E; ++e) x[L.m_index(k, e)] = start.m(k, e);
  }

  const int nb = K * E;
  auto rho_at = [&](const Vector& xv, int k, int i) {
    if (k == 0) return rho0[i];
    if (k == K) return rho1[i];
    return xv[L.rho_index(k, i)];
  };
  auto lift = [&](const Vector& xv, std::vector<Block>& w) {
    for (int k = 0; k < K; ++k) {
      for (int e = 0; e < E; ++e) {
        const Edge& ed = G.edges()[e];
        w[k * E + e] = {rho_at(xv, k, ed.i), rho_at(xv, k, ed.j),
                        rho_at(xv, k + 1, ed.i), rho_at(xv, k + 1, ed.j),
                        xv[L.m_index(k, e)]};
      }
    }
  };
  // B^T applied to block values (fixed entries have no column).
  auto gather = [&](const std::vector<Block>& v, Vector& out) {
    out.setZero(L.size());
    for (int k = 0; k < K; ++k) {
      for (int e = 0; e < E; ++e) {
        const Edge& ed = G.edges()[e];
        const Block& b = v[k * E + e];
        if (k > 0) {
          out[L.rho_index(k, ed.i)] += b[0];
          out[L.rho_index(k, ed.j)] += b[1];
        }
        if (k + 1 < K) {
          out[L.rho_index(k + 1, ed.i)] += b[2];
          out[L.rho_index(k + 1, ed.j)] += b[3];
        }
        out[L.m_index(k, e)] += b[4];
      }
    }
  };
  auto free_mask = [&](int k) {
    return std::array<bool, 4>{k > 0, k > 0, k + 1 < K, k + 1 < K};
  };

  const int len = 5 * nb;
  std::vector<Block> w(nb), diff(nb);
  // Splitting state: block copies y followed by scaled multipliers u.
  Vector state = Vector::Zero(2 * len);
  {
    std::vector<Block> y0(nb);
    lift(x, y0);
    for (int b = 0; b < nb; ++b) {
      for (int q = 0; q < 5; ++q) state[5 * b + q] = y0[b][q];
    }
  }

  double r = 4.0 * dt;
  const double relax = 1.6;
  Vector zx, gathered, tmp, nu = Vector::Zero(L.rows());
  double primal = 0.0, dual_res = 0.0;

  // One over-relaxed ADMM sweep from `in`; also leaves x and nu current.
  auto sweep = [&](const Vector& in, Vector& out) {
    const double* y = in.data();
    const double* u = in.data() + len;
    for (int b = 0; b < nb; ++b) {
      for (int q = 0; q < 5; ++q) diff[b][q] = y[5 * b + q] - u[5 * b + q];
    }
    gather(diff, gathered);
    zx = dinv.cwiseProduct(gathered);
    nu = chol.solve(A * zx - rhs);
    x = zx - dinv.cwiseProduct(A.transpose() * nu);
    lift(x, w);
    out.resize(2 * len);
    double* yo = out.data();
    double* uo = out.data() + len;
    const BlockProx prox{g, dt, r};
    primal = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto mask = free_mask(k);
      for (int e = 0; e < E; ++e) {
        const int b = k * E + e;
        Block v, warm, wh;
        for (int q = 0; q < 5; ++q) {
          const bool fixed = q < 4 && !mask[q];
          const double yq = y[5 * b + q];
          wh[q] = fixed ? w[b][q] : relax * w[b][q] + (1.0 - relax) * yq;
          v[q] = wh[q] + u[5 * b + q];
          warm[q] = yq;
        }
        const Block yn = prox(v, warm, mask);
        for (int q = 0; q < 5; ++q) {
          yo[5 * b + q] = yn[q];
          uo[5 * b + q] = u[5 * b + q] + wh[q] - yn[q];
          primal = std::max(primal, std::abs(w[b][q] - yn[q]));
          diff[b][q] = yn[q] - y[5 * b + q];
        }
      }
    }
    gather(diff, tmp);
    dual_res = r * dinv.cwiseProduct(tmp).lpNorm<Eigen::Infinity>();
  };
  auto block_action = [&](const Vector& st) {
    double act = 0.0;
    for (int b = 0; b < nb; ++b) {
      const double* y = st.data() + 5 * b;
      const double gh = segment_conductance(g, y[0], y[1], y[2], y[3]);
      if (gh > 0.0) act += 0.5 * dt * y[4] * y[4] / gh;
    }
    return act;
  };

  // Anderson acceleration of the sweep map with a residual safeguard.
  constexpr int kMemory = 8;
  std::vector<Vector> dF, dG;
  Vector image, f, f_last, image_last;
  double f_last_norm = std::numeric_limits<double>::infinity();
  bool extrapolated = false;

  const BlockMap bm = block_map(G, L, rho0, rho1);
  double polish_at = 1e-2;
  Vector polished;
  GeodesicResult res;
  double last_action = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iter; ++it) {
    sweep(state, image);
    f = image - state;
    const double fn = f.norm();
    res.iterations = it;
    if (extrapolated && fn > f_last_norm) {
      // Rejected: restart from the plain image of the last accepted point.
      state = image_last;
      dF.clear();
      dG.clear();
      extrapolated = false;
      f_last_norm = std::numeric_limits<double>::infinity();
      continue;
    }
    if (f_last.size() == f.size() && std::isfinite(f_last_norm)) {
      dF.push_back(f - f_last);
      dG.push_back(image - image_last);
      if (static_cast<int>(dF.size()) > kMemory) {
        dF.erase(dF.begin());
        dG.erase(dG.begin());
      }
    }
    f_last = f;
    image_last = image;
    f_last_norm = fn;

    if (it % opts.check_every == 0 || it == opts.max_iter) {
      const double act = block_action(image);
      const double change = std::abs(act - last_action) / std::max(act, 1e-300);
      last_action = act;
      res.primal_residual = primal;
      res.dual_residual = dual_res;
      if (opts.verbose) {
        std::fprintf(stderr,
                     "iter %d  primal %.3e  dual %.3e  action %.12g  r %.3e\n",
                     it, primal, dual_res, act, r);
      }
      if (primal <= opts.tol && dual_res <= opts.tol && change <= opts.tol) {
        res.converged = true;
        break;
      }
      if (opts.polish && primal <= polish_at && dual_res <= polish_at) {
        Vector xp = x;
        PolishResult pr =
            newton_polish(g, L, bm, A, rhs, xp, opts.tol, opts.verbose);
        if (pr.converged && pr.stationarity <= opts.tol) {
          x = xp;
          polished = std::move(pr.nu);
          res.converged = true;
          res.primal_residual = pr.feasibility;
          res.dual_residual = pr.stationarity;
          break;
        }
        polish_at *= 0.1;
      }
      if (it % (5 * opts.check_every) == 0 &&
          (primal > 10.0 * dual_res || dual_res > 10.0 * primal)) {
        const double c = primal > dual_res ? 2.0 : 0.5;
        r *= c;
        image.tail(len) /= c;
        dF.clear();
        dG.clear();
        f_last.resize(0);
        f_last_norm = std::numeric_limits<double>::infinity();
        extrapolated = false;
        state = image;
        continue;
      }
    }

    if (dF.empty()) {
      state = image;
      extrapolated = false;
      continue;
    }
    const int mcols = static_cast<int>(dF.size());
    Matrix F(2 * len, mcols), Gm(2 * len, mcols);
    for (int c = 0; c < mcols; ++c) {
      F.col(c) = dF[c];
      Gm.col(c) = dG[c];
    }
    Matrix FtF = F.transpose() * F;
    FtF.diagonal().array() += 1e-10 * FtF.diagonal().maxCoeff() + 1e-300;
    const Vector gamma = FtF.ldlt().solve(F.transpose() * f);
    state = image - Gm * gamma;
    extrapolated = true;
  }
  if (polished.size() == 0) {
    Vector final_image;
    sweep(state, final_image);
    polished = r * nu;
  }

  DiscretePath path;
  path.K = K;
  path.rho.resize(K + 1, n);
  path.m.resize(K, E);
  path.rho.row(0) = rho0.transpose();
  path.rho.row(K) = rho1.transpose();
  for (int k = 1; k < K; ++k) {
    Vector row(n);
    for (int i = 0; i < n; ++i) row[i] = x[L.rho_index(k, i)];
    path.rho.row(k) = project_simplex(row).transpose();
  }
  for (int k = 0; k < K; ++k) {
    for (int e = 0; e < E; ++e) path.m(k, e) = x[L.m_index(k, e)];
  }
  repair_continuity(G, path);

  // Interval potentials mu^k from the continuity multipliers.
  Matrix mu = Matrix::Zero(K, n);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < n; ++i) {
      if (k * n + i < L.rows()) mu(k, i) = polished[k * n + i];
    }
  }
  const DualPath dual = dual_from_multipliers(G, g, path, mu, opts.jump_abs);
  res.dual = normalize_dual(G, g, dual);
  res.path = std::move(path);
  res.report = certify(G, g, res.path, res.dual);
  return res;
}

}  // namespace wgeo
