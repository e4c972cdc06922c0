#include "wgeo/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "quadrature.hpp"
#include "wgeo/simplex.hpp"

namespace wgeo {

namespace {

constexpr int kSegmentPoints = 16;

// Gauss-Legendre in u with s = u^2 (3 - 2u); the Jacobian 6u(1-u) absorbs
// inverse-square-root behaviour of the integrand at both ends.
struct SegmentRule {
  std::array<double, kSegmentPoints> s{};
  std::array<double, kSegmentPoints> w{};
  SegmentRule() {
    std::vector<double> u, wu;
    detail::gauss_legendre01(kSegmentPoints, u, wu);
    for (int q = 0; q < kSegmentPoints; ++q) {
      s[q] = u[q] * u[q] * (3.0 - 2.0 * u[q]);
      w[q] = wu[q] * 6.0 * u[q] * (1.0 - u[q]);
    }
  }
};

const SegmentRule& segment_rule() {
  static const SegmentRule rule;
  return rule;
}

double nonneg(double x) { return x < 0.0 ? 0.0 : x; }

}  // namespace

ExtReal f(double t, double s) {
  if (t > 0.0) return {s * s / t, false};
  if (t == 0.0 && s == 0.0) return {0.0, false};
  return ExtReal::inf();
}

ExtReal big_f(const WeightedGraph& G, const Mobility& g, const Vector& rho,
              const EdgeField& m) {
  if (rho.size() != G.n() || m.size() != G.n()) {
    throw std::invalid_argument("big_f: dimension mismatch");
  }
  ExtReal total;
  for (const Edge& e : G.edges()) {
    double gij = g(rho[e.i], rho[e.j]);
    if (gij <= kTauG) gij = 0.0;
    total += f(gij, m(e.i, e.j));
  }
  return total;
}

double segment_conductance(const Mobility& g, double ai, double aj, double bi,
                           double bj) {
  const SegmentRule& rule = segment_rule();
  double J = 0.0;
  for (int q = 0; q < kSegmentPoints; ++q) {
    const double s = rule.s[q];
    const double v = g(nonneg((1.0 - s) * ai + s * bi),
                       nonneg((1.0 - s) * aj + s * bj));
    if (!(v > 0.0)) return 0.0;
    J += rule.w[q] / std::sqrt(v);
  }
  return 1.0 / (J * J);
}

SegmentJet segment_jet(const Mobility& g, double ai, double aj, double bi,
                       double bj) {
  const SegmentRule& rule = segment_rule();
  double J = 0.0;
  std::array<double, 4> dJ{};
  std::array<double, 16> hJ{};
  SegmentJet out;
  for (int q = 0; q < kSegmentPoints; ++q) {
    const double s = rule.s[q];
    const double c = 1.0 - s;
    const MobilityJet mj =
        g.jet(nonneg(c * ai + s * bi), nonneg(c * aj + s * bj));
    if (!(mj.g > 0.0)) {
      out.value = 0.0;
      out.grad.fill(std::numeric_limits<double>::infinity());
      out.hess.fill(std::numeric_limits<double>::quiet_NaN());
      return out;
    }
    const double w = rule.w[q];
    const double ih = 1.0 / std::sqrt(mj.g);
    const double ih3 = ih * ih * ih;
    const double ih5 = ih3 * ih * ih;
    const std::array<double, 4> dG = {mj.g1 * c, mj.g2 * c, mj.g1 * s,
                                      mj.g2 * s};
    const std::array<double, 2> wt = {c, s};
    J += w * ih;
    for (int x = 0; x < 4; ++x) {
      dJ[x] += -0.5 * w * ih3 * dG[x];
      for (int y = 0; y < 4; ++y) {
        const int vx = x & 1;
        const int vy = y & 1;
        const double gxy =
            vx == 0 ? (vy == 0 ? mj.g11 : mj.g12) : (vy == 0 ? mj.g12 : mj.g22);
        const double d2G = gxy * wt[x >> 1] * wt[y >> 1];
        hJ[4 * x + y] += w * (0.75 * ih5 * dG[x] * dG[y] - 0.5 * ih3 * d2G);
      }
    }
  }
  const double iJ = 1.0 / J;
  const double iJ2 = iJ * iJ;
  const double iJ3 = iJ2 * iJ;
  out.value = iJ2;
  for (int x = 0; x < 4; ++x) {
    out.grad[x] = -2.0 * iJ3 * dJ[x];
    for (int y = 0; y < 4; ++y) {
      out.hess[4 * x + y] =
          6.0 * iJ2 * iJ2 * dJ[x] * dJ[y] - 2.0 * iJ3 * hJ[4 * x + y];
    }
  }
  return out;
}

Matrix interval_conductances(const WeightedGraph& G, const Mobility& g,
                             const DiscretePath& path) {
  Matrix c(path.K, G.num_edges());
  for (int k = 0; k < path.K; ++k) {
    for (int e = 0; e < G.num_edges(); ++e) {
      const Edge& ed = G.edges()[e];
      c(k, e) = segment_conductance(g, path.rho(k, ed.i), path.rho(k, ed.j),
                                    path.rho(k + 1, ed.i),
                                    path.rho(k + 1, ed.j));
    }
  }
  return c;
}

ExtReal interval_energy(const WeightedGraph& G, const Mobility& g,
                        const DiscretePath& path, int k) {
  ExtReal total;
  for (int e = 0; e < G.num_edges(); ++e) {
    const Edge& ed = G.edges()[e];
    double c = segment_conductance(g, path.rho(k, ed.i), path.rho(k, ed.j),
                                   path.rho(k + 1, ed.i), path.rho(k + 1, ed.j));
    if (c <= kTauG) c = 0.0;
    total += f(c, path.m(k, e));
  }
  return total;
}

ExtReal action(const WeightedGraph& G, const Mobility& g,
               const DiscretePath& path) {
  if (path.rho.cols() != G.n() || path.m.cols() != G.num_edges() ||
      path.rho.rows() != path.K + 1 || path.m.rows() != path.K) {
    throw std::invalid_argument("action: path does not match graph");
  }
  ExtReal total;
  for (int k = 0; k < path.K; ++k) {
    total += interval_energy(G, g, path, k).scaled(0.5 * path.dt());
  }
  return total;
}

double hamiltonian_hg(const WeightedGraph& G, const Mobility& g,
                      const Vector& rho, const Vector& phi) {
  if (rho.size() != G.n() || phi.size() != G.n()) {
    throw std::invalid_argument("hamiltonian_hg: dimension mismatch");
  }
  double h = 0.0;
  for (const Edge& e : G.edges()) {
    const double d = phi[e.i] - phi[e.j];
    h += e.w * g(rho[e.i], rho[e.j]) * d * d;
  }
  return 0.5 * h;
}

Vector grad_phi_hg(const WeightedGraph& G, const Mobility& g,
                   const Vector& rho, const Vector& phi) {
  if (rho.size() != G.n() || phi.size() != G.n()) {
    throw std::invalid_argument("grad_phi_hg: dimension mismatch");
  }
  Vector out = Vector::Zero(G.n());
  for (const Edge& e : G.edges()) {
    const double c = e.w * g(rho[e.i], rho[e.j]) * (phi[e.i] - phi[e.j]);
    out[e.i] += c;
    out[e.j] -= c;
  }
  return out;
}

Vector grad_rho_hg(const WeightedGraph& G, const Mobility& g,
                   const Vector& rho, const Vector& phi) {
  if (rho.size() != G.n() || phi.size() != G.n()) {
    throw std::invalid_argument("grad_rho_hg: dimension mismatch");
  }
  for (int i = 0; i < G.n(); ++i) {
    if (!(rho[i] > kTauG)) {
      throw std::invalid_argument("grad_rho_hg: rho must be interior");
    }
  }
  Vector out = Vector::Zero(G.n());
  for (const Edge& e : G.edges()) {
    const double d = phi[e.i] - phi[e.j];
    out[e.i] += 0.5 * e.w * g.partial1(rho[e.i], rho[e.j]) * d * d;
    out[e.j] += 0.5 * e.w * g.partial1(rho[e.j], rho[e.i]) * d * d;
  }
  return out;
}

namespace {

struct HObjective {
  const WeightedGraph& G;
  const Mobility& g;
  const Vector& a;
  Vector b2;  // squared edge values

  double value(const Vector& rho) const {
    double v = a.dot(rho);
    for (int e = 0; e < G.num_edges(); ++e) {
      const Edge& ed = G.edges()[e];
      v += 0.5 * g(rho[ed.i], rho[ed.j]) * b2[e];
    }
    return v;
  }

  // Gradient at rho pushed slightly inside the quadrant, where partials
  // of the builtins may blow up.
  Vector grad(const Vector& rho) const {
    Vector out = a;
    for (int e = 0; e < G.num_edges(); ++e) {
      if (b2[e] == 0.0) continue;
      const Edge& ed = G.edges()[e];
      const double ri = std::max(rho[ed.i], 1e-14);
      const double rj = std::max(rho[ed.j], 1e-14);
      out[ed.i] += 0.5 * g.partial1(ri, rj) * b2[e];
      out[ed.j] += 0.5 * g.partial1(rj, ri) * b2[e];
    }
    return out;
  }

  Matrix hessian(const Vector& rho) const {
    Matrix h = Matrix::Zero(G.n(), G.n());
    for (int e = 0; e < G.num_edges(); ++e) {
      if (b2[e] == 0.0) continue;
      const Edge& ed = G.edges()[e];
      const MobilityJet j = g.jet(std::max(rho[ed.i], 1e-14), std::max(rho[ed.j], 1e-14));
      h(ed.i, ed.i) += 0.5 * j.g11 * b2[e];
      h(ed.j, ed.j) += 0.5 * j.g22 * b2[e];
      h(ed.i, ed.j) += 0.5 * j.g12 * b2[e];
      h(ed.j, ed.i) += 0.5 * j.g12 * b2[e];
    }
    return h;
  }
};

Vector vertex(int n, int k) {
  Vector v = Vector::Zero(n);
  v[k] = 1.0;
  return v;
}

// Active-set Newton ascent of a concave function over the simplex, with a
// Frank-Wolfe step whenever the Newton direction makes no progress.
DualHResult ascend(const HObjective& obj, Vector rho) {
  const int n = static_cast<int>(rho.size());
  double val = obj.value(rho);
  DualHResult res;
  res.converged = false;
  for (int it = 0; it < 500; ++it) {
    const Vector gr = obj.grad(rho);
    Eigen::Index top = 0;
    const double gmax = gr.maxCoeff(&top);
    const double fw = gmax - gr.dot(rho);
    res.bound_gap = fw;
    if (fw <= 1e-11 * std::max(1.0, std::abs(val))) {
      res.converged = true;
      break;
    }
    std::vector<int> F;
    for (int i = 0; i < n; ++i) {
      if (rho[i] > 0.0 || i == top) F.push_back(i);
    }
    const int m = static_cast<int>(F.size());
    const Matrix H = obj.hessian(rho);
    Matrix KKT = Matrix::Zero(m + 1, m + 1);
    Vector rhs = Vector::Zero(m + 1);
    double hs = 0.0;
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) {
        const double h = H(F[p], F[q]);
        KKT(p, q) = std::isfinite(h) ? h : (p == q ? -1e12 : 0.0);
        hs = std::max(hs, std::abs(KKT(p, q)));
      }
      KKT(p, m) = KKT(m, p) = 1.0;
      rhs[p] = -gr[F[p]];
    }
    for (int p = 0; p < m; ++p) KKT(p, p) -= 1e-10 * (1.0 + hs);
    const Vector sol = KKT.fullPivLu().solve(rhs);
    Vector d = Vector::Zero(n);
    for (int p = 0; p < m; ++p) d[F[p]] = sol[p];
    double slope = gr.dot(d);
    if (!d.allFinite() || !(slope > 0.0)) {
      d = vertex(n, static_cast<int>(top)) - rho;
      slope = gr.dot(d);
    }
    double amax = 1.0;
    for (int i = 0; i < n; ++i) {
      if (d[i] < 0.0) amax = std::min(amax, -rho[i] / d[i]);
    }
    double alpha = amax;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      Vector cand = rho + alpha * d;
      for (int i = 0; i < n; ++i) {
        if (cand[i] < 1e-300 && d[i] < 0.0 && alpha == amax) cand[i] = 0.0;
        cand[i] = std::max(cand[i], 0.0);
      }
      cand /= cand.sum();
      const double cv = obj.value(cand);
      if (cv >= val + 1e-4 * alpha * slope) {
        moved = cv > val || (cand - rho).lpNorm<Eigen::Infinity>() > 0.0;
        rho = cand;
        val = cv;
        break;
      }
    }
    if (!moved) {
      // Exact line search towards the Frank-Wolfe vertex.
      const Vector vtx = vertex(n, static_cast<int>(top));
      double lo = 0.0, hi = 1.0;
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int k = 0; k < 80; ++k) {
        const double c = hi - phi * (hi - lo);
        const double e = lo + phi * (hi - lo);
        if (obj.value(rho + c * (vtx - rho)) >= obj.value(rho + e * (vtx - rho))) {
          hi = e;
        } else {
          lo = c;
        }
      }
      const Vector cand = rho + 0.5 * (lo + hi) * (vtx - rho);
      const double cv = obj.value(cand);
      if (!(cv > val)) {
        res.converged = fw <= 1e-8 * std::max(1.0, std::abs(val));
        break;
      }
      rho = cand;
      val = cv;
    }
  }
  res.value = val;
  res.maximizer = rho;
  return res;
}

// Log-barrier Newton path from the barycentre. Used when the active-set
// ascent stalls at a corner where g is not differentiable; the iterates
// stay interior, and a central point with barrier weight mu is within
// n * mu of the supremum.
DualHResult barrier_ascend(const HObjective& obj) {
  const int n = obj.G.n();
  Vector rho = Vector::Constant(n, 1.0 / n);
  double mu = 1e-2 * std::max(1.0, obj.a.cwiseAbs().maxCoeff() + obj.b2.cwiseAbs().maxCoeff());
  const double mu_min = 1e-15;
  DualHResult res;
  res.converged = true;
  auto bval = [&](const Vector& x, double m) {
    return obj.value(x) + m * x.array().log().sum();
  };
  for (;;) {
    bool inner = false;
    for (int it = 0; it < 100; ++it) {
      const Vector gr = obj.grad(rho).array() + mu / rho.array();
      Matrix KKT = Matrix::Zero(n + 1, n + 1);
      KKT.topLeftCorner(n, n) = obj.hessian(rho);
      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(KKT(i, i))) KKT(i, i) = -1e12;
        KKT(i, i) -= mu / (rho[i] * rho[i]);
        KKT(i, n) = KKT(n, i) = 1.0;
      }
      Vector rhs = Vector::Zero(n + 1);
      rhs.head(n) = -gr;
      const Vector sol = KKT.fullPivLu().solve(rhs);
      Vector d = sol.head(n);
      d.array() -= d.mean();
      const double slope = gr.dot(d);
      if (!d.allFinite() || slope <= 1e-15 * (1.0 + std::abs(obj.value(rho)))) {
        inner = true;
        break;
      }
      double alpha = 1.0;
      for (int i = 0; i < n; ++i) {
        if (d[i] < 0.0) alpha = std::min(alpha, -0.99 * rho[i] / d[i]);
      }
      const double v0 = bval(rho, mu);
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        const Vector cand = rho + alpha * d;
        if ((cand.array() <= 0.0).any()) continue;
        if (bval(cand, mu) >= v0 + 1e-4 * alpha * slope) {
          rho = cand / cand.sum();
          moved = true;
          break;
        }
      }
      if (!moved) {
        inner = true;
        break;
      }
    }
    if (!inner) res.converged = false;
    if (mu <= mu_min) break;
    mu = std::max(0.1 * mu, mu_min);
  }
  res.value = obj.value(rho);
  res.maximizer = rho;
  res.bound_gap = n * mu;
  return res;
}

}  // namespace

DualHResult dual_h_full(const WeightedGraph& G, const Mobility& g,
                        const Vector& a, const EdgeField& b) {
  if (a.size() != G.n() || b.size() != G.n()) {
    throw std::invalid_argument("dual_h: dimension mismatch");
  }
  const int n = G.n();
  HObjective obj{G, g, a, Vector(G.num_edges())};
  for (int e = 0; e < G.num_edges(); ++e) {
    const double v = b(G.edges()[e].i, G.edges()[e].j);
    obj.b2[e] = v * v;
  }
  if (g.kind() == MobilityKind::arithmetic) {
    // Objective is linear in rho with coefficient a_k + 1/4 sum_j b_kj^2.
    Vector coef = a;
    for (int e = 0; e < G.num_edges(); ++e) {
      coef[G.edges()[e].i] += 0.25 * obj.b2[e];
      coef[G.edges()[e].j] += 0.25 * obj.b2[e];
    }
    Eigen::Index k = 0;
    DualHResult res;
    res.value = coef.maxCoeff(&k);
    res.maximizer = Vector::Zero(n);
    res.maximizer[k] = 1.0;
    return res;
  }
  // Concave objective: one start suffices, the vertices are a fallback.
  DualHResult best = ascend(obj, Vector::Constant(n, 1.0 / n));
  for (int start = 0; start < n && !best.converged; ++start) {
    DualHResult r = ascend(obj, vertex(n, start));
    if (r.value > best.value || (r.converged && r.value >= best.value - 1e-12)) {
      best = r;
    }
  }
  if (!best.converged) {
    // The barrier bound certifies whichever point is higher.
    const DualHResult r = barrier_ascend(obj);
    const double upper = r.value + r.bound_gap;
    if (r.value >= best.value) best = r;
    best.converged = r.converged;
    best.bound_gap = std::max(0.0, upper - best.value);
  }
  return best;
}

double dual_h(const WeightedGraph& G, const Mobility& g, const Vector& a,
              const EdgeField& b) {
  return dual_h_full(G, g, a, b).value;
}

double h_zero(const Vector& a) {
  if (a.size() == 0) throw std::invalid_argument("h_zero: empty vector");
  return a.maxCoeff();
}

}  // namespace wgeo
