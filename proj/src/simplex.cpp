#include "wgeo/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wgeo {

void validate_prob_vector(const Vector& rho, int n, const char* what) {
  if (rho.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(rho[i]) || rho[i] < 0.0) {
      throw std::invalid_argument(std::string(what) +
                                  ": entries must be finite and >= 0");
    }
  }
  if (std::abs(rho.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string(what) + ": entries must sum to 1");
  }
}

Vector project_simplex(const Vector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  Vector out = (v.array() - theta).max(0.0).matrix();
  // Sum is one up to rounding; fold the residue into the largest entry.
  Eigen::Index imax = 0;
  out.maxCoeff(&imax);
  out[imax] += 1.0 - out.sum();
  return out;
}

ComponentPartition g_components(const WeightedGraph& G, const Mobility& g,
                                const Vector& rho) {
  const int n = G.n();
  if (rho.size() != n) {
    throw std::invalid_argument("g_components: dimension mismatch");
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::vector<int> touched(n, 0);
  for (const Edge& e : G.edges()) {
    if (g(rho[e.i], rho[e.j]) > kTauG) {
      touched[e.i] = touched[e.j] = 1;
      const int a = find(e.i);
      const int b = find(e.j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  ComponentPartition out;
  std::vector<int> slot(n, -1);
  for (int v = 0; v < n; ++v) {
    if (!touched[v]) {
      out.unassigned.push_back(v);
      if (rho[v] > 0.0) out.isolated_mass.push_back(v);
      continue;
    }
    const int root = find(v);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.components.size());
      out.components.emplace_back();
    }
    out.components[slot[root]].push_back(v);
  }
  return out;
}

Matrix weighted_laplacian(const WeightedGraph& G, const Mobility& g,
                          const Vector& rho) {
  if (rho.size() != G.n()) {
    throw std::invalid_argument("weighted_laplacian: dimension mismatch");
  }
  Matrix L = Matrix::Zero(G.n(), G.n());
  for (const Edge& e : G.edges()) {
    const double c = e.w * g(rho[e.i], rho[e.j]);
    L(e.i, e.i) += c;
    L(e.j, e.j) += c;
    L(e.i, e.j) -= c;
    L(e.j, e.i) -= c;
  }
  return L;
}

void jacobi_eigen(const Matrix& a_in, Vector& values, Matrix& vectors) {
  if (a_in.rows() != a_in.cols()) {
    throw std::invalid_argument("jacobi_eigen: matrix must be square");
  }
  const Eigen::Index n = a_in.rows();
  Matrix a = 0.5 * (a_in + a_in.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= 1e-17 * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  values.resize(n);
  vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    values[k] = a(order[k], order[k]);
    vectors.col(k) = v.col(order[k]);
  }
}

double poincare(const WeightedGraph& G, const Mobility& g, const Vector& rho) {
  Vector vals;
  Matrix vecs;
  jacobi_eigen(weighted_laplacian(G, g, rho), vals, vecs);
  return std::max(vals[1], 0.0);
}

Vector fiedler_vector(const WeightedGraph& G, const Mobility& g,
                      const Vector& rho) {
  Vector vals;
  Matrix vecs;
  jacobi_eigen(weighted_laplacian(G, g, rho), vals, vecs);
  return vecs.col(1);
}

double poincare_inequality_check(const WeightedGraph& G, const Mobility& g,
                                 const Vector& rho, const Vector& lambda) {
  if (lambda.size() != G.n()) {
    throw std::invalid_argument("poincare_inequality_check: dimension mismatch");
  }
  const Vector centered = lambda.array() - lambda.mean();
  const double lhs = weighted_norm_sq(G, g, rho, gradient(G, centered));
  return lhs - poincare(G, g, rho) * centered.squaredNorm();
}

}  // namespace wgeo
