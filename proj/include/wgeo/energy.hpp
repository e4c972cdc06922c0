#pragma once

#include <array>

#include "wgeo/graph.hpp"
#include "wgeo/mobility.hpp"
#include "wgeo/path.hpp"

namespace wgeo {

/// Nonnegative extended real; infinity is carried as a flag.
struct ExtReal {
  double value = 0.0;
  bool infinite = false;

  static ExtReal inf() { return {0.0, true}; }
  bool finite() const { return !infinite; }
  ExtReal& operator+=(const ExtReal& o) {
    infinite = infinite || o.infinite;
    value = infinite ? 0.0 : value + o.value;
    return *this;
  }
  ExtReal scaled(double c) const { return infinite ? *this : ExtReal{c * value}; }
};

/// s^2/t for t > 0, 0 for s = t = 0, infinity otherwise.
ExtReal f(double t, double s);

/// Sum over undirected edges of f(g_ij(rho), m_ij).
ExtReal big_f(const WeightedGraph& G, const Mobility& g, const Vector& rho,
              const EdgeField& m);

/// Conductance of an edge over one time interval:
///   (int_0^1 g(rho_i(s), rho_j(s))^(-1/2) ds)^(-2)
/// with rho linear between (a_i, a_j) and (b_i, b_j). Concave and
/// 1-homogeneous in the four node values, bounded by g at the midpoint.
double segment_conductance(const Mobility& g, double ai, double aj, double bi,
                           double bj);

struct SegmentJet {
  double value = 0.0;
  std::array<double, 4> grad{};   // d/d(ai, aj, bi, bj)
  std::array<double, 16> hess{};  // row-major 4x4
};

SegmentJet segment_jet(const Mobility& g, double ai, double aj, double bi,
                       double bj);

/// Interval conductances for every edge, K x |E|.
Matrix interval_conductances(const WeightedGraph& G, const Mobility& g,
                             const DiscretePath& path);

/// Per-interval F value sum_e m_e^2 / ghat_e.
ExtReal interval_energy(const WeightedGraph& G, const Mobility& g,
                        const DiscretePath& path, int k);

/// 1/2 sum_k dt F_k.
ExtReal action(const WeightedGraph& G, const Mobility& g,
               const DiscretePath& path);

/// 1/4 sum over directed edges of w g (phi_i - phi_j)^2.
double hamiltonian_hg(const WeightedGraph& G, const Mobility& g,
                      const Vector& rho, const Vector& phi);
Vector grad_phi_hg(const WeightedGraph& G, const Mobility& g,
                   const Vector& rho, const Vector& phi);
/// Requires every rho_i > kTauG.
Vector grad_rho_hg(const WeightedGraph& G, const Mobility& g,
                   const Vector& rho, const Vector& phi);

struct DualHResult {
  double value = 0.0;
  Vector maximizer;
  double bound_gap = 0.0;  // Frank-Wolfe gap, an upper bound on the error
  bool converged = true;
};

/// H(a, b) = max over the simplex of (a, rho) + 1/2 ||b||_rho^2.
DualHResult dual_h_full(const WeightedGraph& G, const Mobility& g,
                        const Vector& a, const EdgeField& b);
double dual_h(const WeightedGraph& G, const Mobility& g, const Vector& a,
              const EdgeField& b);

/// max_i a_i.
double h_zero(const Vector& a);

}  // namespace wgeo
