#pragma once

#include "wgeo/graph.hpp"

namespace wgeo {

/// Densities at K+1 uniform time nodes and momenta on the K intervals.
///
/// m(k, e) is the value m_ij on interval k for edge e = {i, j}, i < j, in
/// WeightedGraph::edges() order.
struct DiscretePath {
  int K = 0;
  Matrix rho;  // (K+1) x n
  Matrix m;    // K x |E|

  double dt() const { return 1.0 / K; }
  int n() const { return static_cast<int>(rho.cols()); }
  Vector node(int k) const { return rho.row(k).transpose(); }
  EdgeField momentum(const WeightedGraph& G, int k) const {
    return G.field_from_edges(m.row(k).transpose());
  }
};

/// Dual potentials on the time grid.
///
/// lambda.row(k) is the right limit at node k for k < K and the left limit
/// at node K. Each increment splits as
///   lambda.row(k+1) - lambda.row(k) = dt * abs_rate.row(k) + jump.row(k),
/// where jump.row(k) sits at node k+1. Only entries with jump_flag set are
/// counted as jumps; the rest of jump.row(k) is grid-level residue.
/// mid.row(k) is the potential paired with the momentum of interval k.
struct DualPath {
  Matrix lambda;    // (K+1) x n
  Matrix abs_rate;  // K x n
  Matrix jump;      // K x n
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> jump_flag;  // K x n
  Matrix mid;       // K x n

  int K() const { return static_cast<int>(abs_rate.rows()); }
  Vector centre(int k) const { return mid.row(k).transpose(); }
  /// Sets mid to lambda + dt/2 * abs_rate on every interval.
  void reset_mid() {
    mid = lambda.topRows(K()) + 0.5 * abs_rate / K();
  }
};

}  // namespace wgeo
