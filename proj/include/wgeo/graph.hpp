#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace wgeo {

class Mobility;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Undirected edge {i, j} with i < j and positive weight.
struct Edge {
  int i = 0;
  int j = 0;
  double w = 0.0;
};

/// Skew-symmetric field on the edges of a graph, stored densely.
struct EdgeField {
  Matrix values;

  EdgeField() = default;
  explicit EdgeField(int n) : values(Matrix::Zero(n, n)) {}

  int size() const { return static_cast<int>(values.rows()); }
  double operator()(int i, int j) const { return values(i, j); }
  void set(int i, int j, double v) {
    values(i, j) = v;
    values(j, i) = -v;
  }
};

class WeightedGraph {
 public:
  /// Builds the graph from an edge list with 0-based endpoints. Zero weights
  /// are dropped; throws std::invalid_argument on bad input or a
  /// disconnected edge set.
  WeightedGraph(int n, const std::vector<Edge>& edges);

  int n() const { return n_; }
  const Matrix& omega() const { return omega_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }
  /// Indices into edges() incident to vertex i.
  const std::vector<int>& incident(int i) const { return inc_[i]; }
  double sqrt_w(int e) const { return sqrt_w_[e]; }

  /// Checks that the field is skew-symmetric and vanishes off edges.
  bool is_edge_field(const EdgeField& f, double tol = 0.0) const;

  /// Edge values f(i,j) for i < j in edges() order.
  Vector edge_values(const EdgeField& f) const;
  EdgeField field_from_edges(const Vector& values) const;

 private:
  int n_;
  Matrix omega_;
  std::vector<Edge> edges_;
  std::vector<double> sqrt_w_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<int>> inc_;
};

/// Reads {"n": int, "edges": [[i, j, w], ...]} with 1-based indices.
WeightedGraph load_graph_json(const std::string& path);
WeightedGraph parse_graph_json(const std::string& text);

/// (grad phi)_ij = sqrt(w_ij) (phi_i - phi_j).
EdgeField gradient(const WeightedGraph& G, const Vector& phi);

/// div(m)_i = sum_j sqrt(w_ij) m_ji.
Vector divergence_g(const WeightedGraph& G, const EdgeField& m);

/// ||v||_rho^2 = sum over undirected edges of v_ij^2 g(rho_i, rho_j).
double weighted_norm_sq(const WeightedGraph& G, const Mobility& g,
                        const Vector& rho, const EdgeField& v);

/// div_rho(v)_i = sum_j sqrt(w_ij) v_ji g(rho_i, rho_j).
Vector divergence_rho(const WeightedGraph& G, const Mobility& g,
                      const Vector& rho, const EdgeField& v);

/// Unweighted pairing sum over undirected edges of a_ij b_ij.
double edge_pairing(const WeightedGraph& G, const EdgeField& a,
                    const EdgeField& b);

/// rho-weighted pairing sum over undirected edges of a_ij b_ij g_ij(rho).
double weighted_pairing(const WeightedGraph& G, const Mobility& g,
                        const Vector& rho, const EdgeField& a,
                        const EdgeField& b);

}  // namespace wgeo
