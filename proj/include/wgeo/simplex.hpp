#pragma once

#include <vector>

#include "wgeo/graph.hpp"
#include "wgeo/mobility.hpp"

namespace wgeo {

/// Threshold separating exact boundary zeros of g from rounding.
inline constexpr double kTauG = 1e-12;

/// Throws std::invalid_argument unless rho is a probability vector of length
/// n (entries >= 0, sum within 1e-12 of one).
void validate_prob_vector(const Vector& rho, int n, const char* what = "rho");

/// Euclidean projection onto the probability simplex (sort and threshold).
Vector project_simplex(const Vector& v);

struct ComponentPartition {
  std::vector<std::vector<int>> components;  // each sorted, ordered by min
  std::vector<int> unassigned;
  /// Vertices with positive mass but no positive-g incident edge.
  std::vector<int> isolated_mass;
};

ComponentPartition g_components(const WeightedGraph& G, const Mobility& g,
                                const Vector& rho);

/// L_ii = sum_j w_ij g_ij, L_ij = -w_ij g_ij.
Matrix weighted_laplacian(const WeightedGraph& G, const Mobility& g,
                          const Vector& rho);

/// All eigenvalues (ascending) and eigenvectors (columns) of a symmetric
/// matrix by cyclic Jacobi rotations.
void jacobi_eigen(const Matrix& a, Vector& values, Matrix& vectors);

/// Second-smallest eigenvalue of weighted_laplacian, clamped at zero.
double poincare(const WeightedGraph& G, const Mobility& g, const Vector& rho);

/// Eigenvector of the second-smallest eigenvalue, unit norm.
Vector fiedler_vector(const WeightedGraph& G, const Mobility& g,
                      const Vector& rho);

/// ||grad l||_rho^2 - gamma_P(rho) ||l||^2 for l = lambda - mean(lambda).
double poincare_inequality_check(const WeightedGraph& G, const Mobility& g,
                                 const Vector& rho, const Vector& lambda);

}  // namespace wgeo
