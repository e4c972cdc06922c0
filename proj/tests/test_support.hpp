#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "wgeo/graph.hpp"

namespace wgeo::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Random spanning tree plus extra edges with probability p.
inline WeightedGraph random_graph(Rng& rng, int n, double p = 0.4) {
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  for (int v = 1; v < n; ++v) {
    const int u = uniform_int(rng, 0, v - 1);
    edges.push_back({u, v, uniform(rng, 0.5, 2.0)});
    used[u][v] = true;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!used[i][j] && uniform(rng, 0.0, 1.0) < p) {
        edges.push_back({i, j, uniform(rng, 0.5, 2.0)});
      }
    }
  }
  return WeightedGraph(n, edges);
}

/// Interior point of the simplex with every entry at least floor / n.
inline Vector random_interior(Rng& rng, int n, double floor = 0.1) {
  Vector x(n);
  std::exponential_distribution<double> e(1.0);
  for (int i = 0; i < n; ++i) x[i] = e(rng);
  x /= x.sum();
  x = (1.0 - floor) * x + Vector::Constant(n, floor / n);
  return x / x.sum();
}

/// Simplex point with a random nonempty set of zero entries.
inline Vector random_boundary(Rng& rng, int n) {
  Vector x = random_interior(rng, n);
  const int zeros = uniform_int(rng, 1, n - 1);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int z = 0; z < zeros; ++z) x[idx[z]] = 0.0;
  return x / x.sum();
}

inline Vector random_vector(Rng& rng, int n, double scale = 1.0) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = uniform(rng, -scale, scale);
  return x;
}

inline EdgeField random_field(Rng& rng, const WeightedGraph& G, double scale = 1.0) {
  EdgeField f(G.n());
  for (const Edge& e : G.edges()) f.set(e.i, e.j, uniform(rng, -scale, scale));
  return f;
}

inline WeightedGraph two_vertex(double w = 1.0) { return WeightedGraph(2, {{0, 1, w}}); }

}  // namespace wgeo::testing
