#include "wgeo/simplex.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wgeo/oracle.hpp"

using namespace wgeo;
using namespace wgeo::testing;

namespace {

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

// Minimum of the Rayleigh quotient over random unit beta with zero sum.
double brute_force_poincare(Rng& rng, const WeightedGraph& G, const Mobility& g,
                            const Vector& rho, int samples) {
  const int n = G.n();
  const Matrix L = weighted_laplacian(G, g, rho);
  std::normal_distribution<double> normal;
  double best = INFINITY;
  for (int s = 0; s < samples; ++s) {
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = normal(rng);
    b.array() -= b.mean();
    b.normalize();
    double q = 0.0;
    for (const Edge& e : G.edges()) {
      q += e.w * g(rho[e.i], rho[e.j]) * std::pow(b[e.i] - b[e.j], 2);
    }
    best = std::min(best, q);
    EXPECT_NEAR(q, b.dot(L * b), 1e-12);
  }
  return best;
}

bool single_full_component(const ComponentPartition& p, int n) {
  return p.components.size() == 1 && static_cast<int>(p.components[0].size()) == n &&
         p.unassigned.empty();
}

}  // namespace

TEST(ProbVector, Validation) {
  EXPECT_NO_THROW(validate_prob_vector(vec3(0.2, 0.3, 0.5), 3));
  EXPECT_THROW(validate_prob_vector(vec3(0.2, 0.3, 0.6), 3), std::invalid_argument);
  EXPECT_THROW(validate_prob_vector(vec3(-0.1, 0.6, 0.5), 3), std::invalid_argument);
  EXPECT_THROW(validate_prob_vector(vec3(0.2, 0.3, 0.5), 4), std::invalid_argument);
}

TEST(ProbVector, Projection) {
  const Vector p = project_simplex(vec3(0.5, 0.5, -1.0));
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(p[2], 0.0);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const int n = uniform_int(rng, 2, 8);
    const Vector v = random_vector(rng, n, 2.0);
    const Vector x = project_simplex(v);
    EXPECT_NEAR(x.sum(), 1.0, 1e-12);
    EXPECT_GE(x.minCoeff(), 0.0);
    // Optimality: v - x is constant on the support and not larger off it.
    double theta = NAN;
    for (int i = 0; i < n; ++i) {
      if (x[i] > 0.0) theta = v[i] - x[i];
    }
    for (int i = 0; i < n; ++i) {
      if (x[i] > 0.0) EXPECT_NEAR(v[i] - x[i], theta, 1e-12);
      else EXPECT_LE(v[i], theta + 1e-12);
    }
  }
}

TEST(Components, BoundaryExample) {
  const WeightedGraph G = boundary_graph();
  const Mobility g = Mobility::builtin("arithmetic");
  const ComponentPartition a = g_components(G, g, vec3(0.0, 0.0, 1.0));
  ASSERT_EQ(a.components.size(), 1u);
  EXPECT_EQ(a.components[0], (std::vector<int>{1, 2}));
  EXPECT_EQ(a.unassigned, (std::vector<int>{0}));
  const ComponentPartition b = g_components(G, g, vec3(0.0, 0.5, 0.5));
  EXPECT_TRUE(single_full_component(b, 3));
}

TEST(Components, InteriorAndIsolatedMass) {
  Rng rng(4);
  for (const char* name : {"arithmetic", "logarithmic", "harmonic"}) {
    const WeightedGraph G = random_graph(rng, 6);
    EXPECT_TRUE(single_full_component(
        g_components(G, Mobility::builtin(name), random_interior(rng, 6)), 6));
  }
  // A custom g vanishing unless both arguments exceed 0.3 isolates mass.
  const Mobility g = Mobility::custom("gated", [](double r, double s) {
    return std::min(r, s) > 0.3 ? std::min(r, s) : 0.0;
  });
  const ComponentPartition p = g_components(boundary_graph(), g, vec3(0.2, 0.4, 0.4));
  ASSERT_EQ(p.components.size(), 1u);
  EXPECT_EQ(p.components[0], (std::vector<int>{1, 2}));
  EXPECT_EQ(p.unassigned, (std::vector<int>{0}));
  EXPECT_EQ(p.isolated_mass, (std::vector<int>{0}));
}

TEST(Poincare, Examples) {
  const Mobility g = Mobility::builtin("arithmetic");
  EXPECT_NEAR(poincare(two_vertex(), g, Vector::Constant(2, 0.5)), 1.0, 1e-14);
  EXPECT_NEAR(poincare(boundary_graph(), g, vec3(0.0, 0.0, 1.0)), 0.0, 1e-14);
  EXPECT_GT(poincare(boundary_graph(), g, vec3(0.0, 0.5, 0.5)), 0.0);
}

TEST(Poincare, JacobiMatchesEigen) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const int n = uniform_int(rng, 2, 9);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = uniform(rng, -1.0, 1.0);
    a = (a + a.transpose()).eval();
    Vector vals;
    Matrix vecs;
    jacobi_eigen(a, vals, vecs);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    EXPECT_LE((vals - es.eigenvalues()).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LE((a * vecs - vecs * vals.asDiagonal()).lpNorm<Eigen::Infinity>(), 1e-11);
  }
}

TEST(Poincare, BruteForceUpperBound) {
  Rng rng(8);
  for (const char* name : {"arithmetic", "logarithmic", "harmonic"}) {
    const Mobility g = Mobility::builtin(name);
    for (int t = 0; t < 5; ++t) {
      const int n = uniform_int(rng, 2, 5);
      const WeightedGraph G = random_graph(rng, n);
      const Vector rho = random_interior(rng, n);
      EXPECT_GE(brute_force_poincare(rng, G, g, rho, 10000), poincare(G, g, rho) - 1e-6);
    }
  }
}

TEST(Poincare, InequalityAndFiedlerEquality) {
  Rng rng(10);
  const Mobility g = Mobility::builtin("logarithmic");
  for (int t = 0; t < 100; ++t) {
    const int n = uniform_int(rng, 2, 7);
    const WeightedGraph G = random_graph(rng, n);
    const Vector rho = t % 3 ? random_interior(rng, n) : random_boundary(rng, n);
    const Vector lambda = random_vector(rng, n, 3.0);
    const double scale = 1.0 + lambda.squaredNorm();
    EXPECT_GE(poincare_inequality_check(G, g, rho, lambda), -1e-10 * scale);
  }
  const WeightedGraph G = random_graph(rng, 6);
  const Vector rho = random_interior(rng, 6);
  EXPECT_NEAR(poincare_inequality_check(G, g, rho, Vector::Constant(6, 1.3)), 0.0, 1e-14);
  EXPECT_NEAR(poincare_inequality_check(G, g, rho, fiedler_vector(G, g, rho)), 0.0, 1e-12);
}

TEST(Poincare, ConcaveAlongSegments) {
  Rng rng(12);
  const Mobility g = Mobility::builtin("harmonic");
  for (int t = 0; t < 50; ++t) {
    const int n = uniform_int(rng, 2, 6);
    const WeightedGraph G = random_graph(rng, n);
    const Vector a = random_boundary(rng, n);
    const Vector b = random_interior(rng, n);
    const double s = uniform(rng, 0.0, 1.0);
    EXPECT_GE(poincare(G, g, (1 - s) * a + s * b),
              (1 - s) * poincare(G, g, a) + s * poincare(G, g, b) - 1e-9);
  }
}

TEST(Poincare, PositiveIffSingleComponent) {
  Rng rng(14);
  for (int t = 0; t < 50; ++t) {
    const Mobility g = Mobility::builtin(t % 2 ? "harmonic" : "arithmetic");
    const int n = uniform_int(rng, 3, 6);
    const WeightedGraph G = random_graph(rng, n, 0.2);
    const Vector rho = t % 2 ? random_boundary(rng, n) : random_interior(rng, n);
    EXPECT_EQ(poincare(G, g, rho) > kTauG, single_full_component(g_components(G, g, rho), n));
  }
}
