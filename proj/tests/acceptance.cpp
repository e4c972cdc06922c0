// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "wgeo/energy.hpp"
#include "wgeo/oracle.hpp"
#include "wgeo/simplex.hpp"
#include "wgeo/solver.hpp"

using namespace wgeo;
using namespace wgeo::testing;

namespace {

const char* const kBuiltins[] = {"arithmetic", "logarithmic", "harmonic"};
constexpr std::uint64_t kSeed = 20171207;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Simpson with r = u^2 on each half; independent of the library quadrature.
double simpson_cg(const Mobility& g) {
  const int n = 400000;
  auto h = [&](double u) {
    const double r = u * u;
    const double v = g(r, 1.0 - r);
    return v > 0.0 ? 2.0 * u / std::sqrt(v) : 0.0;
  };
  const double b = std::sqrt(0.5);
  const double dx = b / n;
  double s = h(0.0) + h(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * h(k * dx);
  return 2.0 * s * dx / 3.0;
}

// Momentum bound over every converged solve of the run.
double worst_momentum_excess = -INFINITY;
int momentum_checked = 0;

GeodesicResult solve(const WeightedGraph& G, const Mobility& g, const Vector& r0,
                     const Vector& r1, int K) {
  SolverOptions opts;
  opts.K = K;
  GeodesicResult r = solve_geodesic(G, g, r0, r1, opts);
  if (r.converged) {
    const double W = std::sqrt(2.0 * r.report.action);
    const double excess =
        r.path.m.cwiseAbs().maxCoeff() - (W * std::sqrt(g.max_unit_square()) + 1e-6);
    worst_momentum_excess = std::max(worst_momentum_excess, excess);
    ++momentum_checked;
  }
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion1() {
  double worst = 0.0, slowest = 0.0;
  bool conv = true;
  for (const char* name : kBuiltins) {
    const Mobility g = Mobility::builtin(name);
    double c2 = std::pow(simpson_cg(g), 2);
    if (std::string(name) == "arithmetic") c2 = 2.0;
    if (std::string(name) == "harmonic") c2 = std::numbers::pi * std::numbers::pi;
    for (double w : {1.0, 4.0}) {
      const auto t0 = std::chrono::steady_clock::now();
      const GeodesicResult r = solve(two_vertex(w), g, Vector::Unit(2, 0), Vector::Unit(2, 1), 64);
      slowest = std::max(slowest, seconds_since(t0));
      conv = conv && r.converged;
      worst = std::max(worst, std::abs(2.0 * r.report.action - c2 / w));
    }
  }
  report(1, conv && worst <= 1e-3 && slowest < 1.0,
         fmt("two-vertex max|W2 - C2/w| = %.3e (tol 1e-3), slowest %.3f s (tol 1 s)", worst, slowest));
}

void criterion2() {
  const Mobility g = Mobility::builtin("arithmetic");
  Vector r0(3), r1(3);
  r0 << 0.0, 0.0, 1.0;
  r1 << 0.0, 0.5, 0.5;
  const GeodesicResult r = solve(boundary_graph(), g, r0, r1, 64);
  const double w2 = 2.0 * r.report.action;
  const double max_rho1 = r.path.rho.col(0).maxCoeff();
  const ComponentPartition a = g_components(boundary_graph(), g, r.path.node(0));
  const ComponentPartition b = g_components(boundary_graph(), g, r.path.node(64));
  const bool differ = a.components != b.components;
  report(2, r.converged && std::abs(w2 - 0.5) <= 2e-3 && max_rho1 <= 1e-3 && differ,
         fmt("boundary W2 = %.9f (0.5 +- 2e-3), max rho_1 = %.2e (tol 1e-3), partitions differ = %d",
             w2, max_rho1, differ));
}

void criterion3() {
  const OdeGeodesic o = ode_boundary_geodesic(0.05, 1e-4, 64);
  const OdeChecks& c = o.checks;
  const Mobility g = Mobility::builtin("arithmetic");
  const GeodesicResult r = solve(o.graph, g, o.path.node(0), o.path.node(64), 64);
  const double rel = std::abs(r.report.action - c.action) / c.action;
  const double min_rho1 = r.path.rho.col(0).minCoeff();
  const bool ok = c.conserved_drift <= 1e-8 && c.hamiltonian_residual <= 1e-6 &&
                  c.hj_residual <= 1e-6 && std::abs(c.action - c.dual_value) <= 1e-6 &&
                  r.converged && rel <= 1e-2 && min_rho1 <= 1e-2;
  report(3, ok,
         fmt("ode drift %.1e, ham %.1e, |H| %.1e, |action-dual| %.1e; solver rel err %.2e, "
             "min rho_1 %.1e (delta1 %.4g)",
             c.conserved_drift, c.hamiltonian_residual, c.hj_residual,
             std::abs(c.action - c.dual_value), rel, min_rho1, c.delta1));
}

void criterion4(Rng& rng) {
  double worst_gap = 0.0, worst_vel = 0.0, worst_mono = 0.0;
  bool ok = true;
  for (int t = 0; t < 20; ++t) {
    const Mobility g = Mobility::builtin(kBuiltins[t % 3]);
    const int n = uniform_int(rng, 2, 6);
    const WeightedGraph G = random_graph(rng, n);
    const Vector r0 = random_interior(rng, n);
    const Vector r1 = random_interior(rng, n);
    const GeodesicResult r = solve(G, g, r0, r1, 64);
    const CertificateReport& c = r.report;
    const bool positive = poincare(G, g, r0) > 0.0 && poincare(G, g, r1) > 0.0;
    const double gap_scaled = c.action < 1e-3 ? std::abs(c.gap) / 1e-6 : std::abs(c.gap) / (1e-3 * c.action);
    worst_gap = std::max(worst_gap, gap_scaled);
    worst_vel = std::max(worst_vel, c.velocity_residual);
    worst_mono = std::max(worst_mono, c.monotonicity_violation);
    ok = ok && positive && r.converged;
  }
  ok = ok && worst_gap <= 1.0 && worst_vel <= 1e-4 && worst_mono <= 1e-6;
  report(4, ok,
         fmt("20 interior instances: max |gap|/tol = %.3f, velocity %.2e (tol 1e-4), "
             "monotonicity %.2e (tol 1e-6)",
             worst_gap, worst_vel, worst_mono));
}

void criterion5(Rng& rng) {
  bool ok = true;
  double worst = 0.0;
  bool decreasing = true;
  for (const char* name : kBuiltins) {
    const Mobility g = Mobility::builtin(name);
    for (const auto& ends : {std::pair{1.0, 0.0}, std::pair{0.85, 0.2}}) {
      Vector r0(2), r1(2);
      r0 << ends.first, 1.0 - ends.first;
      r1 << ends.second, 1.0 - ends.second;
      double prev = INFINITY;
      for (int K : {32, 64, 128}) {
        const GeodesicResult r = solve(two_vertex(), g, r0, r1, K);
        if (!r.converged) {
          ok = false;
          continue;
        }
        const double d = energy_profile(two_vertex(), g, r.path).drift;
        // Non-increasing in K down to the solver's own floor.
        if (d > std::max(prev, 1e-8)) decreasing = false;
        prev = d;
        if (K == 128) worst = std::max(worst, d);
      }
    }
  }
  double other = 0.0;
  for (int t = 0; t < 3; ++t) {
    const Mobility g = Mobility::builtin(kBuiltins[t]);
    const int n = uniform_int(rng, 3, 4);
    const WeightedGraph G = random_graph(rng, n);
    const GeodesicResult r = solve(G, g, random_interior(rng, n), random_interior(rng, n), 128);
    if (r.converged) other = std::max(other, energy_profile(G, g, r.path).drift);
  }
  ok = ok && worst <= 1e-2 && other <= 1e-2 && decreasing;
  report(5, ok,
         fmt("drift at K=128: two-vertex family %.2e, random graphs %.2e (tol 1e-2), "
             "non-increasing in K = %d",
             worst, other, decreasing));
}

void criterion6(Rng& rng) {
  double e_phi = 0.0, e_rho = 0.0, fd = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Mobility g = Mobility::builtin(kBuiltins[t % 3]);
    const int n = uniform_int(rng, 2, 7);
    const WeightedGraph G = random_graph(rng, n);
    const Vector rho = random_interior(rng, n);
    const Vector phi = random_vector(rng, n, 2.0);
    const double H = hamiltonian_hg(G, g, rho, phi);
    const Vector gp = grad_phi_hg(G, g, rho, phi);
    const Vector gr = grad_rho_hg(G, g, rho, phi);
    e_phi = std::max(e_phi, std::abs(gp.dot(phi) - 2.0 * H));
    e_rho = std::max(e_rho, std::abs(gr.dot(rho) - H));
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      Vector e = Vector::Zero(n);
      e[i] = h;
      const double fp = (hamiltonian_hg(G, g, rho, phi + e) - hamiltonian_hg(G, g, rho, phi - e)) / (2 * h);
      const double fr = (hamiltonian_hg(G, g, rho + e, phi) - hamiltonian_hg(G, g, rho - e, phi)) / (2 * h);
      fd = std::max(fd, std::abs(gp[i] - fp) / std::max(1.0, std::abs(fp)));
      fd = std::max(fd, std::abs(gr[i] - fr) / std::max(1.0, std::abs(fr)));
    }
  }
  report(6, e_phi <= 1e-10 && e_rho <= 1e-9 && fd <= 1e-5,
         fmt("100 instances: |(dH/dphi,phi)-2H| %.1e (1e-10), |(dH/drho,rho)-H| %.1e (1e-9), "
             "finite-difference rel %.1e (1e-5)",
             e_phi, e_rho, fd));
}

void criterion7(Rng& rng) {
  double brute_slack = INFINITY;
  for (int t = 0; t < 20; ++t) {
    const Mobility g = Mobility::builtin(kBuiltins[t % 3]);
    const int n = uniform_int(rng, 2, 5);
    const WeightedGraph G = random_graph(rng, n);
    const Vector rho = random_interior(rng, n);
    const double gamma = poincare(G, g, rho);
    std::normal_distribution<double> normal;
    double best = INFINITY;
    for (int s = 0; s < 10000; ++s) {
      Vector b(n);
      for (int i = 0; i < n; ++i) b[i] = normal(rng);
      b.array() -= b.mean();
      b.normalize();
      double q = 0.0;
      for (const Edge& e : G.edges()) q += e.w * g(rho[e.i], rho[e.j]) * std::pow(b[e.i] - b[e.j], 2);
      best = std::min(best, q);
    }
    brute_slack = std::min(brute_slack, best + 1e-6 - gamma);
  }
  double ineq = INFINITY;
  for (int t = 0; t < 100; ++t) {
    const Mobility g = Mobility::builtin(kBuiltins[t % 3]);
    const int n = uniform_int(rng, 2, 7);
    const WeightedGraph G = random_graph(rng, n);
    const Vector rho = t % 2 ? random_interior(rng, n) : random_boundary(rng, n);
    const Vector lam = random_vector(rng, n, 3.0);
    ineq = std::min(ineq, poincare_inequality_check(G, g, rho, lam) / (1.0 + lam.squaredNorm()));
  }
  int agree = 0;
  for (int t = 0; t < 50; ++t) {
    const Mobility g = Mobility::builtin(kBuiltins[t % 3]);
    const int n = uniform_int(rng, 3, 6);
    const WeightedGraph G = random_graph(rng, n, 0.2);
    const Vector rho = t % 2 ? random_boundary(rng, n) : random_interior(rng, n);
    const ComponentPartition p = g_components(G, g, rho);
    const bool single = p.components.size() == 1 &&
                        static_cast<int>(p.components[0].size()) == n && p.unassigned.empty();
    agree += (poincare(G, g, rho) > kTauG) == single;
  }
  report(7, brute_slack >= 0.0 && ineq >= -1e-10 && agree == 50,
         fmt("brute-force slack %.2e (>= 0), min inequality residual %.1e (>= -1e-10), "
             "gamma_P>0 <=> one component on %d/50",
             brute_slack, ineq, agree));
}

void criterion8() {
  const double a = std::abs(c_g(Mobility::builtin("arithmetic")).value - std::sqrt(2.0));
  const double h = std::abs(c_g(Mobility::builtin("harmonic")).value - std::numbers::pi);
  const double ea = std::abs(epsilon0(Mobility::builtin("arithmetic")) - 0.5);
  const double eh = std::abs(epsilon0(Mobility::builtin("harmonic")) - 0.25);
  report(8, a <= 1e-8 && h <= 1e-8 && ea <= 1e-10 && eh <= 1e-8,
         fmt("C_g errors %.1e, %.1e (1e-8); eps0 errors %.1e (1e-10), %.1e (1e-8)", a, h, ea, eh));
}

void criterion9(Rng& rng) {
  double sym = 0.0, tri = INFINITY;
  bool conv = true;
  for (int t = 0; t < 20; ++t) {
    const Mobility g = Mobility::builtin(kBuiltins[t % 3]);
    const int n = uniform_int(rng, 2, 5);
    const WeightedGraph G = random_graph(rng, n);
    const Vector a = random_interior(rng, n);
    const Vector b = random_interior(rng, n);
    const Vector c = random_interior(rng, n);
    auto dist = [&](const Vector& x, const Vector& y) {
      const GeodesicResult r = solve(G, g, x, y, 64);
      conv = conv && r.converged;
      return std::sqrt(2.0 * r.report.action);
    };
    const double ab = dist(a, b), ba = dist(b, a), bc = dist(b, c), ac = dist(a, c);
    sym = std::max(sym, std::abs(ab - ba));
    tri = std::min(tri, ab + bc - ac);
  }
  report(9, conv && sym <= 1e-6 && tri >= -5e-3,
         fmt("20 triples at K=64: max |W(a,b)-W(b,a)| = %.1e (1e-6), min triangle slack %.2e (>= -5e-3)",
             sym, tri));
}

void criterion10() {
  report(10, momentum_checked > 0 && worst_momentum_excess <= 0.0,
         fmt("%d converged solves: max(|m| - W sqrt(max g) - 1e-6) = %.3e (<= 0)", momentum_checked,
             worst_momentum_excess));
}

}  // namespace

int main() {
  Rng rng(kSeed);
  std::printf("seed %llu\n", static_cast<unsigned long long>(kSeed));
  criterion1();
  criterion2();
  criterion3();
  criterion4(rng);
  criterion5(rng);
  criterion6(rng);
  criterion7(rng);
  criterion8();
  criterion9(rng);
  criterion10();
  return failures;
}
