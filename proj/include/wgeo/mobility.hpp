#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace wgeo {

/// Value and derivatives of g at a point of the closed quadrant.
struct MobilityJet {
  double g = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double g11 = 0.0;
  double g12 = 0.0;
  double g22 = 0.0;
};

enum class MobilityKind { arithmetic, logarithmic, harmonic, custom };

/// A mobility function g on [0, inf)^2.
///
/// Builtins carry analytic derivatives. Custom mobilities only supply values
/// and get central finite-difference partials.
class Mobility {
 public:
  using Fn = std::function<double(double, double)>;

  static Mobility builtin(const std::string& name);
  static Mobility custom(std::string name, Fn fn);

  const std::string& name() const { return name_; }
  MobilityKind kind() const { return kind_; }

  double operator()(double r, double s) const { return eval(r, s); }
  double eval(double r, double s) const;

  /// d g / d r on the open quadrant.
  double partial1(double r, double s) const;
  double partial2(double r, double s) const { return partial1(s, r); }

  MobilityJet jet(double r, double s) const;

  /// Largest value of g on [0,1]^2, attained at (1,1) by monotonicity.
  double max_unit_square() const { return eval(1.0, 1.0); }

 private:
  Mobility(std::string name, MobilityKind kind, Fn fn);

  std::string name_;
  MobilityKind kind_;
  Fn fn_;
};

/// Integral of 1/sqrt(g(r, 1-r)) over [0,1].
struct CgResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool divergent = false;
  bool converged = true;
};

CgResult c_g(const Mobility& g);

/// Primitive G(tau) = int_0^tau dr / sqrt(g(r, 1-r)).
double g_primitive(const Mobility& g, double tau);

/// Inverse of g_primitive on [0, C_g], by bisection.
double g_primitive_inverse(const Mobility& g, double value, double c_total);

/// sup of g(x, 1-x) over [0,1].
double epsilon0(const Mobility& g);

struct AuditReport {
  int samples = 0;
  double symmetry = 0.0;
  double homogeneity = 0.0;
  double concavity = 0.0;  // largest midpoint-inequality violation
  double euler = 0.0;
  double partial_fd = 0.0;
  double positivity = 0.0;  // count of non-positive interior values
  bool passed = true;
};

/// Randomized check of symmetry, 1-homogeneity, concavity, Euler relation
/// and the analytic partial against finite differences.
AuditReport audit(const Mobility& g, int samples, std::uint64_t seed = 1);

}  // namespace wgeo
