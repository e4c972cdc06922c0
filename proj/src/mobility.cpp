#include "wgeo/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "quadrature.hpp"

namespace wgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Taylor coefficients of y / log(1 + y) about y = 0.
constexpr double kLogMeanSeries[13] = {
    1.0,
    0.5,
    -1.0 / 12.0,
    1.0 / 24.0,
    -19.0 / 720.0,
    3.0 / 160.0,
    -863.0 / 60480.0,
    275.0 / 24192.0,
    -33953.0 / 3628800.0,
    8183.0 / 1036800.0,
    -3250433.0 / 479001600.0,
    4671.0 / 788480.0,
    -13695779093.0 / 2615348736000.0};

// Profile phi(x) = g(1, x) on [0, 1] and its first two derivatives.
struct Profile {
  double p, dp, ddp;
};

void log_series(double y, double& p, double& dp, double& ddp) {
  p = dp = ddp = 0.0;
  for (int k = 12; k >= 0; --k) {
    p = p * y + kLogMeanSeries[k];
    if (k >= 1) dp = dp * y + k * kLogMeanSeries[k];
    if (k >= 2) ddp = ddp * y + k * (k - 1) * kLogMeanSeries[k];
  }
}

Profile profile(MobilityKind kind, double x) {
  switch (kind) {
    case MobilityKind::arithmetic:
      return {0.5 * (1.0 + x), 0.5, 0.0};
    case MobilityKind::harmonic: {
      const double d = 1.0 + x;
      return {x / d, 1.0 / (d * d), -2.0 / (d * d * d)};
    }
    case MobilityKind::logarithmic: {
      if (x <= 0.0) return {0.0, kInf, -kInf};
      const double y = x - 1.0;
      if (std::abs(y) < 0.05) {
        Profile r{};
        log_series(y, r.p, r.dp, r.ddp);
        return r;
      }
      const double l = std::log(x);
      const double p = (x - 1.0) / l;
      const double dp = (x * l - x + 1.0) / (x * l * l);
      const double ddp =
          (-(x + 1.0) * l + 2.0 * (x - 1.0)) / (x * x * l * l * l);
      return {p, dp, ddp};
    }
    case MobilityKind::custom:
      break;
  }
  throw std::logic_error("profile: custom mobility has no analytic profile");
}

// Jet of g at (r, s) with r >= s, r > 0, via g(r, s) = r phi(s / r).
MobilityJet jet_ordered(MobilityKind kind, double r, double s) {
  const double x = s / r;
  const Profile p = profile(kind, x);
  MobilityJet j;
  j.g = r * p.p;
  j.g2 = p.dp;
  if (x == 0.0) {
    j.g1 = p.p;
    j.g22 = p.ddp / r;
    j.g12 = std::isfinite(p.ddp) ? 0.0 : kInf;
    j.g11 = 0.0;
  } else {
    j.g1 = p.p - x * p.dp;
    j.g22 = p.ddp / r;
    j.g12 = -x * p.ddp / r;
    j.g11 = x * x * p.ddp / r;
  }
  return j;
}

double fd_step(double r, double s) { return 1e-6 * std::max({r, s, 1e-8}); }

}  // namespace

Mobility::Mobility(std::string name, MobilityKind kind, Fn fn)
    : name_(std::move(name)), kind_(kind), fn_(std::move(fn)) {}

Mobility Mobility::builtin(const std::string& name) {
  if (name == "arithmetic") {
    return Mobility(name, MobilityKind::arithmetic, nullptr);
  }
  if (name == "logarithmic") {
    return Mobility(name, MobilityKind::logarithmic, nullptr);
  }
  if (name == "harmonic") {
    return Mobility(name, MobilityKind::harmonic, nullptr);
  }
  throw std::invalid_argument("unknown mobility: " + name);
}

Mobility Mobility::custom(std::string name, Fn fn) {
  if (!fn) throw std::invalid_argument("custom mobility needs a function");
  return Mobility(std::move(name), MobilityKind::custom, std::move(fn));
}

double Mobility::eval(double r, double s) const {
  if (r < 0.0 || s < 0.0) {
    throw std::domain_error("mobility evaluated at a negative argument");
  }
  switch (kind_) {
    case MobilityKind::arithmetic:
      return 0.5 * (r + s);
    case MobilityKind::harmonic:
      if (r == 0.0 || s == 0.0) return 0.0;
      return r * s / (r + s);
    case MobilityKind::logarithmic: {
      if (r == 0.0 || s == 0.0) return 0.0;
      const double lo = std::min(r, s);
      const double z = (std::max(r, s) - lo) / lo;
      if (z < 1e-3) {
        // Gregory coefficients of z / log1p(z).
        return lo * (1.0 + z * (0.5 + z * (-1.0 / 12 + z * (1.0 / 24 + z * (-19.0 / 720 + z * 3.0 / 160)))));
      }
      return lo * z / std::log1p(z);
    }
    case MobilityKind::custom:
      return fn_(r, s);
  }
  return 0.0;
}

double Mobility::partial1(double r, double s) const {
  if (kind_ == MobilityKind::custom) {
    const double h = fd_step(r, s);
    if (r > h) return (eval(r + h, s) - eval(r - h, s)) / (2.0 * h);
    return (eval(r + h, s) - eval(r, s)) / h;
  }
  return jet(r, s).g1;
}

MobilityJet Mobility::jet(double r, double s) const {
  if (r < 0.0 || s < 0.0) {
    throw std::domain_error("mobility evaluated at a negative argument");
  }
  if (kind_ == MobilityKind::custom) {
    MobilityJet j;
    j.g = eval(r, s);
    j.g1 = partial1(r, s);
    j.g2 = partial1(s, r);
    const double h = 1e3 * fd_step(r, s);
    const double rm = std::max(r - h, 0.0);
    const double sm = std::max(s - h, 0.0);
    j.g11 = (partial1(r + h, s) - partial1(rm, s)) / (r + h - rm);
    j.g22 = (partial1(s + h, r) - partial1(sm, r)) / (s + h - sm);
    j.g12 = (partial1(r, s + h) - partial1(r, sm)) / (s + h - sm);
    return j;
  }
  if (r == 0.0 && s == 0.0) {
    const Profile p = profile(kind_, 1.0);
    MobilityJet j;
    j.g1 = j.g2 = p.p - p.dp;
    return j;
  }
  MobilityJet j;
  if (r >= s) {
    j = jet_ordered(kind_, r, s);
  } else {
    const MobilityJet t = jet_ordered(kind_, s, r);
    j = {t.g, t.g2, t.g1, t.g22, t.g12, t.g11};
  }
  j.g = eval(r, s);
  return j;
}

namespace {

// 2u / sqrt(g(u^2, 1 - u^2)), the integrand after r = u^2; `flip` mirrors
// the arguments for the substitution 1 - r = u^2.
double substituted(const Mobility& g, double u, bool flip) {
  const double a = u * u;
  const double b = 1.0 - a;
  const double v = flip ? g(b, a) : g(a, b);
  if (v <= 0.0) return u == 0.0 ? 0.0 : kInf;
  return 2.0 * u / std::sqrt(v);
}

// Growth test near u = 0 of the substituted integrand: an integrable
// inverse-square-root singularity becomes bounded after the substitution.
bool endpoint_divergent(const Mobility& g, bool flip) {
  double prev = substituted(g, 1e-2, flip);
  int growth = 0;
  for (int k = 3; k <= 9; ++k) {
    const double cur = substituted(g, std::pow(10.0, -k), flip);
    if (!std::isfinite(cur)) return true;
    if (cur > 3.0 * prev) ++growth;
    prev = cur;
  }
  return growth >= 5;
}

double half_integral(const Mobility& g, double upper, bool flip,
                     detail::QuadResult* out = nullptr) {
  auto f = [&](double u) { return substituted(g, u, flip); };
  detail::QuadResult r = detail::integrate_gk(f, 0.0, upper, 1e-14, 1e-14);
  if (out) *out = r;
  return r.value;
}

}  // namespace

CgResult c_g(const Mobility& g) {
  CgResult res;
  if (endpoint_divergent(g, false) || endpoint_divergent(g, true)) {
    res.divergent = true;
    res.value = kInf;
    return res;
  }
  const double mid = std::sqrt(0.5);
  detail::QuadResult lo, hi;
  half_integral(g, mid, false, &lo);
  half_integral(g, mid, true, &hi);
  res.value = lo.value + hi.value;
  res.error_estimate = lo.error + hi.error;
  res.converged = lo.converged && hi.converged;
  if (!std::isfinite(res.value)) {
    res.divergent = true;
    res.value = kInf;
  }
  return res;
}

double g_primitive(const Mobility& g, double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  if (tau <= 0.5) return half_integral(g, std::sqrt(tau), false);
  const double total = half_integral(g, std::sqrt(0.5), false) +
                       half_integral(g, std::sqrt(0.5), true);
  return total - half_integral(g, std::sqrt(1.0 - tau), true);
}

double g_primitive_inverse(const Mobility& g, double value, double c_total) {
  if (value <= 0.0) return 0.0;
  if (value >= c_total) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g_primitive(g, mid) < value) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const double gx = g(x, 1.0 - x);
    if (gx <= 0.0) break;
    const double step = (g_primitive(g, x) - value) * std::sqrt(gx);
    const double next = x - step;
    if (next <= lo || next >= hi) break;
    x = next;
    if (std::abs(step) < 1e-16) break;
  }
  return x;
}

double epsilon0(const Mobility& g) {
  const int n = 2000;
  int best = 0;
  double best_v = -kInf;
  for (int k = 0; k <= n; ++k) {
    const double x = static_cast<double>(k) / n;
    const double v = g(x, 1.0 - x);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  double a = std::max(0, best - 1) / static_cast<double>(n);
  double b = std::min(n, best + 1) / static_cast<double>(n);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = g(c, 1.0 - c);
  double fd = g(d, 1.0 - d);
  while (b - a > 1e-13) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = g(c, 1.0 - c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = g(d, 1.0 - d);
    }
  }
  return std::max({best_v, fc, fd});
}

AuditReport audit(const Mobility& g, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("audit needs samples >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(1e-3, 1.0);
  std::uniform_real_distribution<double> scale(1e-3, 10.0);
  AuditReport rep;
  rep.samples = samples;
  for (int k = 0; k < samples; ++k) {
    const double r = unit(rng);
    const double s = unit(rng);
    const double lam = scale(rng);
    const double v = g(r, s);
    if (!(v > 0.0)) rep.positivity += 1.0;
    rep.symmetry = std::max(rep.symmetry, std::abs(v - g(s, r)));
    const double hv = g(lam * r, lam * s);
    rep.homogeneity = std::max(
        rep.homogeneity, std::abs(hv - lam * v) / std::max(lam * v, 1e-300));
    const double r2 = unit(rng);
    const double s2 = unit(rng);
    const double mid = g(0.5 * (r + r2), 0.5 * (s + s2));
    rep.concavity =
        std::max(rep.concavity, 0.5 * (v + g(r2, s2)) - mid);
    const double p1 = g.partial1(r, s);
    const double p2 = g.partial1(s, r);
    rep.euler = std::max(rep.euler, std::abs(r * p1 + s * p2 - v));
    const double h = fd_step(r, s);
    const double fd = (g(r + h, s) - g(r - h, s)) / (2.0 * h);
    rep.partial_fd = std::max(rep.partial_fd,
                              std::abs(p1 - fd) / std::max(1.0, std::abs(p1)));
  }
  rep.passed = rep.positivity == 0.0 && rep.symmetry <= 1e-9 &&
               rep.homogeneity <= 1e-9 && rep.concavity <= 1e-9 &&
               rep.euler <= 1e-8 && rep.partial_fd <= 1e-5;
  return rep;
}

}  // namespace wgeo
