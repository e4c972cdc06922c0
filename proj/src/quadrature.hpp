#pragma once

#include <functional>
#include <vector>

namespace wgeo::detail {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b] with a global error target.
QuadResult integrate_gk(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, double rel_tol = 1e-13,
                        int max_intervals = 4000);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre01(int n, std::vector<double>& nodes,
                      std::vector<double>& weights);

}  // namespace wgeo::detail
