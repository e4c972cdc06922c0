#pragma once

#include <cstdint>
#include <string>

#include "wgeo/graph.hpp"
#include "wgeo/path.hpp"
#include "wgeo/solver.hpp"

namespace wgeo {

/// Fixed 17-significant-digit decimal, so values round-trip exactly.
std::string format_double(double x);

/// Parses "[a, b, ...]", "a,b,..." or the path of a file holding either.
Vector parse_vector(const std::string& text);

/// t,rho_1,...,rho_n at the K+1 nodes.
void write_trajectory_csv(const std::string& path, const DiscretePath& p);
/// t,m_i_j,... at the K interval midpoints, edges in graph order (1-based).
void write_momentum_csv(const std::string& path, const WeightedGraph& G,
                        const DiscretePath& p);
/// One row per node: t, lambda_*, then rate_*, jump_*, flag_*, mid_* of the
/// interval starting there (zeros on the last row).
void write_dual_csv(const std::string& path, const DualPath& d);

/// Throws std::invalid_argument on a malformed file or a header that does
/// not fit the graph.
DiscretePath read_path_csv(const std::string& trajectory,
                           const std::string& momentum,
                           const WeightedGraph& G);
DualPath read_dual_csv(const std::string& path, int n);

struct RunReport {
  std::string command;
  std::string mobility;
  int K = 0;
  std::uint64_t seed = 0;
  double distance = 0.0;
  CertificateReport cert;
  double continuity_residual = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = true;
  int iterations = 0;
};

std::string report_json(const RunReport& r);
void write_text(const std::string& path, const std::string& text);

}  // namespace wgeo
