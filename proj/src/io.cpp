#include "wgeo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace wgeo {

namespace {

using Row = std::vector<std::string>;

Row split(const std::string& line) {
  Row out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<Row> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split(line));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": empty file");
  return rows;
}

double to_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": bad number '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument(where + ": bad number '" + s + "'");
  return v;
}

void expect_header(const Row& got, const Row& want, const std::string& path) {
  if (got != want) throw std::invalid_argument(path + ": unexpected header");
}

Row numbered(const std::string& prefix, int n) {
  Row r;
  for (int i = 1; i <= n; ++i) r.push_back(prefix + std::to_string(i));
  return r;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void put_row(std::ostream& out, const std::vector<double>& vals) {
  for (std::size_t c = 0; c < vals.size(); ++c) {
    if (c) out << ',';
    out << format_double(vals[c]);
  }
  out << '\n';
}

void put_header(std::ostream& out, const Row& h) {
  for (std::size_t c = 0; c < h.size(); ++c) out << (c ? "," : "") << h[c];
  out << '\n';
}

Row momentum_header(const WeightedGraph& G) {
  Row h{"t"};
  for (const Edge& e : G.edges()) {
    h.push_back("m_" + std::to_string(e.i + 1) + "_" + std::to_string(e.j + 1));
  }
  return h;
}

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Vector parse_vector(const std::string& text) {
  std::string body = text;
  if (body.find_first_of("[,") == std::string::npos) {
    std::ifstream in(text);
    if (in) {
      std::stringstream ss;
      ss << in.rdbuf();
      body = ss.str();
    }
  }
  for (char& c : body) {
    if (c == '[' || c == ']' || c == ',' || c == '\n' || c == '\t' || c == '\r') c = ' ';
  }
  std::istringstream in(body);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) vals.push_back(to_double(tok, "vector"));
  if (vals.empty()) throw std::invalid_argument("empty vector: " + text);
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

void write_trajectory_csv(const std::string& path, const DiscretePath& p) {
  std::ofstream out = open_out(path);
  Row h{"t"};
  for (const std::string& s : numbered("rho_", p.n())) h.push_back(s);
  put_header(out, h);
  for (int k = 0; k <= p.K; ++k) {
    std::vector<double> vals{static_cast<double>(k) / p.K};
    for (int i = 0; i < p.n(); ++i) vals.push_back(p.rho(k, i));
    put_row(out, vals);
  }
}

void write_momentum_csv(const std::string& path, const WeightedGraph& G,
                        const DiscretePath& p) {
  std::ofstream out = open_out(path);
  put_header(out, momentum_header(G));
  for (int k = 0; k < p.K; ++k) {
    std::vector<double> vals{(k + 0.5) / p.K};
    for (int e = 0; e < G.num_edges(); ++e) vals.push_back(p.m(k, e));
    put_row(out, vals);
  }
}

void write_dual_csv(const std::string& path, const DualPath& d) {
  std::ofstream out = open_out(path);
  const int K = d.K();
  const int n = static_cast<int>(d.lambda.cols());
  Row h{"t"};
  for (const char* pre : {"lambda_", "rate_", "jump_", "flag_", "mid_"}) {
    for (const std::string& s : numbered(pre, n)) h.push_back(s);
  }
  put_header(out, h);
  for (int k = 0; k <= K; ++k) {
    std::vector<double> vals{static_cast<double>(k) / K};
    for (int i = 0; i < n; ++i) vals.push_back(d.lambda(k, i));
    const bool last = k == K;
    for (int i = 0; i < n; ++i) vals.push_back(last ? 0.0 : d.abs_rate(k, i));
    for (int i = 0; i < n; ++i) vals.push_back(last ? 0.0 : d.jump(k, i));
    for (int i = 0; i < n; ++i) vals.push_back(!last && d.jump_flag(k, i) ? 1.0 : 0.0);
    for (int i = 0; i < n; ++i) vals.push_back(last ? 0.0 : d.mid(k, i));
    put_row(out, vals);
  }
}

DiscretePath read_path_csv(const std::string& trajectory,
                           const std::string& momentum,
                           const WeightedGraph& G) {
  const int n = G.n();
  const std::vector<Row> tr = read_csv(trajectory);
  Row h{"t"};
  for (const std::string& s : numbered("rho_", n)) h.push_back(s);
  expect_header(tr[0], h, trajectory);
  const int K = static_cast<int>(tr.size()) - 2;
  if (K < 1) throw std::invalid_argument(trajectory + ": needs at least two nodes");

  const std::vector<Row> mo = read_csv(momentum);
  expect_header(mo[0], momentum_header(G), momentum);
  if (static_cast<int>(mo.size()) - 1 != K) {
    throw std::invalid_argument(momentum + ": interval count does not match trajectory");
  }

  DiscretePath p;
  p.K = K;
  p.rho.resize(K + 1, n);
  for (int k = 0; k <= K; ++k) {
    const Row& r = tr[k + 1];
    if (static_cast<int>(r.size()) != n + 1) {
      throw std::invalid_argument(trajectory + ": wrong column count");
    }
    for (int i = 0; i < n; ++i) p.rho(k, i) = to_double(r[i + 1], trajectory);
  }
  const int E = G.num_edges();
  p.m.resize(K, E);
  for (int k = 0; k < K; ++k) {
    const Row& r = mo[k + 1];
    if (static_cast<int>(r.size()) != E + 1) {
      throw std::invalid_argument(momentum + ": wrong column count");
    }
    for (int e = 0; e < E; ++e) p.m(k, e) = to_double(r[e + 1], momentum);
  }
  return p;
}

DualPath read_dual_csv(const std::string& path, int n) {
  const std::vector<Row> rows = read_csv(path);
  Row h{"t"};
  for (const char* pre : {"lambda_", "rate_", "jump_", "flag_", "mid_"}) {
    for (const std::string& s : numbered(pre, n)) h.push_back(s);
  }
  expect_header(rows[0], h, path);
  const int K = static_cast<int>(rows.size()) - 2;
  if (K < 1) throw std::invalid_argument(path + ": needs at least two nodes");
  DualPath d;
  d.lambda.resize(K + 1, n);
  d.abs_rate.resize(K, n);
  d.jump.resize(K, n);
  d.jump_flag.setConstant(K, n, false);
  d.mid.resize(K, n);
  for (int k = 0; k <= K; ++k) {
    const Row& r = rows[k + 1];
    if (static_cast<int>(r.size()) != 5 * n + 1) {
      throw std::invalid_argument(path + ": wrong column count");
    }
    auto at = [&](int block, int i) { return to_double(r[1 + block * n + i], path); };
    for (int i = 0; i < n; ++i) {
      d.lambda(k, i) = at(0, i);
      if (k == K) continue;
      d.abs_rate(k, i) = at(1, i);
      d.jump(k, i) = at(2, i);
      d.jump_flag(k, i) = at(3, i) != 0.0;
      d.mid(k, i) = at(4, i);
    }
  }
  return d;
}

std::string report_json(const RunReport& r) {
  const CertificateReport& c = r.cert;
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["mobility"] = r.mobility;
  j["K"] = r.K;
  j["seed"] = r.seed;
  j["distance"] = number(r.distance);
  j["action"] = number(c.action);
  j["action_infinite"] = c.action_infinite;
  j["dual_value"] = number(c.dual_value);
  j["gap"] = number(c.gap);
  j["residuals"] = {
      {"continuity", r.continuity_residual},
      {"velocity", c.velocity_residual},
      {"hamilton_jacobi", c.hj_residual},
      {"jump", c.jump_residual},
      {"jump_nodes", c.jump_nodes},
      {"monotonicity", c.monotonicity_violation},
      {"primal", r.primal_residual},
      {"dual", r.dual_residual},
  };
  j["energy_drift"] = number(c.energy_drift);
  j["advisory"] = c.advisory;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

}  // namespace wgeo
