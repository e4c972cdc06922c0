#include "wgeo/graph.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wgeo/mobility.hpp"

namespace wgeo {

namespace {

void check_dim(const WeightedGraph& G, Eigen::Index len, const char* what) {
  if (len != G.n()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

void check_field(const WeightedGraph& G, const EdgeField& f) {
  if (f.values.rows() != G.n() || f.values.cols() != G.n()) {
    throw std::invalid_argument("edge field: dimension mismatch");
  }
}

}  // namespace

WeightedGraph::WeightedGraph(int n, const std::vector<Edge>& edges)
    : n_(n), omega_(Matrix::Zero(n, n)), adj_(n), inc_(n) {
  if (n < 2) throw std::invalid_argument("graph needs at least 2 vertices");
  for (const Edge& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
      throw std::invalid_argument("graph edge endpoint out of range");
    }
    if (e.i == e.j) throw std::invalid_argument("graph self-loop");
    if (!(e.w >= 0.0) || !std::isfinite(e.w)) {
      throw std::invalid_argument("graph weight must be finite and >= 0");
    }
    if (e.w == 0.0) continue;
    if (omega_(e.i, e.j) != 0.0) {
      throw std::invalid_argument("graph edge listed twice");
    }
    omega_(e.i, e.j) = omega_(e.j, e.i) = e.w;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (omega_(i, j) > 0.0) {
        inc_[i].push_back(static_cast<int>(edges_.size()));
        inc_[j].push_back(static_cast<int>(edges_.size()));
        adj_[i].push_back(j);
        adj_[j].push_back(i);
        edges_.push_back({i, j, omega_(i, j)});
        sqrt_w_.push_back(std::sqrt(omega_(i, j)));
      }
    }
  }
  std::vector<int> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : adj_[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        stack.push_back(u);
      }
    }
  }
  if (std::accumulate(seen.begin(), seen.end(), 0) != n) {
    throw std::invalid_argument("graph is not connected");
  }
}

bool WeightedGraph::is_edge_field(const EdgeField& f, double tol) const {
  if (f.values.rows() != n_ || f.values.cols() != n_) return false;
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (std::abs(f(i, j) + f(j, i)) > tol) return false;
      if (omega_(i, j) == 0.0 && std::abs(f(i, j)) > tol) return false;
    }
  }
  return true;
}

Vector WeightedGraph::edge_values(const EdgeField& f) const {
  check_field(*this, f);
  Vector out(num_edges());
  for (int e = 0; e < num_edges(); ++e) out[e] = f(edges_[e].i, edges_[e].j);
  return out;
}

EdgeField WeightedGraph::field_from_edges(const Vector& values) const {
  if (values.size() != num_edges()) {
    throw std::invalid_argument("edge values: dimension mismatch");
  }
  EdgeField f(n_);
  for (int e = 0; e < num_edges(); ++e) {
    f.set(edges_[e].i, edges_[e].j, values[e]);
  }
  return f;
}

WeightedGraph parse_graph_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("graph JSON: ") + ex.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("edges")) {
    throw std::invalid_argument("graph JSON needs keys \"n\" and \"edges\"");
  }
  if (!doc["n"].is_number_integer() || !doc["edges"].is_array()) {
    throw std::invalid_argument("graph JSON: bad \"n\" or \"edges\"");
  }
  const int n = doc["n"].get<int>();
  std::vector<Edge> edges;
  for (const auto& item : doc["edges"]) {
    if (!item.is_array() || item.size() != 3 || !item[0].is_number_integer() ||
        !item[1].is_number_integer() || !item[2].is_number()) {
      throw std::invalid_argument("graph JSON: edges must be [i, j, w]");
    }
    edges.push_back(
        {item[0].get<int>() - 1, item[1].get<int>() - 1, item[2].get<double>()});
  }
  return WeightedGraph(n, edges);
}

WeightedGraph load_graph_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph_json(ss.str());
}

EdgeField gradient(const WeightedGraph& G, const Vector& phi) {
  check_dim(G, phi.size(), "gradient");
  EdgeField f(G.n());
  for (int e = 0; e < G.num_edges(); ++e) {
    const Edge& ed = G.edges()[e];
    f.set(ed.i, ed.j, G.sqrt_w(e) * (phi[ed.i] - phi[ed.j]));
  }
  return f;
}

Vector divergence_g(const WeightedGraph& G, const EdgeField& m) {
  check_field(G, m);
  Vector d = Vector::Zero(G.n());
  for (int e = 0; e < G.num_edges(); ++e) {
    const Edge& ed = G.edges()[e];
    d[ed.i] += G.sqrt_w(e) * m(ed.j, ed.i);
    d[ed.j] += G.sqrt_w(e) * m(ed.i, ed.j);
  }
  return d;
}

double weighted_norm_sq(const WeightedGraph& G, const Mobility& g,
                        const Vector& rho, const EdgeField& v) {
  check_dim(G, rho.size(), "weighted_norm_sq");
  check_field(G, v);
  double s = 0.0;
  for (const Edge& ed : G.edges()) {
    const double x = v(ed.i, ed.j);
    s += x * x * g(rho[ed.i], rho[ed.j]);
  }
  return s;
}

Vector divergence_rho(const WeightedGraph& G, const Mobility& g,
                      const Vector& rho, const EdgeField& v) {
  check_dim(G, rho.size(), "divergence_rho");
  check_field(G, v);
  Vector d = Vector::Zero(G.n());
  for (int e = 0; e < G.num_edges(); ++e) {
    const Edge& ed = G.edges()[e];
    const double gij = g(rho[ed.i], rho[ed.j]);
    d[ed.i] += G.sqrt_w(e) * v(ed.j, ed.i) * gij;
    d[ed.j] += G.sqrt_w(e) * v(ed.i, ed.j) * gij;
  }
  return d;
}

double edge_pairing(const WeightedGraph& G, const EdgeField& a,
                    const EdgeField& b) {
  check_field(G, a);
  check_field(G, b);
  double s = 0.0;
  for (const Edge& ed : G.edges()) s += a(ed.i, ed.j) * b(ed.i, ed.j);
  return s;
}

double weighted_pairing(const WeightedGraph& G, const Mobility& g,
                        const Vector& rho, const EdgeField& a,
                        const EdgeField& b) {
  check_dim(G, rho.size(), "weighted_pairing");
  double s = 0.0;
  for (const Edge& ed : G.edges()) {
    s += a(ed.i, ed.j) * b(ed.i, ed.j) * g(rho[ed.i], rho[ed.j]);
  }
  return s;
}

}  // namespace wgeo
