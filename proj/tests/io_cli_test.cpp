#include "wgeo/cli.hpp"
#include "wgeo/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"
#include "wgeo/oracle.hpp"

using namespace wgeo;
using namespace wgeo::testing;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("wgeo_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_graph(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json(const std::string& p) { return nlohmann::json::parse(slurp(p)); }

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const RunConfig& c) {
  std::ostringstream out, err;
  const int code = run(c, out, err);
  return {code, out.str(), err.str()};
}

double field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string k;
  double v;
  while (in >> k >> v) {
    if (k == key) return v;
  }
  return NAN;
}

const char* const kTwo = R"({"n": 2, "edges": [[1, 2, 1]]})";
const char* const kFour = R"({"n": 4, "edges": [[1, 2, 1], [2, 3, 2], [3, 4, 1], [1, 4, 0.5]]})";

}  // namespace

TEST(Format, SeventeenDigitsRoundTrip) {
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double x = uniform(rng, -1.0, 1.0) * std::pow(10.0, uniform_int(rng, -20, 20));
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Format, ParseVector) {
  const Vector a = parse_vector("[0.25, 0.75]");
  ASSERT_EQ(a.size(), 2);
  EXPECT_EQ(a[1], 0.75);
  EXPECT_EQ(parse_vector("0.1,0.2,0.7").size(), 3);
  EXPECT_EQ(parse_vector("1").size(), 1);
  EXPECT_THROW(parse_vector("[0.1, x]"), std::invalid_argument);
  EXPECT_THROW(parse_vector("[]"), std::invalid_argument);
}

TEST_F(TempDir, ParseVectorFromFile) {
  std::ofstream(path("rho.json")) << "[0.5, 0.3, 0.2]\n";
  const Vector v = parse_vector(path("rho.json"));
  ASSERT_EQ(v.size(), 3);
  EXPECT_EQ(v[2], 0.2);
}

TEST_F(TempDir, CsvRoundTripIsExact) {
  const Mobility g = Mobility::builtin("harmonic");
  const OracleResult o = two_vertex_geodesic(g, 2.0, 0.9, 0.15, 32);
  write_trajectory_csv(path("t.csv"), o.path);
  write_momentum_csv(path("m.csv"), o.graph, o.path);
  write_dual_csv(path("d.csv"), o.dual);
  const DiscretePath p = read_path_csv(path("t.csv"), path("m.csv"), o.graph);
  const DualPath d = read_dual_csv(path("d.csv"), 2);
  EXPECT_EQ(p.K, 32);
  EXPECT_EQ(p.rho, o.path.rho);
  EXPECT_EQ(p.m, o.path.m);
  EXPECT_EQ(d.lambda, o.dual.lambda);
  EXPECT_EQ(d.abs_rate, o.dual.abs_rate);
  EXPECT_EQ(d.jump, o.dual.jump);
  EXPECT_EQ(d.mid, o.dual.mid);
  EXPECT_TRUE((d.jump_flag == o.dual.jump_flag).all());
  EXPECT_EQ(slurp(path("t.csv")).substr(0, 14), "t,rho_1,rho_2\n");
}

TEST_F(TempDir, CsvRejectsMismatch) {
  const OracleResult o = two_vertex_geodesic(Mobility::builtin("arithmetic"), 1.0, 1.0, 0.0, 4);
  write_trajectory_csv(path("t.csv"), o.path);
  write_momentum_csv(path("m.csv"), o.graph, o.path);
  EXPECT_THROW(read_path_csv(path("t.csv"), path("m.csv"), boundary_graph()), std::invalid_argument);
  EXPECT_THROW(read_path_csv(path("missing.csv"), path("m.csv"), o.graph), std::invalid_argument);
  std::ofstream(path("bad.csv")) << "t,rho_1,rho_2\n0,0.5,zz\n1,0.5,0.5\n";
  EXPECT_THROW(read_path_csv(path("bad.csv"), path("m.csv"), o.graph), std::invalid_argument);
}

TEST(Report, JsonShape) {
  RunReport r;
  r.command = "dist";
  r.cert.action = 1.0;
  r.cert.action_infinite = false;
  r.distance = std::sqrt(2.0);
  const nlohmann::json j = nlohmann::json::parse(report_json(r));
  for (const char* key : {"distance", "action", "dual_value", "gap", "residuals", "energy_drift",
                          "converged", "iterations", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["residuals"].contains("velocity"));
  r.distance = INFINITY;
  EXPECT_TRUE(nlohmann::json::parse(report_json(r))["distance"].is_null());
}

TEST_F(TempDir, DistTwoVertex) {
  RunConfig c;
  c.command = "dist";
  c.graph_path = write_graph("g.json", kTwo);
  c.rho0 = "1,0";
  c.rho1 = "0,1";
  c.output_dir = path("out");
  const Outcome o = run_cli(c);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NEAR(field(o.out, "W_g"), std::sqrt(2.0), 1e-3);
  const nlohmann::json j = load_json(path("out/report.json"));
  EXPECT_NEAR(j["distance"].get<double>(), 1.41421, 1e-3);
  EXPECT_TRUE(j["converged"].get<bool>());
}

TEST_F(TempDir, PoincareUniform) {
  RunConfig c;
  c.command = "poincare";
  c.graph_path = write_graph("g.json", kTwo);
  c.rho0 = "[0.5, 0.5]";
  c.output_dir = path("out");
  const Outcome o = run_cli(c);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NEAR(field(o.out, "gamma_P"), 1.0, 1e-12);
  EXPECT_EQ(load_json(path("out/poincare.json"))["components"].dump(), "[[1,2]]");
}

TEST_F(TempDir, GeodesicEqualEndpoints) {
  RunConfig c;
  c.command = "geodesic";
  c.graph_path = write_graph("g.json", kFour);
  c.rho0 = c.rho1 = "[0.1, 0.2, 0.3, 0.4]";
  c.K = 8;
  c.output_dir = path("out");
  const Outcome o = run_cli(c);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_EQ(field(o.out, "W_g"), 0.0);
  const DiscretePath p = read_path_csv(path("out/trajectory.csv"), path("out/momentum.csv"),
                                       load_graph_json(c.graph_path));
  for (int k = 0; k <= 8; ++k) EXPECT_LE(std::abs(p.rho(k, 3) - 0.4), 1e-15);
}

TEST_F(TempDir, GeodesicCertifyRoundTripAndDeterminism) {
  RunConfig c;
  c.command = "geodesic";
  c.graph_path = write_graph("g.json", kFour);
  c.mobility = "logarithmic";
  c.rho0 = "[0.4, 0.3, 0.2, 0.1]";
  c.rho1 = "[0.1, 0.1, 0.3, 0.5]";
  c.K = 32;
  c.output_dir = path("a");
  ASSERT_EQ(run_cli(c).code, kExitOk);
  c.output_dir = path("b");
  ASSERT_EQ(run_cli(c).code, kExitOk);
  for (const char* f : {"trajectory.csv", "momentum.csv", "dual.csv"}) {
    EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
  }

  RunConfig v = c;
  v.command = "certify";
  v.input_dir = path("a");
  v.output_dir = path("cert");
  ASSERT_EQ(run_cli(v).code, kExitOk);
  const nlohmann::json a = load_json(path("a/report.json"));
  const nlohmann::json b = load_json(path("cert/certificate.json"));
  EXPECT_NEAR(a["gap"].get<double>(), b["gap"].get<double>(), 1e-12);
  EXPECT_NEAR(a["action"].get<double>(), b["action"].get<double>(), 1e-12);
  for (const char* k : {"velocity", "hamilton_jacobi", "jump", "monotonicity"}) {
    EXPECT_NEAR(a["residuals"][k].get<double>(), b["residuals"][k].get<double>(), 1e-12) << k;
  }
}

TEST_F(TempDir, ValidationFailures) {
  RunConfig c;
  c.command = "dist";
  c.graph_path = write_graph("g.json", kTwo);
  c.rho0 = "1,0,0";
  c.rho1 = "0,1";
  c.output_dir = path("out");
  EXPECT_EQ(run_cli(c).code, kExitInvalid);

  c.rho0 = "0.7,0.7";
  EXPECT_EQ(run_cli(c).code, kExitInvalid);

  c.rho0 = "1,0";
  c.graph_path = write_graph("bad.json", R"({"n": 2, "edges": [[1, 2, 1])");
  const Outcome o = run_cli(c);
  EXPECT_EQ(o.code, kExitInvalid);
  EXPECT_NE(o.err.find("JSON"), std::string::npos);

  c.graph_path = path("absent.json");
  EXPECT_EQ(run_cli(c).code, kExitInvalid);

  c.graph_path = path("g.json");
  c.K = 1;
  EXPECT_EQ(run_cli(c).code, kExitInvalid);

  c.K = 64;
  c.mobility = "geometric";
  EXPECT_EQ(run_cli(c).code, kExitInvalid);

  c.mobility = "arithmetic";
  c.command = "bogus";
  EXPECT_EQ(run_cli(c).code, kExitInvalid);
}

TEST_F(TempDir, NonConvergenceExitCode) {
  RunConfig c;
  c.command = "dist";
  c.graph_path = write_graph("g.json", kFour);
  c.mobility = "harmonic";
  c.rho0 = "[0.4, 0.3, 0.2, 0.1]";
  c.rho1 = "[0.1, 0.1, 0.3, 0.5]";
  c.max_iter = 1;
  c.output_dir = path("out");
  EXPECT_EQ(run_cli(c).code, kExitNotConverged);
  EXPECT_FALSE(load_json(path("out/report.json"))["converged"].get<bool>());
}

TEST_F(TempDir, OracleCases) {
  RunConfig c;
  c.command = "oracle";
  c.oracle_case = "two-vertex";
  c.mobility = "harmonic";
  c.output_dir = path("tv");
  Outcome o = run_cli(c);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NEAR(field(o.out, "W_squared"), M_PI * M_PI, 1e-8);
  EXPECT_TRUE(fs::exists(path("tv/trajectory.csv")));

  c.oracle_case = "boundary3";
  c.mobility = "arithmetic";
  c.output_dir = path("b3");
  o = run_cli(c);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NEAR(field(o.out, "W_squared"), 0.5, 1e-12);

  c.oracle_case = "ode";
  c.output_dir = path("ode");
  o = run_cli(c);
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NEAR(field(o.out, "action"), field(o.out, "dual_value"), 1e-6);
  EXPECT_NEAR(load_json(path("ode/ode_checks.json"))["qddot1_at_zero"].get<double>(), 0.25, 1e-15);

  c.oracle_case = "nope";
  EXPECT_EQ(run_cli(c).code, kExitInvalid);
}

TEST_F(TempDir, Audit) {
  RunConfig c;
  c.command = "audit";
  c.mobility = "logarithmic";
  c.samples = 200;
  c.seed = 9;
  c.output_dir = path("out");
  ASSERT_EQ(run_cli(c).code, kExitOk);
  const nlohmann::json j = load_json(path("out/audit.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["seed"].get<int>(), 9);
}
