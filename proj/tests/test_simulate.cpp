#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "netkoop/errors.hpp"
#include "netkoop/parallel.hpp"
#include "netkoop/simulate.hpp"
#include "test_util.hpp"

using namespace netkoop;

namespace {

NetworkModel scalar_model(const ScalarFunction& fn, double coef) {
  NetworkModel m;
  m.node_dims = {1};
  m.nodes.assign(1, NodeModel{1, {}});
  m.add_term(0, {BlockKind::Node, 0}, fn, {coef});
  return m;
}

double flow_error(const NetworkModel& m, double x0, double t, int steps, double exact) {
  IntegratorConfig ic;
  ic.substeps = steps;
  Vector x(1);
  x << x0;
  return std::abs(flow(m, x, Vector(), t, ic)(0) - exact);
}

}  // namespace

TEST_CASE("RK4 converges with fourth order") {
  SUBCASE("linear decay") {
    const auto m = scalar_model(ScalarFunction::coordinate(0), -2.0);
    const double exact = 0.7 * std::exp(-2.0);
    const double e1 = flow_error(m, 0.7, 1.0, 10, exact);
    const double e2 = flow_error(m, 0.7, 1.0, 20, exact);
    CHECK(std::log2(e1 / e2) >= 3.7);
  }
  SUBCASE("quadratic decay") {
    const auto m = scalar_model(ScalarFunction::monomial(2), -1.0);
    const double exact = 0.9 / (1.0 + 0.9 * 2.0);
    const double e1 = flow_error(m, 0.9, 2.0, 8, exact);
    const double e2 = flow_error(m, 0.9, 2.0, 16, exact);
    CHECK(std::log2(e1 / e2) >= 3.7);
  }
  SUBCASE("step count from the maximal step") {
    IntegratorConfig ic;
    CHECK(ic.steps_for(0.01) == 10);
    CHECK(ic.steps_for(0.0105) == 11);
    ic.substeps = 3;
    CHECK(ic.steps_for(5.0) == 3);
  }
}

TEST_CASE("finite-time blow-up raises a divergence error") {
  const auto m = scalar_model(ScalarFunction::monomial(2), 1.0);
  Vector x(1);
  x << 1.0;
  CHECK_THROWS_AS(flow(m, x, Vector(), 3.0), DivergenceError);
  DatasetSpec spec;
  spec.samples = 4;
  spec.ts = 3.0;
  spec.state_box = {{0.5, 1.0}};
  CHECK_THROWS_AS(gen_dataset(m, spec), DivergenceError);
}

TEST_CASE("datasets are reproducible and independent of the thread count") {
  const NetworkModel m = gen_erdos_renyi_poly(12, 0.3, 4);
  DatasetSpec spec;
  spec.samples = 64;
  spec.ts = 0.05;
  spec.noise_sigma = 0.01;
  spec.seed = 9;
  set_thread_count(1);
  const SnapshotDataset a = gen_dataset(m, spec);
  set_thread_count(4);
  const SnapshotDataset b = gen_dataset(m, spec);
  set_thread_count(1);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.u == b.u);
  CHECK(a.model_hash == m.hash());
  spec.seed = 10;
  CHECK(gen_dataset(m, spec).x != a.x);

  // Clean snapshots follow the flow.
  for (Eigen::Index k = 0; k < 5; ++k) {
    const Vector y = flow(m, a.x_clean.row(k).transpose(), a.u.row(k).transpose(), spec.ts);
    CHECK((y - a.y_clean.row(k).transpose()).norm() < 1e-14);
  }
  CHECK(a.x_clean.minCoeff() >= -1.0);
  CHECK(a.x_clean.maxCoeff() < 1.0);
}

TEST_CASE("measurement noise has the requested standard deviation") {
  const NetworkModel m = gen_erdos_renyi_poly(10, 0.2, 1);
  DatasetSpec spec;
  spec.samples = 4000;
  spec.ts = 0.01;
  spec.noise_sigma = 0.05;
  spec.seed = 3;
  const SnapshotDataset ds = gen_dataset(m, spec);
  for (const Matrix& d : {Matrix(ds.x - ds.x_clean), Matrix(ds.y - ds.y_clean)}) {
    const double mean = d.mean();
    const double sd = std::sqrt((d.array() - mean).square().sum() / static_cast<double>(d.size() - 1));
    CHECK(std::abs(mean) < 0.002);
    CHECK(sd == doctest::Approx(0.05).epsilon(0.02));
  }
  spec.noise_sigma = 0.0;
  const SnapshotDataset clean = gen_dataset(m, spec);
  CHECK(clean.x == clean.x_clean);
}

TEST_CASE("dataset save and load round trip") {
  test::TempDir dir("dataset");
  const NetworkModel m = gen_hindmarsh_rose(8, 2, 0.2, 5);
  DatasetSpec spec;
  spec.samples = 10;
  spec.ts = 0.01;
  spec.noise_sigma = 0.02;
  spec.seed = 4;
  const SnapshotDataset ds = gen_dataset(m, spec);
  save_dataset(ds, dir.str());
  const SnapshotDataset r = load_dataset(dir.str());
  CHECK(r.x == ds.x);
  CHECK(r.y == ds.y);
  CHECK(r.u.size() == 0);
  CHECK(r.x_clean == ds.x_clean);
  CHECK(r.node_dims == ds.node_dims);
  CHECK(r.ts == ds.ts);
  CHECK(r.noise_sigma == ds.noise_sigma);
  CHECK(r.model_hash == ds.model_hash);
}

TEST_CASE("csv reader rejects malformed files") {
  test::TempDir dir("csv");
  const auto path = (dir.path / "m.csv").string();
  auto write = [&](const char* text) {
    std::ofstream(path, std::ios::binary) << text;
  };
  write("1,2\n3,4\n");
  CHECK(read_csv_matrix(path, 2, 2)(1, 0) == 3.0);
  write("1,2\n3,x\n");
  CHECK_THROWS_AS(read_csv_matrix(path, 2, 2), ParseError);
  write("1,2\n3\n");
  CHECK_THROWS_AS(read_csv_matrix(path, 2, 2), ParseError);
  write("1,2\n3,4");
  CHECK_THROWS_AS(read_csv_matrix(path, 2, 2), ParseError);
  write("1,2\n");
  CHECK_THROWS_AS(read_csv_matrix(path, 2, 2), ValidationError);
  CHECK_THROWS_AS(read_csv_matrix((dir.path / "missing.csv").string(), 1, 1), IoError);
}
