#include <cmath>
#include <random>

#include "doctest.h"
#include "netkoop/errors.hpp"
#include "netkoop/local_id.hpp"

using namespace netkoop;

namespace {

// Network whose sampled flow is known in closed form:
//   node 0: x0' = a x0 + c x1^2 + b u0
//   node 1: x1' = 0
//   node 2: x2' = M x2 (two states)
//   node 3: x3' = r x3
// The lifted spans below are invariant, so the local models are exact.
constexpr double kA = -0.7, kC = 0.4, kB = 1.3, kR = -0.5;

Matrix rot_matrix() {
  Matrix m(2, 2);
  m << -0.3, 1.0, -1.0, -0.2;
  return m;
}

SnapshotDataset closed_form_dataset(int samples, double ts, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  SnapshotDataset ds;
  ds.ts = ts;
  ds.node_dims = {1, 1, 2, 1};
  ds.input_dims = {1};
  ds.x.resize(samples, 5);
  ds.u.resize(samples, 1);
  ds.y.resize(samples, 5);
  const Matrix em = expm(rot_matrix() * ts);
  const double ea = std::exp(kA * ts);
  for (int k = 0; k < samples; ++k) {
    for (int c = 0; c < 5; ++c) ds.x(k, c) = d(gen);
    ds.u(k, 0) = d(gen);
    const double x1 = ds.x(k, 1);
    const double forcing = kC * x1 * x1 + kB * ds.u(k, 0);
    ds.y(k, 0) = ea * ds.x(k, 0) + (ea - 1.0) / kA * forcing;
    ds.y(k, 1) = x1;
    ds.y.block(k, 2, 1, 2) = (em * ds.x.block(k, 2, 1, 2).transpose()).transpose();
    ds.y(k, 4) = std::exp(kR * ts) * ds.x(k, 4);
  }
  ds.x_clean = ds.x;
  ds.y_clean = ds.y;
  return ds;
}

LocalDictionary test_dictionary() {
  const auto x0 = ScalarFunction::coordinate(0);
  const auto x1 = ScalarFunction::coordinate(1);
  const auto sq = ScalarFunction::monomial(2);
  LocalDictionary d;
  d.local = {{x0}, {x0}, {x0, x1}, {x0, sq}};
  d.coupling = {{x0}, {sq}, {x0}, {x0}};
  d.input = {{x0}};
  return d;
}

TopologyEstimate true_topology() {
  TopologyEstimate t;
  t.neighbors = {{0, 1}, {1}, {}, {3}};  // self entries are dropped by the local step
  t.inputs = {{0}, {}, {}, {}};
  return t;
}

double term_coef(const NodeModel& nd, BlockKind kind, int src, const std::string& fn, int comp = 0) {
  for (const auto& t : nd.terms)
    if (t.source.kind == kind && t.source.index == src && t.fn.text() == fn) return t.coef[static_cast<std::size_t>(comp)];
  return std::nan("");
}

}  // namespace

TEST_CASE("invariant lifted systems are recovered exactly") {
  const SnapshotDataset ds = closed_form_dataset(40, 0.05, 3);
  const LocalDictionary dict = test_dictionary();
  const LocalRun run = identify_local(ds, true_topology(), dict);
  for (const auto& f : run.failures) CHECK(f.empty());
  const auto& p = run.params.nodes;
  REQUIRE(p.size() == 4);
  CHECK(term_coef(p[0], BlockKind::Node, 0, "x[0]") == doctest::Approx(kA).epsilon(1e-9));
  CHECK(term_coef(p[0], BlockKind::Node, 1, "x[0]^2") == doctest::Approx(kC).epsilon(1e-9));
  CHECK(term_coef(p[0], BlockKind::Input, 0, "x[0]") == doctest::Approx(kB).epsilon(1e-9));
  CHECK(std::abs(term_coef(p[1], BlockKind::Node, 1, "x[0]")) < 1e-10);
  const Matrix m = rot_matrix();
  for (int r = 0; r < 2; ++r) {
    CHECK(term_coef(p[2], BlockKind::Node, 2, "x[0]", r) == doctest::Approx(m(r, 0)).epsilon(1e-9));
    CHECK(term_coef(p[2], BlockKind::Node, 2, "x[1]", r) == doctest::Approx(m(r, 1)).epsilon(1e-9));
  }
  CHECK(term_coef(p[3], BlockKind::Node, 3, "x[0]") == doctest::Approx(kR).epsilon(1e-9));
  CHECK(std::abs(term_coef(p[3], BlockKind::Node, 3, "x[0]^2")) < 1e-9);
  // The lifted row of x^2 evolves with rate 2r.
  CHECK(run.models[3].a(1, 1) == doctest::Approx(2 * kR).epsilon(1e-9));
  CHECK(run.models[0].neighbors == std::vector<int>{1});
  CHECK(run.models[0].regressor_rank == 3);
}

TEST_CASE("integral and inverse zero-order-hold conversions agree") {
  const SnapshotDataset ds = closed_form_dataset(30, 0.1, 5);
  const LocalDictionary dict = test_dictionary();
  LocalOptions inv;
  inv.zoh = ZohMode::Inverse;
  const TopologyEstimate topo = true_topology();
  for (int node : {0, 2, 3}) {
    const auto i = static_cast<std::size_t>(node);
    std::vector<int> others;
    for (int k : topo.neighbors[i])
      if (k != node) others.push_back(k);
    LocalLiftedModel a = fit_local_discrete(ds, node, others, topo.inputs[i], dict);
    LocalLiftedModel b = a;
    to_continuous(a, ds.ts);
    to_continuous(b, ds.ts, inv);
    CHECK((a.e - b.e).norm() < 1e-9);
    CHECK((a.b - b.b).norm() < 1e-9);
    CHECK(a.log_residual < 1e-12);
  }
}

TEST_CASE("integrator nodes need the integral conversion") {
  const SnapshotDataset ds = closed_form_dataset(30, 0.1, 6);
  const LocalDictionary dict = test_dictionary();
  LocalLiftedModel m = fit_local_discrete(ds, 1, {}, {}, dict);
  LocalOptions inv;
  inv.zoh = ZohMode::Inverse;
  LocalLiftedModel copy = m;
  CHECK_THROWS_AS(to_continuous(copy, ds.ts, inv), NumericalError);
  to_continuous(m, ds.ts);
  CHECK(m.a.norm() < 1e-10);
  CHECK(to_string(zoh_mode_from_string("inverse")) == "inverse");
  CHECK_THROWS_AS(zoh_mode_from_string("euler"), ValidationError);
}

TEST_CASE("global lifted model reuses the local rows") {
  const SnapshotDataset ds = closed_form_dataset(40, 0.05, 7);
  const LocalDictionary dict = test_dictionary();
  const LocalRun run = identify_local(ds, true_topology(), dict);
  const GlobalLiftedModel g = assemble_global(ds, run.models, dict);
  // z = [x0 | x1, x1^2 | x2_0, x2_1 | x3, x3^2]
  CHECK(g.z_offsets == std::vector<Eigen::Index>{0, 1, 3, 5});
  CHECK(g.a.rows() == 7);
  CHECK(g.b.cols() == 1);
  CHECK(g.z_names[2] == "z1:x[0]^2");
  CHECK(g.a(0, 0) == doctest::Approx(run.models[0].a(0, 0)));
  CHECK(g.a(0, 2) == doctest::Approx(kC).epsilon(1e-9));
  CHECK(g.a(0, 1) == 0.0);
  CHECK(g.b(0, 0) == doctest::Approx(kB).epsilon(1e-9));
  CHECK(g.a.block(3, 3, 2, 2).isApprox(run.models[2].a));
  // The auxiliary x1^2 row is constant in time.
  CHECK(g.a.row(2).norm() < 1e-9);
  CHECK(g.a.row(0).segment(3, 4).norm() == 0.0);
}

TEST_CASE("lifted prediction follows the sampled flow") {
  const SnapshotDataset ds = closed_form_dataset(40, 0.05, 8);
  const LocalDictionary dict = test_dictionary();
  const LocalRun run = identify_local(ds, true_topology(), dict);
  const Matrix traj = predict_lifted(run.models, dict, ds.node_dims, ds.input_dims, ds.x.row(4).transpose(),
                                     ds.u.row(4), 1);
  CHECK((traj.row(1) - ds.y.row(4)).norm() < 1e-10);
  CHECK_THROWS_AS(predict_lifted(run.models, dict, ds.node_dims, ds.input_dims, Vector::Zero(3), ds.u.row(0), 1),
                  ArgumentError);
}

TEST_CASE("local fit argument checks") {
  const SnapshotDataset ds = closed_form_dataset(20, 0.05, 9);
  const LocalDictionary dict = test_dictionary();
  CHECK_THROWS_AS(fit_local_discrete(ds, 0, {0, 1}, {}, dict), ArgumentError);
  CHECK_THROWS_AS(fit_local_discrete(ds, 0, {2, 1}, {}, dict), ArgumentError);
  CHECK_THROWS_AS(fit_local_discrete(ds, 7, {}, {}, dict), ArgumentError);
  LocalDictionary bad = dict;
  bad.local[2] = {ScalarFunction::coordinate(1), ScalarFunction::coordinate(0)};
  CHECK_THROWS_AS(bad.validate(ds.node_dims, ds.input_dims), ArgumentError);
  const auto u = LocalDictionary::uniform({1, 2}, 1, {ScalarFunction::coordinate(0), ScalarFunction::monomial(2)},
                                          {ScalarFunction::sine()}, {ScalarFunction::coordinate(0)});
  CHECK(u.local[0].size() == 2);
  CHECK(u.local[1].size() == 3);
  CHECK(u.local[1][1] == ScalarFunction::coordinate(1));
}

TEST_CASE("failing nodes are reported without stopping the others") {
  SnapshotDataset ds = closed_form_dataset(30, 0.05, 10);
  // Node 3 steps backwards in time: its discrete map has a negative eigenvalue.
  ds.y.col(4) = -ds.x.col(4);
  const LocalRun run = identify_local(ds, true_topology(), test_dictionary());
  CHECK(run.failures[0].empty());
  CHECK_FALSE(run.failures[3].empty());
  CHECK(run.params.nodes[3].terms.empty());
  CHECK_FALSE(run.params.nodes[0].terms.empty());
}
