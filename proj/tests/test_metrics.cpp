#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "netkoop/errors.hpp"
#include "netkoop/metrics.hpp"

using namespace netkoop;

namespace {

BlockRef node(int k) { return {BlockKind::Node, k}; }
BlockRef input(int k) { return {BlockKind::Input, k}; }

// Three scalar nodes and one input:
//   x0' = -x0 + 0.5 x1^2 + 2 u0
//   x1' = -0.5 x1 + 0.7 sin(x2)
//   x2' = -x2
NetworkModel truth_model() {
  NetworkModel m;
  m.node_dims = {1, 1, 1};
  m.input_dims = {1};
  m.nodes.assign(3, NodeModel{1, {}});
  m.add_term(0, node(0), ScalarFunction::coordinate(0), {-1.0});
  m.add_term(0, node(1), ScalarFunction::monomial(2), {0.5});
  m.add_term(0, input(0), ScalarFunction::coordinate(0), {2.0});
  m.add_term(1, node(1), ScalarFunction::coordinate(0), {-0.5});
  m.add_term(1, node(2), ScalarFunction::sine(), {0.7});
  m.add_term(2, node(2), ScalarFunction::coordinate(0), {-1.0});
  return m;
}

ParameterEstimate estimate() {
  ParameterEstimate p;
  p.nodes.assign(3, NodeModel{1, {}});
  auto add = [&](int i, BlockRef s, ScalarFunction f, double c) { p.nodes[static_cast<std::size_t>(i)].terms.push_back({s, f, {c}}); };
  // node 0: alpha off by 0.1, beta off by 0.2, extra x1^3 = 0.3, gamma off by 0.4, spurious neighbor 2 term 0.05
  add(0, node(0), ScalarFunction::coordinate(0), -0.9);
  add(0, node(1), ScalarFunction::monomial(2), 0.3);
  add(0, node(1), ScalarFunction::monomial(3), 0.3);
  add(0, input(0), ScalarFunction::coordinate(0), 2.4);
  add(0, node(2), ScalarFunction::coordinate(0), 0.05);
  // node 1: neighbor missed entirely
  add(1, node(1), ScalarFunction::coordinate(0), -0.5);
  // node 2: exact plus a spurious input term
  add(2, node(2), ScalarFunction::coordinate(0), -1.0);
  add(2, input(0), ScalarFunction::monomial(2), -0.1);
  return p;
}

}  // namespace

TEST_CASE("local errors by hand") {
  const NetworkModel t = truth_model();
  const ParameterEstimate e = estimate();
  const LocalError e0 = local_error(t, e, 0);
  CHECK(e0.strict == doctest::Approx(std::sqrt(0.04 + 0.09 + 0.16)));
  CHECK(e0.with_spurious == doctest::Approx(std::sqrt(0.04 + 0.09 + 0.16 + 0.0025)));
  CHECK(e0.extended == doctest::Approx(std::sqrt(0.04 + 0.09 + 0.16 + 0.0025 + 0.01)));
  const LocalError e1 = local_error(t, e, 1);
  CHECK(e1.strict == doctest::Approx(0.7));
  CHECK(e1.with_spurious == doctest::Approx(0.7));
  const LocalError e2 = local_error(t, e, 2);
  CHECK(e2.strict == 0.0);
  CHECK(e2.with_spurious == doctest::Approx(0.1));
}

TEST_CASE("aggregate scores") {
  const NetworkModel t = truth_model();
  const ParameterEstimate e = estimate();
  const std::vector<std::vector<int>> nb = {{1, 2}, {}, {}};
  const ScoreReport r = score_run(t, nb, e);
  const std::vector<double> eps = {std::sqrt(0.2925), 0.7, 0.1};
  double ss = 0.0, mean = 0.0;
  for (double x : eps) {
    ss += x * x;
    mean += x / 3.0;
  }
  double var = 0.0;
  for (double x : eps) var += (x - mean) * (x - mean) / 3.0;
  CHECK(r.rmse == doctest::Approx(std::sqrt(ss / 3.0)));
  CHECK(r.me == doctest::Approx(0.7));
  CHECK(r.min == doctest::Approx(0.1));
  CHECK(r.std == doctest::Approx(std::sqrt(var)));
  CHECK(r.rmse_strict == doctest::Approx(std::sqrt((0.29 + 0.49) / 3.0)));
  CHECK(r.edges.true_positive == 1);
  CHECK(r.edges.false_positive == 1);
  CHECK(r.edges.false_negative == 1);
  CHECK(r.tpr == doctest::Approx(0.5));
  CHECK(r.fpr == doctest::Approx(0.25));

  MetricOptions strict;
  strict.paper_strict = true;
  const ScoreReport s = score_run(t, nb, e, strict);
  CHECK(s.rmse == doctest::Approx(s.rmse_strict));
  CHECK(s.min == 0.0);

  const std::string row = score_csv_row(r);
  const std::string header = score_csv_header();
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
  CHECK(row.find("nan") != std::string::npos);
  CHECK(score_text(r).find("RMSE") != std::string::npos);
}

TEST_CASE("self loops count as edges only on request") {
  const NetworkModel t = truth_model();
  const ParameterEstimate e = estimate();
  MetricOptions self;
  self.count_self_loops = true;
  // The alpha error of node 0 moves into the edge sum.
  CHECK(local_error(t, e, 0, self).strict == doctest::Approx(std::sqrt(0.01 + 0.04 + 0.09 + 0.16)));
  const ScoreReport r = score_run(t, {{0, 1}, {1, 2}, {2}}, e, self);
  CHECK(r.edges.true_positive == 5);
  CHECK(r.edges.false_positive == 0);
}

TEST_CASE("mismatched estimates raise scoring errors") {
  const NetworkModel t = truth_model();
  ParameterEstimate short_est = estimate();
  short_est.nodes.pop_back();
  CHECK_THROWS_AS(local_error(t, short_est, 0), ScoringError);
  ParameterEstimate wrong_dim = estimate();
  wrong_dim.nodes[1].dim = 2;
  CHECK_THROWS_AS(score_run(t, {{}, {}, {}}, wrong_dim), ScoringError);
  ParameterEstimate wrong_len = estimate();
  wrong_len.nodes[0].terms[0].coef = {1.0, 2.0};
  CHECK_THROWS_AS(local_error(t, wrong_len, 0), ScoringError);
}
