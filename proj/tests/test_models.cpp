#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "netkoop/errors.hpp"
#include "netkoop/models.hpp"
#include "netkoop/random.hpp"

using namespace netkoop;

namespace {

Vector random_vector(Eigen::Index n, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(gen);
  return v;
}

const Term* find_term(const NodeModel& nd, BlockRef src, const std::string& fn) {
  for (const auto& t : nd.terms)
    if (t.source == src && t.fn.text() == fn) return &t;
  return nullptr;
}

bool in_set(double v, std::initializer_list<double> set) {
  for (double s : set)
    if (std::abs(v - s) < 1e-12) return true;
  return false;
}

}  // namespace

TEST_CASE("random streams are keyed and reproducible") {
  RandomStream a(7, "alpha", 3), b(7, "alpha", 3), c(7, "alpha", 4), d(7, "beta", 3);
  const auto va = a.next_u64();
  CHECK(va == b.next_u64());
  CHECK(va != c.next_u64());
  CHECK(va != d.next_u64());
  RandomStream u(11, "moments");
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = u.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  RandomStream r(3, "ints");
  std::set<int> seen;
  for (int i = 0; i < 1000; ++i) {
    const int k = r.uniform_int(-2, 2);
    CHECK(k >= -2);
    CHECK(k <= 2);
    seen.insert(k);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("Erdos-Renyi polynomial networks") {
  const int n = 120;
  const double p = 0.1;
  const PolyNetworkOptions opts;
  const NetworkModel m = gen_erdos_renyi_poly(n, p, 42, opts);
  CHECK(m.to_json() == gen_erdos_renyi_poly(n, p, 42, opts).to_json());
  CHECK(m.hash() != gen_erdos_renyi_poly(n, p, 43, opts).hash());

  int edges = 0, input_links = 0;
  for (int i = 0; i < n; ++i) {
    for (const auto& t : m.nodes[static_cast<std::size_t>(i)].terms) {
      REQUIRE(t.coef.size() == 1);
      const double c = std::abs(t.coef[0]);
      CHECK(c >= opts.coef_lo);
      CHECK(c <= opts.coef_hi);
      if (t.source.kind == BlockKind::Node) {
        ++edges;
        CHECK(t.fn.degree() >= 1);
        CHECK(t.fn.degree() <= 3);
      } else {
        ++input_links;
        CHECK(t.fn.degree() >= 1);
        CHECK(t.fn.degree() <= 2);
      }
    }
  }
  // Binomial counts within five standard deviations.
  const double mean = p * n * n, sd = std::sqrt(n * n * p * (1 - p));
  CHECK(std::abs(edges - mean) < 5 * sd);
  const double imean = p * n * opts.inputs, isd = std::sqrt(n * opts.inputs * p * (1 - p));
  CHECK(std::abs(input_links - imean) < 5 * isd);
  CHECK(m.edge_count(true) == edges);

  CHECK(gen_erdos_renyi_poly(10, 0.0, 1).edge_count(true) == 0);
  CHECK(gen_erdos_renyi_poly(10, 1.0, 1).edge_count(true) == 100);
  CHECK_THROWS_AS(gen_erdos_renyi_poly(10, 1.5, 1), ArgumentError);
}

TEST_CASE("nonpolynomial network matches the four-branch definition") {
  for (int n : {8, 20, 100}) {
    const NetworkModel m = gen_nonpoly_network(n, 5);
    // 1-based label arithmetic with (a mod n) == 0 read as n.
    auto idx = [n](long long a) {
      long long r = a % n;
      if (r == 0) r = n;
      return static_cast<int>(r - 1);
    };
    const Vector x = random_vector(n, 9);
    const Vector u = random_vector(4, 10);
    const Vector f = eval_vector_field(m, x, u);
    for (int i = 1; i <= n; ++i) {
      RandomStream rng(5, "nonpoly_extra", static_cast<std::uint64_t>(i - 1));
      const int t = rng.uniform_int(1, n) - 1;
      auto X = [&](int k) { return x(k); };
      const double xi = X(i - 1);
      double expect = 0.0;
      switch ((i - 1) % 4) {
        case 0:
          expect = -0.5 * xi * xi - 0.5 * X(idx(47LL * i)) + 0.7 * X(idx(i + 1)) - 0.5 * std::sin(X(t)) + 1.4 * u(0);
          break;
        case 1:
          expect = -0.5 * xi + 0.7 * std::pow(X(idx(i - 1)), 2) + 0.7 * std::pow(X(idx(23LL * i)), 3) +
                   0.7 * std::exp(X(t)) + 1.4 * u(3) * u(3);
          break;
        case 2:
          expect = -0.5 * xi + 0.7 * std::pow(X(idx(i + 1)), 2) - 0.5 * X(idx(67LL * i)) + 0.5 * std::exp(X(t)) +
                   1.4 * u(1) * u(1);
          break;
        default:
          expect = -0.5 * xi * xi - 0.5 * std::pow(X(idx(i - 1)), 2) + 0.7 * std::pow(X(idx(11LL * i)), 3) -
                   0.5 * std::sin(X(t)) + 1.4 * u(2) * u(2);
      }
      CHECK(f(i - 1) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(gen_nonpoly_network(10, 1), ArgumentError);
}

TEST_CASE("Watts-Strogatz graphs") {
  GraphSpec g;
  g.kind = GraphKind::WattsStrogatz;
  g.mean_degree = 4;
  g.directed = false;
  g.seed = 3;
  SUBCASE("no rewiring gives the ring lattice") {
    const auto edges = generate_graph(g, 12);
    CHECK(edges.size() == 48);
    for (const auto& e : edges) {
      const int d = std::abs(e.source - e.target);
      CHECK(std::min(d, 12 - d) <= 2);
      CHECK(e.source != e.target);
    }
  }
  SUBCASE("rewiring keeps the edge count and symmetry") {
    g.rewire_prob = 0.5;
    const auto edges = generate_graph(g, 75);
    CHECK(edges.size() == 75 * 4);
    std::set<std::pair<int, int>> s;
    for (const auto& e : edges) {
      CHECK(e.source != e.target);
      s.insert({e.source, e.target});
    }
    CHECK(s.size() == edges.size());
    for (const auto& e : edges) CHECK(s.count({e.target, e.source}) == 1);
  }
}

TEST_CASE("Hindmarsh-Rose network structure and vector field") {
  const int n = 20;
  const HindmarshRoseOptions o;
  const NetworkModel m = gen_hindmarsh_rose(n, 4, 0.5, 8, o);
  CHECK(m.state_dim() == 3 * n);
  CHECK(m.num_inputs() == 0);
  const Vector x = random_vector(3 * n, 4);
  const Vector f = eval_vector_field(m, x, Vector());
  int edges = 0;
  for (int i = 0; i < n; ++i) {
    const auto& nd = m.nodes[static_cast<std::size_t>(i)];
    const BlockRef self{BlockKind::Node, i};
    const Term* cube = find_term(nd, self, "x[0]^3");
    const Term* square = find_term(nd, self, "x[0]^2");
    const Term* lin = find_term(nd, self, "x[0]");
    const Term* one = find_term(nd, self, "1");
    REQUIRE(cube);
    REQUIRE(square);
    REQUIRE(lin);
    REQUIRE(one);
    const double a = cube->coef[0], b = -square->coef[0], d = -square->coef[1];
    const double s = lin->coef[2] * o.tau, e = -one->coef[2] * o.tau / s;
    CHECK(in_set(a, {1, 1.25, 1.5, 1.75, 2}));
    CHECK(in_set(b, {2, 2.75, 3.5, 4.25, 5}));
    CHECK(in_set(d, {-3, -3.5, -4, -4.5, -5}));
    CHECK(in_set(s, {8, 11, 14, 17, 20}));
    CHECK(in_set(e, {-4, -2, 0, 2, 4}));

    double coupling = 0.0;
    for (int k : m.neighbors(i)) {
      ++edges;
      const Term& t = *std::find_if(nd.terms.begin(), nd.terms.end(),
                                    [&](const Term& tt) { return tt.source.index == k && tt.source.kind == BlockKind::Node; });
      REQUIRE(t.fn.kind() == FunctionKind::Sigmoid);
      const double xk = x(3 * k);
      bool matched = false;
      for (double th : {-0.5, -1.0, -1.5}) {
        if (t.fn.text() == ScalarFunction::sigmoid(1.0, th).text()) {
          coupling += 4.0 / (1.0 + std::exp(-(xk - th)));
          matched = true;
        }
      }
      CHECK(matched);
      const auto back = m.neighbors(k);
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
    const double xi = x(3 * i), yi = x(3 * i + 1), zi = x(3 * i + 2);
    CHECK(f(3 * i) == doctest::Approx(yi - b * xi * xi + a * xi * xi * xi - zi + coupling).epsilon(1e-13));
    CHECK(f(3 * i + 1) == doctest::Approx(o.c - d * xi * xi - yi).epsilon(1e-13));
    CHECK(f(3 * i + 2) == doctest::Approx((s * (xi - e) - zi) / o.tau).epsilon(1e-13));
  }
  CHECK(edges == n * 4);
}

TEST_CASE("model serialization") {
  const NetworkModel m = gen_hindmarsh_rose(12, 4, 0.3, 2);
  const NetworkModel r = NetworkModel::from_json(m.to_json());
  CHECK(r.to_json() == m.to_json());
  CHECK(r.hash() == m.hash());
  CHECK(m.hash().size() == 16);
  const Vector x = random_vector(36, 1);
  CHECK((eval_vector_field(r, x, Vector()) - eval_vector_field(m, x, Vector())).norm() == 0.0);
  CHECK_THROWS(NetworkModel::from_json("{\"family\": 3}"));
  CHECK_THROWS(NetworkModel::from_json("not json"));
}

TEST_CASE("model validation and neighbor queries") {
  NetworkModel m;
  m.node_dims = {1, 1, 1};
  m.input_dims = {1};
  m.nodes.assign(3, NodeModel{1, {}});
  m.add_term(0, {BlockKind::Node, 0}, ScalarFunction::coordinate(0), {-1.0});
  m.add_term(0, {BlockKind::Node, 2}, ScalarFunction::monomial(2), {0.5});
  m.add_term(0, {BlockKind::Node, 2}, ScalarFunction::monomial(2), {0.25});
  m.add_term(1, {BlockKind::Input, 0}, ScalarFunction::coordinate(0), {2.0});
  m.validate();
  CHECK(m.nodes[0].terms.size() == 2);
  CHECK(m.nodes[0].terms[1].coef[0] == 0.75);
  CHECK(m.neighbors(0) == std::vector<int>{2});
  CHECK(m.neighbors(0, true) == std::vector<int>{0, 2});
  CHECK(m.inputs_of(1) == std::vector<int>{0});
  CHECK(m.edge_count() == 1);
  CHECK(m.edge_count(true) == 2);
  Vector x(3);
  x << 0.5, 1.0, -2.0;
  Vector u(1);
  u << 3.0;
  const Vector f = eval_vector_field(m, x, u);
  CHECK(f(0) == doctest::Approx(-0.5 + 0.75 * 4.0));
  CHECK(f(1) == doctest::Approx(6.0));
  CHECK(f(2) == 0.0);
  CHECK_THROWS_AS(eval_vector_field(m, Vector::Zero(2), u), ArgumentError);
  m.add_term(2, {BlockKind::Node, 5}, ScalarFunction::coordinate(0), {1.0});
  CHECK_THROWS_AS(m.validate(), ValidationError);
}
