#include <cmath>
#include <random>

#include "doctest.h"
#include "netkoop/errors.hpp"
#include "netkoop/numerics.hpp"

using namespace netkoop;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = d(gen);
  return m;
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

double soft(double z, double t) { return z > t ? z - t : (z < -t ? z + t : 0.0); }

}  // namespace

TEST_CASE("pseudoinverse satisfies the Penrose conditions") {
  const std::vector<std::pair<int, int>> shapes = {{5, 3}, {3, 5}, {20, 20}, {50, 50}, {50, 17}, {8, 40}};
  unsigned seed = 1;
  for (auto [r, c] : shapes) {
    const Matrix a = random_matrix(r, c, seed++);
    const Matrix p = pinv(a);
    CHECK(rel(a * p * a, a) < 1e-8);
    CHECK(rel(p * a * p, p) < 1e-8);
    CHECK(rel((a * p).transpose(), a * p) < 1e-8);
    CHECK(rel((p * a).transpose(), p * a) < 1e-8);
  }
}

TEST_CASE("pseudoinverse of a rank-deficient matrix") {
  const Matrix a = random_matrix(30, 4, 7) * random_matrix(4, 25, 8);
  CHECK(effective_rank(a) == 4);
  const Matrix p = pinv(a);
  CHECK(rel(a * p * a, a) < 1e-8);
  CHECK(rel(p * a * p, p) < 1e-8);
  // Agrees with the complete orthogonal decomposition.
  const Matrix q = a.completeOrthogonalDecomposition().pseudoInverse();
  CHECK(rel(p, q) < 1e-8);
}

TEST_CASE("truncated svd drops sub-tolerance triplets") {
  Matrix a = Matrix::Zero(4, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1e-20;
  const TruncatedSvd s = truncated_svd(a);
  CHECK(s.rank == 1);
  CHECK(s.sigma_max == doctest::Approx(1.0));
  SvdTolerance loose;
  loose.rcond = 0.5;
  Matrix b = Matrix::Identity(3, 3);
  b(2, 2) = 0.4;
  CHECK(effective_rank(b, loose) == 2);
}

TEST_CASE("matrix exponential closed forms") {
  const double th = 0.7;
  Matrix r(2, 2);
  r << 0.0, -th, th, 0.0;
  Matrix e(2, 2);
  e << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  CHECK(rel(expm(r), e) < 1e-13);

  Matrix j(2, 2);
  j << 0.3, 1.0, 0.0, 0.3;
  Matrix ej(2, 2);
  ej << std::exp(0.3), std::exp(0.3), 0.0, std::exp(0.3);
  CHECK(rel(expm(j), ej) < 1e-13);

  // Large-norm symmetric input against its eigendecomposition.
  const Matrix g = random_matrix(6, 6, 3);
  const Matrix sym = 5.0 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Matrix ref = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                     es.eigenvectors().transpose();
  CHECK(rel(expm(sym), ref) / ref.norm() < 1e-12);
}

TEST_CASE("logm inverts expm on principal matrices") {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    Matrix a = random_matrix(8, 8, seed);
    // Keep the spectrum inside the strip |Im| < pi so log(exp(a)) == a.
    Eigen::EigenSolver<Matrix> es(a);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    a *= 2.0 / rho;
    const Matrix l = logm_principal(expm(a));
    CHECK(rel(l, a) < 1e-9);
  }
}

TEST_CASE("logm of a defective matrix uses the Jordan form") {
  const double lam = 1.7;
  Matrix m(2, 2);
  m << lam, 1.0, 0.0, lam;
  Matrix expect(2, 2);
  expect << std::log(lam), 1.0 / lam, 0.0, std::log(lam);
  LogmInfo info;
  const Matrix l = logm_principal(m, &info);
  CHECK(rel(l, expect) < 1e-9);
}

TEST_CASE("logm rejects a negative real eigenvalue") {
  Matrix m = Matrix::Identity(3, 3);
  m(1, 1) = -0.5;
  CHECK_THROWS_AS(logm_principal(m), NonPrincipalSpectrum);
  CHECK_THROWS_AS(logm_principal(Matrix::Zero(2, 2)), NumericalError);
}

TEST_CASE("zoh integral") {
  const double t = 0.3;
  CHECK(rel(zoh_integral(Matrix::Zero(3, 3), t), t * Matrix::Identity(3, 3)) < 1e-14);
  Matrix a = random_matrix(4, 4, 5);
  a -= 3.0 * Matrix::Identity(4, 4);
  const Matrix expect = a.inverse() * (expm(a * t) - Matrix::Identity(4, 4));
  CHECK(rel(zoh_integral(a, t), expect) < 1e-12);
}

TEST_CASE("lasso matches soft thresholding on orthonormal designs") {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const Matrix q = random_matrix(40, 12, seed).householderQr().householderQ() * Matrix::Identity(40, 12);
    const Vector y = random_matrix(40, 1, seed + 100).col(0);
    const Vector c = q.transpose() * y;
    for (double pen : {0.0, 0.1, 0.5, 1.5, 10.0}) {
      const LassoResult r = lasso(q, y, pen);
      CHECK(r.converged);
      for (Eigen::Index j = 0; j < c.size(); ++j) CHECK(std::abs(r.coef(j) - soft(c(j), pen / 2.0)) < 1e-8);
    }
  }
}

TEST_CASE("lasso solutions satisfy the optimality conditions") {
  for (unsigned seed = 1; seed <= 8; ++seed) {
    const Matrix h = random_matrix(30, 60, seed);
    const Vector y = random_matrix(30, 1, seed + 50).col(0);
    const double pen = 0.05 * (2.0 * (h.transpose() * y).cwiseAbs().maxCoeff());
    const LassoResult r = lasso(h, y, pen);
    REQUIRE(r.converged);
    const Vector g = 2.0 * h.transpose() * (y - h * r.coef);
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      if (r.coef(j) != 0.0) {
        CHECK(std::abs(g(j) - pen * (r.coef(j) > 0 ? 1.0 : -1.0)) < 1e-5 * pen);
      } else {
        CHECK(std::abs(g(j)) <= pen * (1.0 + 1e-5));
      }
    }
  }
}

TEST_CASE("lasso edge cases") {
  const Matrix h = random_matrix(20, 5, 11);
  const Vector y = random_matrix(20, 1, 12).col(0);
  SUBCASE("zero penalty on a tall design is least squares") {
    const Vector ls = h.colPivHouseholderQr().solve(y);
    CHECK((lasso(h, y, 0.0).coef - ls).norm() < 1e-7);
  }
  SUBCASE("penalty above 2 max|H^T y| gives zero") {
    const double pmax = 2.0 * (h.transpose() * y).cwiseAbs().maxCoeff();
    CHECK(lasso(h, y, pmax * 1.0001).coef.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("objective never increases along the sweeps") {
    LassoOptions o;
    o.record_objective = true;
    o.path_ratio = 0.0;
    const LassoResult r = lasso(h, y, 0.3, o);
    REQUIRE(r.objective.size() >= 2);
    for (std::size_t i = 1; i < r.objective.size(); ++i) CHECK(r.objective[i] <= r.objective[i - 1] + 1e-12);
    CHECK(r.objective.back() == doctest::Approx(lasso_objective(h, y, 0.3, r.coef)).epsilon(1e-10));
  }
  SUBCASE("warm-start path does not change the solution") {
    LassoOptions cold;
    cold.path_ratio = 0.0;
    CHECK((lasso(h, y, 0.2).coef - lasso(h, y, 0.2, cold).coef).norm() < 1e-7);
  }
  SUBCASE("standardized fit is invariant to column scaling") {
    LassoOptions o;
    o.standardize = true;
    Matrix hs = h;
    hs.col(2) *= 1000.0;
    const Vector a = h * lasso(h, y, 0.5, o).coef;
    const Vector b = hs * lasso(hs, y, 0.5, o).coef;
    CHECK((a - b).norm() < 1e-7);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(lasso(h, Vector::Zero(3), 0.1), ArgumentError);
    CHECK_THROWS_AS(lasso(h, y, -1.0), ArgumentError);
  }
}
