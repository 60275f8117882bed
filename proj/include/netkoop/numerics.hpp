#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace netkoop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative singular-value cutoff. An empty rcond selects max(rows, cols) * eps.
struct SvdTolerance {
  std::optional<double> rcond;

  double resolve(Eigen::Index rows, Eigen::Index cols) const;
};

/// Thin SVD with the trailing (sub-tolerance) singular triplets dropped.
struct TruncatedSvd {
  Matrix u;  // rows x rank
  Vector s;  // rank, descending
  Matrix v;  // cols x rank
  Eigen::Index rank = 0;
  double sigma_max = 0.0;
  double sigma_min_kept = 0.0;
};

TruncatedSvd truncated_svd(const Matrix& m, const SvdTolerance& tol = {});

/// Moore-Penrose pseudoinverse by SVD.
Matrix pinv(const Matrix& m, const SvdTolerance& tol = {});

Eigen::Index effective_rank(const Matrix& m, const SvdTolerance& tol = {});

struct LogmInfo {
  double spectral_margin = 0.0;      // distance of the spectrum to (-inf, 0]
  double eigvec_rcond = 0.0;         // reciprocal condition estimate of the eigenvector matrix
  bool schur_fallback = false;       // true when the Schur-based path was used
};

/// Principal real matrix logarithm. Throws NonPrincipalSpectrum when an
/// eigenvalue lies on (or within 1e-12 of) the closed negative real axis.
Matrix logm_principal(const Matrix& m, LogmInfo* info = nullptr);

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
Matrix expm(const Matrix& m);

/// Integral of exp(a * tau) for tau in [0, t], computed from the exponential of
/// the augmented block matrix [[a, I], [0, 0]] * t. Well defined for singular a.
Matrix zoh_integral(const Matrix& a, double t);

struct LassoOptions {
  int max_iter = 10000;   // coordinate-descent sweeps
  double tol = 1e-8;      // max absolute coefficient change per sweep
  bool standardize = false;
  bool record_objective = false;
  double path_ratio = 0.5;  // warm-start penalty path; 0 disables
};

struct LassoResult {
  Vector coef;
  bool converged = false;
  int sweeps = 0;
  std::vector<double> objective;  // per full sweep, when requested
};

/// Cyclic coordinate descent for  ||target - design * xi||^2 + penalty * ||xi||_1
/// (no intercept, no 1/2 factor). The Gram matrix is built once so that many
/// targets can share one design.
class LassoProblem {
 public:
  explicit LassoProblem(const Matrix& design, bool standardize = false);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return gram_.cols(); }

  /// design^T * target in the original (unscaled) column units.
  Vector correlation(const Vector& target) const;

  LassoResult solve(const Vector& target, double penalty, const LassoOptions& opts = {}) const;

 private:
  Matrix design_;  // scaled copy
  Eigen::Index rows_;
  bool standardize_;
  Vector scale_;  // column scale factors (1 when not standardizing)
  Matrix gram_;   // scaled design^T design
};

LassoResult lasso(const Matrix& design, const Vector& target, double penalty,
                  const LassoOptions& opts = {});

double lasso_objective(const Matrix& design, const Vector& target, double penalty, const Vector& coef);

bool all_finite(const Matrix& m);

}  // namespace netkoop
