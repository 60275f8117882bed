#include "netkoop/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "netkoop/errors.hpp"

namespace netkoop {

namespace {

std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require_square(const Matrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    throw ArgumentError(std::string(op) + ": matrix must be square, got " + dims(m));
  }
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

double SvdTolerance::resolve(Eigen::Index rows, Eigen::Index cols) const {
  if (rcond) {
    if (!(*rcond >= 0.0 && *rcond < 1.0)) {
      throw ArgumentError("SvdTolerance: rcond must lie in [0, 1)");
    }
    return *rcond;
  }
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

TruncatedSvd truncated_svd(const Matrix& m, const SvdTolerance& tol) {
  if (!m.allFinite()) throw ArgumentError("svd: non-finite entries in " + dims(m) + " matrix");
  const double rcond = tol.resolve(m.rows(), m.cols());
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("svd did not converge for " + dims(m) + " matrix");
  }
  const Vector& sv = svd.singularValues();
  TruncatedSvd out;
  out.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double cutoff = rcond * out.sigma_max;
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cutoff) ++r;
  out.rank = r;
  out.u = svd.matrixU().leftCols(r);
  out.v = svd.matrixV().leftCols(r);
  out.s = sv.head(r);
  out.sigma_min_kept = r > 0 ? sv(r - 1) : 0.0;
  return out;
}

Matrix pinv(const Matrix& m, const SvdTolerance& tol) {
  const TruncatedSvd svd = truncated_svd(m, tol);
  return svd.v * svd.s.cwiseInverse().asDiagonal() * svd.u.transpose();
}

Eigen::Index effective_rank(const Matrix& m, const SvdTolerance& tol) { return truncated_svd(m, tol).rank; }

Matrix logm_principal(const Matrix& m, LogmInfo* info) {
  require_square(m, "logm");
  if (!m.allFinite()) throw ArgumentError("logm: non-finite entries");
  const Eigen::Index n = m.rows();
  LogmInfo local;
  if (n == 0) {
    if (info) *info = local;
    return m;
  }

  Eigen::EigenSolver<Matrix> es(m, true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("logm: eigendecomposition did not converge for " + dims(m) + " matrix");
  }
  const Eigen::VectorXcd eig = es.eigenvalues();
  const double radius = eig.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * std::max(1.0, radius);
  local.spectral_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> z = eig(i);
    const double dist = z.real() <= 0.0 ? std::abs(z.imag()) : std::abs(z);
    local.spectral_margin = std::min(local.spectral_margin, dist);
    if (dist <= tol) {
      std::ostringstream os;
      os.precision(17);
      os << "non-principal spectrum: eigenvalue " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag()
         << "i lies on the closed negative real axis";
      throw NonPrincipalSpectrum(os.str(), z.real(), z.imag());
    }
  }

  const Eigen::MatrixXcd vecs = es.eigenvectors();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(vecs);
  local.eigvec_rcond = lu.rcond();

  Matrix out;
  if (local.eigvec_rcond >= 1e-8) {
    Eigen::VectorXcd logs(n);
    for (Eigen::Index i = 0; i < n; ++i) logs(i) = std::log(eig(i));
    const Eigen::MatrixXcd scaled = vecs * logs.asDiagonal();
    const Eigen::MatrixXcd lc = scaled * lu.inverse();
    out = lc.real();
    const double scale = std::max(1.0, out.cwiseAbs().maxCoeff());
    const double residual = lc.imag().cwiseAbs().maxCoeff();
    if (residual > 1e-8 * scale) {
      std::ostringstream os;
      os << "non-principal spectrum: logarithm keeps an imaginary residue of " << residual;
      throw NonPrincipalSpectrum(os.str(), 0.0, 0.0);
    }
  } else {
    // Ill-conditioned eigenvectors: inverse scaling and squaring on the Schur form.
    local.schur_fallback = true;
    out = m.log();
  }
  if (!out.allFinite()) throw NumericalError("logm: non-finite result for " + dims(m) + " matrix");
  if (info) *info = local;
  return out;
}

Matrix expm(const Matrix& m) {
  require_square(m, "expm");
  if (!m.allFinite()) throw ArgumentError("expm: non-finite entries");
  if (m.rows() == 0) return m;
  Matrix out = m.exp();
  if (!out.allFinite()) {
    throw NumericalError("expm: overflow for " + dims(m) + " matrix with norm " +
                         std::to_string(m.norm()));
  }
  return out;
}

Matrix zoh_integral(const Matrix& a, double t) {
  require_square(a, "zoh_integral");
  const Eigen::Index n = a.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = a * t;
  aug.topRightCorner(n, n) = Matrix::Identity(n, n) * t;
  return expm(aug).topRightCorner(n, n);
}

LassoProblem::LassoProblem(const Matrix& design, bool standardize)
    : design_(design), rows_(design.rows()), standardize_(standardize) {
  if (!design.allFinite()) throw ArgumentError("lasso: design has non-finite entries");
  scale_ = Vector::Ones(design.cols());
  if (standardize_ && rows_ > 0) {
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
      const double rms = design.col(j).norm() / std::sqrt(static_cast<double>(rows_));
      if (rms > 0.0) scale_(j) = rms;
    }
    design_ = design_ * scale_.cwiseInverse().asDiagonal();
  }
  gram_ = design_.transpose() * design_;
}

Vector LassoProblem::correlation(const Vector& target) const {
  if (target.size() != rows_) {
    throw ArgumentError("lasso: target length " + std::to_string(target.size()) +
                        " does not match design rows " + std::to_string(rows_));
  }
  return (design_.transpose() * target).cwiseProduct(scale_);
}

LassoResult LassoProblem::solve(const Vector& target, double penalty, const LassoOptions& opts) const {
  if (target.size() != rows_) {
    throw ArgumentError("lasso: target length " + std::to_string(target.size()) +
                        " does not match design rows " + std::to_string(rows_));
  }
  if (!(penalty >= 0.0)) throw ArgumentError("lasso: penalty must be nonnegative");
  if (opts.max_iter < 1) throw ArgumentError("lasso: max_iter must be positive");

  const Eigen::Index p = gram_.cols();
  const Vector c = design_.transpose() * target;
  const double yy = target.squaredNorm();
  double half = 0.5 * penalty;

  LassoResult res;
  Vector xi = Vector::Zero(p);
  Vector q = Vector::Zero(p);  // gram * xi

  auto update = [&](Eigen::Index j) {
    const double g = gram_(j, j);
    if (g <= 0.0) return 0.0;
    const double z = c(j) - q(j) + g * xi(j);
    const double next = soft_threshold(z, half) / g;
    const double delta = next - xi(j);
    if (delta != 0.0) {
      q.noalias() += delta * gram_.col(j);
      xi(j) = next;
    }
    return std::abs(delta);
  };
  auto record = [&] {
    if (opts.record_objective) {
      res.objective.push_back(yy - 2.0 * c.dot(xi) + xi.dot(q) + penalty * xi.lpNorm<1>());
    }
  };

  std::vector<Eigen::Index> active;

  // Once the support and signs have settled the Lasso solution solves
  // G_AA xi_A = c_A - half * sign(xi_A); accept it only if it keeps the signs
  // and satisfies the optimality bound off the support.
  auto polish = [&]() {
    std::vector<Eigen::Index> sup;
    for (Eigen::Index j = 0; j < p; ++j)
      if (xi(j) != 0.0) sup.push_back(j);
    const auto na = static_cast<Eigen::Index>(sup.size());
    if (na == 0 || na > rows_) return false;
    Matrix g(na, na);
    Vector rhs(na);
    for (Eigen::Index a = 0; a < na; ++a) {
      for (Eigen::Index b = 0; b < na; ++b) g(a, b) = gram_(sup[a], sup[b]);
      rhs(a) = c(sup[a]) - half * (xi(sup[a]) > 0.0 ? 1.0 : -1.0);
    }
    const Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) return false;
    const Vector sol = llt.solve(rhs);
    if (!sol.allFinite()) return false;
    for (Eigen::Index a = 0; a < na; ++a)
      if ((sol(a) > 0.0) != (xi(sup[a]) > 0.0) || sol(a) == 0.0) return false;
    Vector qn = Vector::Zero(p);
    for (Eigen::Index a = 0; a < na; ++a) qn.noalias() += sol(a) * gram_.col(sup[a]);
    Vector trial = Vector::Zero(p);
    for (Eigen::Index a = 0; a < na; ++a) trial(sup[a]) = sol(a);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (trial(j) == 0.0 && std::abs(c(j) - qn(j)) > half * (1.0 + 1e-9)) return false;
    }
    xi = trial;
    q = qn;
    return true;
  };

  // Cyclic full sweeps alternating with sweeps over the current support.
  auto run = [&](double pen, double tol, bool final_stage) {
    half = 0.5 * pen;
    while (res.sweeps < opts.max_iter) {
      double max_delta = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) max_delta = std::max(max_delta, update(j));
      ++res.sweeps;
      if (final_stage) record();
      if (max_delta < tol) return true;
      active.clear();
      for (Eigen::Index j = 0; j < p; ++j)
        if (xi(j) != 0.0) active.push_back(j);
      // Support sweeps work on the active Gram block; the full gram * xi is
      // restored afterwards.
      const auto na = static_cast<Eigen::Index>(active.size());
      Matrix ga(na, na);
      Vector ca(na), xa(na), qa(na);
      for (Eigen::Index a = 0; a < na; ++a) {
        for (Eigen::Index b = 0; b < na; ++b) ga(a, b) = gram_(active[a], active[b]);
        ca(a) = c(active[a]);
        xa(a) = xi(active[a]);
        qa(a) = q(active[a]);
      }
      auto sync = [&] {
        for (Eigen::Index a = 0; a < na; ++a) xi(active[a]) = xa(a);
        q.setZero();
        for (Eigen::Index a = 0; a < na; ++a)
          if (xa(a) != 0.0) q.noalias() += xa(a) * gram_.col(active[a]);
      };
      double loose = 1e-2 * std::max(1e-12, xa.cwiseAbs().maxCoeff());
      bool synced = false;
      while (res.sweeps < opts.max_iter) {
        double inner = 0.0;
        for (Eigen::Index a = 0; a < na; ++a) {
          const double g = ga(a, a);
          if (g <= 0.0) continue;
          const double next = soft_threshold(ca(a) - qa(a) + g * xa(a), half) / g;
          const double delta = next - xa(a);
          if (delta != 0.0) {
            qa.noalias() += delta * ga.col(a);
            xa(a) = next;
            inner = std::max(inner, std::abs(delta));
          }
        }
        ++res.sweeps;
        if (final_stage && opts.record_objective) {
          sync();
          record();
        }
        if (inner < tol) break;
        if (inner < loose && loose > tol) {
          loose *= 0.1;
          sync();
          if (polish()) {
            synced = true;
            break;
          }
        }
      }
      if (!synced) sync();
    }
    return false;
  };

  // Warm starts along a geometric penalty path; only the last stage is held
  // to the requested tolerance.
  const double pen_max = 2.0 * (c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
  if (opts.path_ratio > 0.0 && opts.path_ratio < 1.0 && penalty > 0.0) {
    for (double pen = pen_max * opts.path_ratio; pen > penalty; pen *= opts.path_ratio) {
      run(pen, std::max(opts.tol, 1e-4 * pen / std::max(pen_max, 1e-300)), false);
    }
  }
  res.converged = run(penalty, opts.tol, true);
  res.coef = xi.cwiseQuotient(scale_);
  return res;
}

LassoResult lasso(const Matrix& design, const Vector& target, double penalty, const LassoOptions& opts) {
  if (design.rows() != target.size()) {
    throw ArgumentError("lasso: design has " + std::to_string(design.rows()) + " rows but target has " +
                        std::to_string(target.size()) + " entries");
  }
  return LassoProblem(design, opts.standardize).solve(target, penalty, opts);
}

double lasso_objective(const Matrix& design, const Vector& target, double penalty, const Vector& coef) {
  return (target - design * coef).squaredNorm() + penalty * coef.lpNorm<1>();
}

}  // namespace netkoop
