#include "netkoop/dual_koopman.hpp"

#include <cmath>
#include <limits>

#include "netkoop/errors.hpp"
#include "netkoop/format.hpp"
#include "netkoop/parallel.hpp"

namespace netkoop {

std::string to_string(DualLogMode m) {
  switch (m) {
    case DualLogMode::Auto: return "auto";
    case DualLogMode::Full: return "full";
    case DualLogMode::Compressed: return "compressed";
  }
  return "auto";
}

DualLogMode dual_log_mode_from_string(const std::string& s) {
  if (s == "auto") return DualLogMode::Auto;
  if (s == "full") return DualLogMode::Full;
  if (s == "compressed") return DualLogMode::Compressed;
  throw ValidationError("unknown dual log mode '" + s + "' (expected auto, full or compressed)");
}

Matrix augmented_x(const SnapshotDataset& ds) {
  Matrix a(ds.samples(), ds.x.cols() + ds.u.cols());
  a << ds.x, ds.u;
  return a;
}

Matrix augmented_y(const SnapshotDataset& ds) {
  Matrix a(ds.samples(), ds.y.cols() + ds.u.cols());
  a << ds.y, ds.u;
  return a;
}

TestFunctionSet data_rbf_set(const SnapshotDataset& ds, double gamma, RbfCenters centers) {
  TestFunctionSet set;
  if (centers == RbfCenters::DataXY) {
    Matrix c(2 * ds.samples(), ds.x.cols() + ds.u.cols());
    c << augmented_x(ds), augmented_y(ds);
    set = make_rbf_set(c, gamma);
    set.id = "rbf(gamma=" + format_short(gamma) + ";centers=xy)";
  } else {
    set = make_rbf_set(augmented_x(ds), gamma);
    set.id = "rbf(gamma=" + format_short(gamma) + ";centers=x)";
  }
  return set;
}

DualOperator build_dual_operator(const SnapshotDataset& ds, const TestFunctionSet& tests, const DualOptions& opts) {
  const Eigen::Index k = ds.samples();
  const auto n_test = static_cast<Eigen::Index>(tests.count());
  if (n_test < k) {
    throw ArgumentError("dual operator: " + std::to_string(n_test) + " test functions for " + std::to_string(k) +
                        " samples; at least K are required");
  }
  DualOperator op;
  op.ts = ds.ts;
  op.test_set_id = tests.id;
  auto& diag = op.diag;
  diag.samples = k;
  diag.tests = n_test;

  const Matrix px = tests.eval(augmented_x(ds));
  const Matrix py = tests.eval(augmented_y(ds));
  const TruncatedSvd svd = truncated_svd(px, opts.tol);
  diag.px_rank = svd.rank;
  diag.px_sigma_max = svd.sigma_max;
  diag.px_sigma_min_kept = svd.sigma_min_kept;
  if (svd.rank == 0) throw NumericalError("dual operator: P_x is numerically zero");
  if (tests.degenerate) diag.warnings.push_back("test set is degenerate (gamma = 0)");
  if (svd.rank < k) {
    diag.warnings.push_back("P_x has effective rank " + std::to_string(svd.rank) + " < K = " + std::to_string(k));
  }

  // A_K = P_y V S^-1 U^T
  const Matrix b = py * svd.v * svd.s.cwiseInverse().asDiagonal();
  op.a_k = b * svd.u.transpose();
  if (!opts.compute_generator) return op;

  diag.compressed = opts.log_mode == DualLogMode::Compressed ||
                    (opts.log_mode == DualLogMode::Auto && svd.rank < k);
  const Matrix target = diag.compressed ? Matrix(svd.u.transpose() * b) : op.a_k;
  LogmInfo info;
  Matrix log_a;
  try {
    log_a = logm_principal(target, &info);
  } catch (const NonPrincipalSpectrum& e) {
    throw NonPrincipalSpectrum(std::string("dual operator: ") + e.what() + " (reduce T_s or change the test set)",
                               e.eig_re, e.eig_im);
  }
  diag.spectral_margin = info.spectral_margin;
  const double norm = target.norm();
  diag.log_residual = norm > 0.0 ? (expm(log_a) - target).norm() / norm : 0.0;
  if (info.schur_fallback) diag.warnings.push_back("logarithm used the Schur fallback");
  if (diag.compressed) {
    op.l_k = svd.u * (log_a / ds.ts) * svd.u.transpose();
  } else {
    op.l_k = log_a / ds.ts;
  }
  return op;
}

Matrix estimate_vector_field(const DualOperator& op, const SnapshotDataset& ds) {
  if (op.l_k.size() == 0) throw ArgumentError("estimate_vector_field: operator was built without a generator");
  if (op.l_k.rows() != ds.samples()) throw ArgumentError("estimate_vector_field: operator and dataset sizes differ");
  return op.l_k * ds.x;
}

double koopman_error(const DualOperator& op, const SnapshotDataset& ds) {
  if (op.a_k.rows() != ds.samples()) throw ArgumentError("koopman_error: operator and dataset sizes differ");
  return (ds.y - op.a_k * ds.x).norm();
}

double vector_field_error(const DualOperator& op, const SnapshotDataset& ds, const Matrix& xdot) {
  if (xdot.rows() != ds.samples() || xdot.cols() != ds.x.cols()) {
    throw ArgumentError("vector_field_error: derivative matrix has the wrong shape");
  }
  return (xdot - estimate_vector_field(op, ds)).norm();
}

TestSetSelection select_test_set(const SnapshotDataset& ds, const std::vector<TestFunctionSet>& candidates,
                                 const DualOptions& opts) {
  if (candidates.empty()) throw ArgumentError("select_test_set: no candidates");
  TestSetSelection sel;
  sel.scores.assign(candidates.size(), std::numeric_limits<double>::infinity());
  sel.failures.assign(candidates.size(), std::string());
  DualOptions o = opts;
  o.compute_generator = false;
  parallel_for(candidates.size(), [&](std::size_t i) {
    try {
      const double s = koopman_error(build_dual_operator(ds, candidates[i], o), ds);
      if (std::isfinite(s)) {
        sel.scores[i] = s;
      } else {
        sel.failures[i] = "non-finite score";
      }
    } catch (const Error& e) {
      sel.failures[i] = e.what();
    }
  });
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (sel.scores[i] < sel.scores[sel.best]) sel.best = i;
  }
  return sel;
}

}  // namespace netkoop
