#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "netkoop/dataset.hpp"
#include "netkoop/dictionary.hpp"
#include "netkoop/numerics.hpp"

namespace netkoop {

/// How log(A_K) is taken.
///   Full:       principal log of the K x K matrix (fails when A_K is singular).
///   Compressed: log of A_K restricted to the numerical range of P_x,
///               L_K = U log(U^T A_K U) U^T / T_s. Identical to Full when P_x
///               has rank K.
///   Auto:       Full when rank(P_x) == K, Compressed otherwise.
enum class DualLogMode { Auto, Full, Compressed };

std::string to_string(DualLogMode m);
DualLogMode dual_log_mode_from_string(const std::string& s);

struct DualOptions {
  SvdTolerance tol;
  DualLogMode log_mode = DualLogMode::Auto;
  bool compute_generator = true;  // false skips the logarithm (scoring by ||e|| only)
};

struct DualDiagnostics {
  Eigen::Index samples = 0;
  Eigen::Index tests = 0;
  Eigen::Index px_rank = 0;
  double px_sigma_max = 0.0;
  double px_sigma_min_kept = 0.0;
  bool compressed = false;
  double spectral_margin = 0.0;  // of the matrix whose log was taken
  double log_residual = 0.0;     // ||expm(T_s L) - A|| / ||A|| on that matrix
  std::vector<std::string> warnings;
};

struct DualOperator {
  Matrix a_k;  // K x K
  Matrix l_k;  // K x K, empty when the generator was not requested
  double ts = 0.0;
  std::string test_set_id;
  DualDiagnostics diag;
};

/// Rows [x_k, u_k] and [y_k, u_k].
Matrix augmented_x(const SnapshotDataset& ds);
Matrix augmented_y(const SnapshotDataset& ds);

enum class RbfCenters { DataXY, DataX };

/// Gaussian RBFs centered at the augmented samples: 2K centers {x̄_k} U {ȳ_k}
/// (DataXY) or K centers {x̄_k} (DataX).
TestFunctionSet data_rbf_set(const SnapshotDataset& ds, double gamma, RbfCenters centers = RbfCenters::DataXY);

/// A_K = P_y pinv(P_x) and L_K = log(A_K) / T_s.
DualOperator build_dual_operator(const SnapshotDataset& ds, const TestFunctionSet& tests, const DualOptions& opts = {});

/// F_hat = L_K X, one row per sample.
Matrix estimate_vector_field(const DualOperator& op, const SnapshotDataset& ds);

/// ||Y - A_K X||_F
double koopman_error(const DualOperator& op, const SnapshotDataset& ds);
/// ||Xdot - L_K X||_F for a known vector field.
double vector_field_error(const DualOperator& op, const SnapshotDataset& ds, const Matrix& xdot);

struct TestSetSelection {
  std::size_t best = 0;
  std::vector<double> scores;  // ||e_i||_F, +inf when the candidate failed
  std::vector<std::string> failures;  // empty string when the candidate built
};

/// Picks the candidate with the smallest ||e_i||_F; ties go to the lower index.
TestSetSelection select_test_set(const SnapshotDataset& ds, const std::vector<TestFunctionSet>& candidates,
                                 const DualOptions& opts = {});

}  // namespace netkoop
