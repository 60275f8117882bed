#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netkoop/dataset.hpp"
#include "netkoop/dictionary.hpp"
#include "netkoop/models.hpp"
#include "netkoop/numerics.hpp"

namespace netkoop {

/// Column range of one node or input block in H_{X,U}.
struct DesignBlock {
  BlockKind kind = BlockKind::Node;
  int index = 0;
  Eigen::Index col = 0;
  Eigen::Index width = 0;
};

struct DesignMatrix {
  Matrix h;  // K x sum of block widths
  std::vector<DesignBlock> blocks;  // nodes first, then inputs, ascending
  std::vector<std::string> column_names;  // "x3:(x[0]^2)-0.33" style, for reports
};

/// Row k = [phi_1(x_1k) ... phi_N(x_Nk), psi_1(u_1k) ... psi_M(u_Mk)].
DesignMatrix build_design_matrix(const SnapshotDataset& ds, const NodeFunctionSet& nodes);

/// Lasso penalty per regression: relative -> value * ||H^T f||_inf, else value.
struct PenaltyRule {
  bool relative = true;
  double value = 0.01;

  double resolve(double correlation_inf) const;
};

struct WeightOptions {
  PenaltyRule penalty;
  LassoOptions lasso;
};

struct WeightEstimate {
  Matrix lambda;  // N x N
  Matrix delta;   // N x M
  std::vector<Matrix> coef;  // per node i: design columns x n_i
  std::vector<double> penalties;  // per (i, j) in node-major order
  std::vector<std::string> warnings;
};

/// One Lasso per node component (i, j) against the vector-field estimate.
WeightEstimate estimate_weights(const Matrix& f_hat, const std::vector<int>& node_dims, int num_inputs,
                                const DesignMatrix& design, const WeightOptions& opts = {});

struct TopologyEstimate {
  Matrix lambda;
  Matrix delta;
  double threshold = 0.0;
  double input_threshold = 0.0;
  std::vector<std::vector<int>> neighbors;  // ascending; may contain i itself
  std::vector<std::vector<int>> inputs;
};

/// N_i = {k : Lambda_ik >= threshold}, M_i = {k : Delta_ik >= input threshold}.
TopologyEstimate threshold_topology(const Matrix& lambda, const Matrix& delta, double threshold,
                                    std::optional<double> input_threshold = std::nullopt);

struct EdgeCounts {
  int true_positive = 0;
  int false_positive = 0;
  int false_negative = 0;
  int true_negative = 0;
  int true_edges() const { return true_positive + false_negative; }
  int non_edges() const { return false_positive + true_negative; }
  double tpr() const;  // NaN when there are no true edges
  double fpr() const;  // NaN when there are no non-edges
};

/// Boolean adjacency truth(i, k) = 1 when k is a neighbor of i.
Eigen::MatrixXi truth_adjacency(const NetworkModel& truth, bool count_self_loops = false);

EdgeCounts count_edges(const std::vector<std::vector<int>>& estimated, const NetworkModel& truth,
                       bool count_self_loops = false);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by (fpr, tpr), endpoints included
  double auroc = 0.0;
  int true_edges = 0;
  int non_edges = 0;
  bool defined = true;  // false when either class is empty; auroc is NaN then
};

/// ROC over the given thresholds, (0,0) and (1,1) appended, trapezoidal area.
RocCurve roc_sweep(const Matrix& lambda, const NetworkModel& truth, const std::vector<double>& thresholds,
                   bool count_self_loops = false);

/// ROC using every distinct scored weight as a threshold; the area then
/// equals the probability that a true edge outranks a non-edge (ties half).
RocCurve roc_exact(const Matrix& lambda, const NetworkModel& truth, bool count_self_loops = false);

}  // namespace netkoop
