#include "netkoop/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netkoop/errors.hpp"
#include "netkoop/format.hpp"
#include "netkoop/parallel.hpp"

namespace netkoop {

DesignMatrix build_design_matrix(const SnapshotDataset& ds, const NodeFunctionSet& nodes) {
  if (nodes.node_functions.size() != ds.node_dims.size()) {
    throw ArgumentError("design matrix: node function lists cover " + std::to_string(nodes.node_functions.size()) +
                        " nodes, dataset has " + std::to_string(ds.node_dims.size()));
  }
  if (nodes.input_functions.size() != ds.input_dims.size()) {
    throw ArgumentError("design matrix: input function lists cover " + std::to_string(nodes.input_functions.size()) +
                        " inputs, dataset has " + std::to_string(ds.input_dims.size()));
  }
  DesignMatrix out;
  Eigen::Index width = 0;
  for (std::size_t k = 0; k < nodes.node_functions.size(); ++k) {
    const auto w = static_cast<Eigen::Index>(nodes.node_functions[k].size());
    out.blocks.push_back({BlockKind::Node, static_cast<int>(k), width, w});
    width += w;
  }
  for (std::size_t k = 0; k < nodes.input_functions.size(); ++k) {
    const auto w = static_cast<Eigen::Index>(nodes.input_functions[k].size());
    out.blocks.push_back({BlockKind::Input, static_cast<int>(k), width, w});
    width += w;
  }
  out.h.resize(ds.samples(), width);
  out.column_names.resize(static_cast<std::size_t>(width));
  parallel_for(out.blocks.size(), [&](std::size_t b) {
    const auto& blk = out.blocks[b];
    const bool node = blk.kind == BlockKind::Node;
    const auto& funcs = node ? nodes.node_functions[static_cast<std::size_t>(blk.index)]
                             : nodes.input_functions[static_cast<std::size_t>(blk.index)];
    const std::string label = (node ? "x" : "u") + std::to_string(blk.index) + ":";
    try {
      if (blk.width > 0) {
        out.h.middleCols(blk.col, blk.width) =
            node ? eval_block(funcs, ds.x, ds.node_offset(blk.index), ds.node_dims[static_cast<std::size_t>(blk.index)])
                 : eval_block(funcs, ds.u, ds.input_offset(blk.index), ds.input_dims[static_cast<std::size_t>(blk.index)]);
      }
    } catch (const ArgumentError& e) {
      throw ArgumentError("design matrix: block " + label + " " + e.what());
    }
    for (Eigen::Index c = 0; c < blk.width; ++c) {
      out.column_names[static_cast<std::size_t>(blk.col + c)] = label + funcs[static_cast<std::size_t>(c)].text();
    }
  });
  return out;
}

double PenaltyRule::resolve(double correlation_inf) const {
  if (!(value >= 0.0)) throw ArgumentError("lasso penalty must be nonnegative");
  return relative ? value * correlation_inf : value;
}

WeightEstimate estimate_weights(const Matrix& f_hat, const std::vector<int>& node_dims, int num_inputs,
                                const DesignMatrix& design, const WeightOptions& opts) {
  const int n_nodes = static_cast<int>(node_dims.size());
  int n = 0;
  for (int d : node_dims) n += d;
  if (f_hat.cols() != n) throw ArgumentError("estimate_weights: F_hat width differs from the state dimension");
  if (f_hat.rows() != design.h.rows()) throw ArgumentError("estimate_weights: F_hat and H have different row counts");

  WeightEstimate est;
  est.lambda = Matrix::Zero(n_nodes, n_nodes);
  est.delta = Matrix::Zero(n_nodes, num_inputs);
  est.penalties.assign(static_cast<std::size_t>(n), 0.0);
  const auto p = design.h.cols();
  Matrix coefs(p, n);
  std::vector<char> converged(static_cast<std::size_t>(n), 1);

  const LassoProblem problem(design.h, opts.lasso.standardize);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t c) {
    const Vector target = f_hat.col(static_cast<Eigen::Index>(c));
    const double corr = problem.correlation(target).cwiseAbs().maxCoeff();
    const double penalty = opts.penalty.resolve(p > 0 ? corr : 0.0);
    est.penalties[c] = penalty;
    const LassoResult r = problem.solve(target, penalty, opts.lasso);
    coefs.col(static_cast<Eigen::Index>(c)) = r.coef;
    converged[c] = r.converged ? 1 : 0;
  });

  int off = 0;
  for (int i = 0; i < n_nodes; ++i) {
    const int ni = node_dims[static_cast<std::size_t>(i)];
    for (int j = 0; j < ni; ++j) {
      if (!converged[static_cast<std::size_t>(off + j)]) {
        est.warnings.push_back("lasso for node " + std::to_string(i) + " component " + std::to_string(j) +
                               " did not converge");
      }
    }
    const Matrix ci = coefs.middleCols(off, ni);
    for (const auto& blk : design.blocks) {
      const double w = ci.middleRows(blk.col, blk.width).cwiseAbs().sum();
      if (blk.kind == BlockKind::Node) {
        est.lambda(i, blk.index) = w;
      } else {
        est.delta(i, blk.index) = w;
      }
    }
    est.coef.push_back(ci);
    off += ni;
  }
  return est;
}

TopologyEstimate threshold_topology(const Matrix& lambda, const Matrix& delta, double threshold,
                                    std::optional<double> input_threshold) {
  if (!(threshold >= 0.0)) throw ArgumentError("threshold must be nonnegative");
  const double dt = input_threshold.value_or(threshold);
  if (!(dt >= 0.0)) throw ArgumentError("input threshold must be nonnegative");
  if (lambda.rows() != lambda.cols()) throw ArgumentError("Lambda must be square");
  if (delta.rows() != lambda.rows() && delta.size() != 0) throw ArgumentError("Delta row count differs from Lambda");
  TopologyEstimate t;
  t.lambda = lambda;
  t.delta = delta.size() == 0 ? Matrix::Zero(lambda.rows(), 0) : delta;
  t.threshold = threshold;
  t.input_threshold = dt;
  t.neighbors.resize(static_cast<std::size_t>(lambda.rows()));
  t.inputs.resize(static_cast<std::size_t>(lambda.rows()));
  for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
    for (Eigen::Index k = 0; k < lambda.cols(); ++k)
      if (lambda(i, k) >= threshold) t.neighbors[static_cast<std::size_t>(i)].push_back(static_cast<int>(k));
    for (Eigen::Index k = 0; k < t.delta.cols(); ++k)
      if (t.delta(i, k) >= dt) t.inputs[static_cast<std::size_t>(i)].push_back(static_cast<int>(k));
  }
  return t;
}

double EdgeCounts::tpr() const {
  return true_edges() > 0 ? static_cast<double>(true_positive) / true_edges() : std::numeric_limits<double>::quiet_NaN();
}

double EdgeCounts::fpr() const {
  return non_edges() > 0 ? static_cast<double>(false_positive) / non_edges() : std::numeric_limits<double>::quiet_NaN();
}

Eigen::MatrixXi truth_adjacency(const NetworkModel& truth, bool count_self_loops) {
  const int n = truth.num_nodes();
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k : truth.neighbors(i, count_self_loops)) adj(i, k) = 1;
  return adj;
}

EdgeCounts count_edges(const std::vector<std::vector<int>>& estimated, const NetworkModel& truth,
                       bool count_self_loops) {
  const int n = truth.num_nodes();
  if (static_cast<int>(estimated.size()) != n) throw ArgumentError("count_edges: node count differs from truth");
  const Eigen::MatrixXi adj = truth_adjacency(truth, count_self_loops);
  Eigen::MatrixXi est = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k : estimated[static_cast<std::size_t>(i)]) {
      if (k < 0 || k >= n) throw ArgumentError("count_edges: neighbor index out of range");
      est(i, k) = 1;
    }
  EdgeCounts c;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (k == i && !count_self_loops) continue;
      const bool t = adj(i, k) != 0;
      const bool e = est(i, k) != 0;
      if (t && e) ++c.true_positive;
      else if (t) ++c.false_negative;
      else if (e) ++c.false_positive;
      else ++c.true_negative;
    }
  }
  return c;
}

namespace {

struct Scored {
  std::vector<double> edge;
  std::vector<double> non_edge;
};

Scored split_scores(const Matrix& lambda, const NetworkModel& truth, bool count_self_loops) {
  const int n = truth.num_nodes();
  if (lambda.rows() != n || lambda.cols() != n) throw ArgumentError("roc: Lambda shape differs from the truth network");
  const Eigen::MatrixXi adj = truth_adjacency(truth, count_self_loops);
  Scored s;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (k == i && !count_self_loops) continue;
      (adj(i, k) ? s.edge : s.non_edge).push_back(lambda(i, k));
    }
  return s;
}

RocCurve build_curve(const Scored& s, std::vector<double> thresholds) {
  RocCurve roc;
  roc.true_edges = static_cast<int>(s.edge.size());
  roc.non_edges = static_cast<int>(s.non_edge.size());
  if (s.edge.empty() || s.non_edge.empty()) {
    roc.defined = false;
    roc.auroc = std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<double> edge = s.edge, non_edge = s.non_edge;
  std::sort(edge.begin(), edge.end());
  std::sort(non_edge.begin(), non_edge.end());
  auto count_ge = [](const std::vector<double>& v, double t) {
    return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), t));
  };
  const double inf = std::numeric_limits<double>::infinity();
  roc.points.push_back({inf, 0.0, 0.0});
  for (double t : thresholds) {
    const double tpr = edge.empty() ? std::numeric_limits<double>::quiet_NaN() : count_ge(edge, t) / edge.size();
    const double fpr =
        non_edge.empty() ? std::numeric_limits<double>::quiet_NaN() : count_ge(non_edge, t) / non_edge.size();
    roc.points.push_back({t, fpr, tpr});
  }
  roc.points.push_back({-inf, 1.0, 1.0});
  if (!roc.defined) return roc;
  std::stable_sort(roc.points.begin(), roc.points.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  double area = 0.0;
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  roc.auroc = area;
  return roc;
}

}  // namespace

RocCurve roc_sweep(const Matrix& lambda, const NetworkModel& truth, const std::vector<double>& thresholds,
                   bool count_self_loops) {
  return build_curve(split_scores(lambda, truth, count_self_loops), thresholds);
}

RocCurve roc_exact(const Matrix& lambda, const NetworkModel& truth, bool count_self_loops) {
  const Scored s = split_scores(lambda, truth, count_self_loops);
  std::vector<double> t = s.edge;
  t.insert(t.end(), s.non_edge.begin(), s.non_edge.end());
  std::sort(t.begin(), t.end(), std::greater<>());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return build_curve(s, t);
}

}  // namespace netkoop
