#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netkoop/dataset.hpp"
#include "netkoop/numerics.hpp"

namespace netkoop {

enum class FunctionKind { Constant, Coordinate, Monomial, Sine, Exponential, Sigmoid, GaussianRbf };

/// A scalar function of one block (a node state x_k or an input u_k). Coordinate
/// based kinds act on coordinate `index` of the block.
///
/// Every function has a canonical text form, used for configs, manifests and
/// for aligning estimated coefficients with ground truth:
///
///   1  2.5  x[0]  x[1]^3  sin(x[0])  exp(x[2])
///   sigmoid(x[0];nu=1;theta=-0.5;gain=1)
///   rbf(gamma=0.01;center=[0.5,-1])
///   (x[0]^2)-0.3333333333333333        shifted (centered) form
class ScalarFunction {
 public:
  static ScalarFunction constant(double value = 1.0);
  static ScalarFunction coordinate(int index);
  /// Degree 0 collapses to constant(1) and degree 1 to coordinate(index).
  static ScalarFunction monomial(int degree, int index = 0);
  static ScalarFunction sine(int index = 0);
  static ScalarFunction exponential(int index = 0);
  /// gain / (1 + exp(-slope * (x[index] - offset)))
  static ScalarFunction sigmoid(double slope, double offset, double gain = 1.0, int index = 0);
  /// exp(-gamma^2 * ||x - center||^2)
  static ScalarFunction gaussian_rbf(std::vector<double> center, double gamma);

  /// Inverse of text(); throws ParseError.
  static ScalarFunction parse(std::string_view text);

  FunctionKind kind() const { return kind_; }
  int index() const { return index_; }
  int degree() const { return degree_; }
  double shift() const { return shift_; }
  double gamma() const { return a_; }
  const std::vector<double>& center() const { return center_; }

  /// Smallest block dimension this function can be evaluated on.
  int min_input_dim() const;
  /// True when the function needs exactly min_input_dim() coordinates (RBFs).
  bool exact_dim() const { return kind_ == FunctionKind::GaussianRbf; }

  double operator()(std::span<const double> x) const;
  double operator()(const Vector& x) const { return (*this)(std::span<const double>(x.data(), x.size())); }

  /// f - mean
  ScalarFunction shifted(double mean) const;

  /// Mean of the unshifted-plus-shift function over the box [lo, hi]^dim
  /// under the uniform measure.
  double box_mean(double lo, double hi, int dim) const;

  std::string text() const;

  friend bool operator==(const ScalarFunction& a, const ScalarFunction& b) { return a.text() == b.text(); }

 private:
  FunctionKind kind_ = FunctionKind::Constant;
  int index_ = 0;
  int degree_ = 0;
  double a_ = 1.0;  // constant value / slope / gamma
  double b_ = 0.0;  // sigmoid offset
  double c_ = 1.0;  // sigmoid gain
  std::vector<double> center_;
  double shift_ = 0.0;
};

std::vector<ScalarFunction> parse_functions(const std::vector<std::string>& texts);
std::vector<std::string> function_texts(const std::vector<ScalarFunction>& funcs);

/// K x N matrix with entry (k, j) = funcs[j](row k of points).
Matrix eval_matrix(const std::vector<ScalarFunction>& funcs, const Matrix& points);

/// Test functions on the augmented state [x, u] used by the dual method.
struct TestFunctionSet {
  std::vector<ScalarFunction> functions;
  // Homogeneous Gaussian RBF sets keep their centers for a vectorized evaluation.
  Matrix rbf_centers;
  double rbf_gamma = 0.0;
  bool homogeneous_rbf = false;
  bool degenerate = false;  // gamma == 0: every function is the constant 1
  std::string id;

  std::size_t count() const { return functions.size(); }
  Matrix eval(const Matrix& points) const;
};

/// One RBF per row of `centers`, all sharing gamma.
TestFunctionSet make_rbf_set(const Matrix& centers, double gamma);

/// Linear grid of `count` values from `lo` to `hi` inclusive.
std::vector<double> linear_grid(double lo, double hi, int count);
std::vector<double> geometric_grid(double lo, double hi, int count);

enum class Centering { Raw, EmpiricalMean, AnalyticMean };

std::string to_string(Centering c);
Centering centering_from_string(std::string_view s);

/// Node functions phi_kl on each node block and psi_kl on each input block.
struct NodeFunctionSet {
  std::vector<std::vector<ScalarFunction>> node_functions;   // one list per node
  std::vector<std::vector<ScalarFunction>> input_functions;  // one list per input
  Centering centering = Centering::EmpiricalMean;
  double domain_lo = -1.0;  // hyper-rectangle used by AnalyticMean
  double domain_hi = 1.0;

  /// Same function list on every node and on every input.
  static NodeFunctionSet uniform(int nodes, int inputs, const std::vector<ScalarFunction>& per_node,
                                 const std::vector<ScalarFunction>& per_input, Centering centering);
};

/// Replaces each function by its centered version (empirical mean over the
/// dataset's X / U columns, or analytic mean over the declared box). Raw sets
/// are returned unchanged.
NodeFunctionSet center_node_functions(const NodeFunctionSet& set, const SnapshotDataset& data);

/// Evaluates `funcs` on the block [offset, offset + dim) of each row of `data`.
Matrix eval_block(const std::vector<ScalarFunction>& funcs, const Matrix& data, int offset, int dim);

}  // namespace netkoop
