#include "netkoop/dictionary.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "netkoop/errors.hpp"
#include "netkoop/format.hpp"

namespace netkoop {

ScalarFunction ScalarFunction::constant(double value) {
  ScalarFunction f;
  f.kind_ = FunctionKind::Constant;
  f.a_ = value;
  return f;
}

ScalarFunction ScalarFunction::coordinate(int index) {
  if (index < 0) throw ArgumentError("coordinate index must be nonnegative");
  ScalarFunction f;
  f.kind_ = FunctionKind::Coordinate;
  f.index_ = index;
  f.degree_ = 1;
  return f;
}

ScalarFunction ScalarFunction::monomial(int degree, int index) {
  if (degree < 0) throw ArgumentError("monomial degree must be nonnegative");
  if (degree == 0) return constant(1.0);
  if (degree == 1) return coordinate(index);
  ScalarFunction f = coordinate(index);
  f.kind_ = FunctionKind::Monomial;
  f.degree_ = degree;
  return f;
}

ScalarFunction ScalarFunction::sine(int index) {
  ScalarFunction f = coordinate(index);
  f.kind_ = FunctionKind::Sine;
  f.degree_ = 0;
  return f;
}

ScalarFunction ScalarFunction::exponential(int index) {
  ScalarFunction f = coordinate(index);
  f.kind_ = FunctionKind::Exponential;
  f.degree_ = 0;
  return f;
}

ScalarFunction ScalarFunction::sigmoid(double slope, double offset, double gain, int index) {
  ScalarFunction f = coordinate(index);
  f.kind_ = FunctionKind::Sigmoid;
  f.degree_ = 0;
  f.a_ = slope;
  f.b_ = offset;
  f.c_ = gain;
  return f;
}

ScalarFunction ScalarFunction::gaussian_rbf(std::vector<double> center, double gamma) {
  if (center.empty()) throw ArgumentError("rbf center must be non-empty");
  if (!(gamma >= 0.0)) throw ArgumentError("rbf gamma must be nonnegative");
  ScalarFunction f;
  f.kind_ = FunctionKind::GaussianRbf;
  f.a_ = gamma;
  f.center_ = std::move(center);
  return f;
}

int ScalarFunction::min_input_dim() const {
  switch (kind_) {
    case FunctionKind::Constant:
      return 0;
    case FunctionKind::GaussianRbf:
      return static_cast<int>(center_.size());
    default:
      return index_ + 1;
  }
}

double ScalarFunction::operator()(std::span<const double> x) const {
  double v = 0.0;
  switch (kind_) {
    case FunctionKind::Constant:
      v = a_;
      break;
    case FunctionKind::Coordinate:
      v = x[index_];
      break;
    case FunctionKind::Monomial: {
      const double base = x[index_];
      v = base;
      for (int d = 1; d < degree_; ++d) v *= base;
      break;
    }
    case FunctionKind::Sine:
      v = std::sin(x[index_]);
      break;
    case FunctionKind::Exponential:
      v = std::exp(x[index_]);
      break;
    case FunctionKind::Sigmoid:
      v = c_ / (1.0 + std::exp(-a_ * (x[index_] - b_)));
      break;
    case FunctionKind::GaussianRbf: {
      double d2 = 0.0;
      for (std::size_t i = 0; i < center_.size(); ++i) {
        const double d = x[i] - center_[i];
        d2 += d * d;
      }
      v = std::exp(-a_ * a_ * d2);
      break;
    }
  }
  return v - shift_;
}

ScalarFunction ScalarFunction::shifted(double mean) const {
  ScalarFunction f = *this;
  f.shift_ += mean;
  return f;
}

double ScalarFunction::box_mean(double lo, double hi, int dim) const {
  if (!(hi > lo)) throw ArgumentError("box_mean: empty interval");
  if (dim < min_input_dim()) throw ArgumentError("box_mean: dimension too small for " + text());
  const double w = hi - lo;
  double m = 0.0;
  switch (kind_) {
    case FunctionKind::Constant:
      m = a_;
      break;
    case FunctionKind::Coordinate:
    case FunctionKind::Monomial:
      m = (std::pow(hi, degree_ + 1) - std::pow(lo, degree_ + 1)) / ((degree_ + 1) * w);
      break;
    case FunctionKind::Sine:
      m = (std::cos(lo) - std::cos(hi)) / w;
      break;
    case FunctionKind::Exponential:
      m = (std::exp(hi) - std::exp(lo)) / w;
      break;
    case FunctionKind::Sigmoid: {
      if (a_ == 0.0) {
        m = 0.5 * c_;
      } else {
        // antiderivative of 1/(1+e^{-s(x-t)}) is log1p(e^{s(x-t)})/s
        auto prim = [&](double x) {
          const double z = a_ * (x - b_);
          return (z > 30.0 ? z : std::log1p(std::exp(z))) / a_;
        };
        m = c_ * (prim(hi) - prim(lo)) / w;
      }
      break;
    }
    case FunctionKind::GaussianRbf: {
      m = 1.0;
      if (a_ > 0.0) {
        for (double c : center_) {
          const double integral = std::sqrt(std::numbers::pi) / (2.0 * a_) *
                                  (std::erf(a_ * (hi - c)) - std::erf(a_ * (lo - c)));
          m *= integral / w;
        }
      }
      break;
    }
  }
  return m - shift_;
}

std::string ScalarFunction::text() const {
  std::string base;
  const std::string xref = "x[" + std::to_string(index_) + "]";
  switch (kind_) {
    case FunctionKind::Constant:
      base = format_short(a_);
      break;
    case FunctionKind::Coordinate:
      base = xref;
      break;
    case FunctionKind::Monomial:
      base = xref + "^" + std::to_string(degree_);
      break;
    case FunctionKind::Sine:
      base = "sin(" + xref + ")";
      break;
    case FunctionKind::Exponential:
      base = "exp(" + xref + ")";
      break;
    case FunctionKind::Sigmoid:
      base = "sigmoid(" + xref + ";nu=" + format_short(a_) + ";theta=" + format_short(b_) +
             ";gain=" + format_short(c_) + ")";
      break;
    case FunctionKind::GaussianRbf: {
      base = "rbf(gamma=" + format_short(a_) + ";center=[";
      for (std::size_t i = 0; i < center_.size(); ++i) {
        if (i) base += ",";
        base += format_short(center_[i]);
      }
      base += "])";
      break;
    }
  }
  if (shift_ == 0.0) return base;
  if (shift_ > 0.0) return "(" + base + ")-" + format_short(shift_);
  return "(" + base + ")+" + format_short(-shift_);
}

namespace {

class FunctionParser {
 public:
  explicit FunctionParser(std::string_view text) : original_(text) {
    for (char ch : text)
      if (!std::isspace(static_cast<unsigned char>(ch))) s_.push_back(ch);
  }

  ScalarFunction parse() {
    ScalarFunction f = ScalarFunction::constant();
    if (peek() == '(') {
      ++pos_;
      f = parse_base();
      expect(')');
      const char sign = next();
      if (sign != '+' && sign != '-') fail("expected '+' or '-' after shifted form");
      const double v = number();
      f = f.shifted(sign == '-' ? v : -v);
    } else {
      f = parse_base();
    }
    if (pos_ != s_.size()) fail("trailing characters");
    return f;
  }

 private:
  ScalarFunction parse_base() {
    if (consume("x[")) {
      const int idx = integer();
      expect(']');
      if (consume("^")) return ScalarFunction::monomial(integer(), idx);
      return ScalarFunction::coordinate(idx);
    }
    if (consume("sin(")) {
      const int idx = xref();
      expect(')');
      return ScalarFunction::sine(idx);
    }
    if (consume("exp(")) {
      const int idx = xref();
      expect(')');
      return ScalarFunction::exponential(idx);
    }
    if (consume("sigmoid(")) {
      const int idx = xref();
      double nu = 1.0, theta = 0.0, gain = 1.0;
      while (consume(";")) {
        if (consume("nu=")) {
          nu = number();
        } else if (consume("theta=")) {
          theta = number();
        } else if (consume("gain=")) {
          gain = number();
        } else {
          fail("unknown sigmoid parameter");
        }
      }
      expect(')');
      return ScalarFunction::sigmoid(nu, theta, gain, idx);
    }
    if (consume("rbf(")) {
      if (!consume("gamma=")) fail("expected gamma=");
      const double gamma = number();
      if (!consume(";center=[")) fail("expected ;center=[");
      std::vector<double> center{number()};
      while (consume(",")) center.push_back(number());
      expect(']');
      expect(')');
      return ScalarFunction::gaussian_rbf(std::move(center), gamma);
    }
    return ScalarFunction::constant(number());
  }

  int xref() {
    if (!consume("x[")) fail("expected x[");
    const int idx = integer();
    expect(']');
    return idx;
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  char next() { return pos_ < s_.size() ? s_[pos_++] : '\0'; }

  bool consume(std::string_view tok) {
    if (s_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(char ch) {
    if (next() != ch) fail(std::string("expected '") + ch + "'");
  }

  int integer() {
    int v = 0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("expected integer");
    pos_ = static_cast<std::size_t>(p - s_.data());
    return v;
  }

  double number() {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("expected number");
    pos_ = static_cast<std::size_t>(p - s_.data());
    return v;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("cannot parse function '" + std::string(original_) + "' at offset " +
                     std::to_string(pos_) + ": " + why);
  }

  std::string_view original_;
  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarFunction ScalarFunction::parse(std::string_view text) {
  try {
    return FunctionParser(text).parse();
  } catch (const ArgumentError& e) {
    throw ParseError("'" + std::string(text) + "': " + e.what());
  }
}

std::vector<ScalarFunction> parse_functions(const std::vector<std::string>& texts) {
  std::vector<ScalarFunction> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(ScalarFunction::parse(t));
  return out;
}

std::vector<std::string> function_texts(const std::vector<ScalarFunction>& funcs) {
  std::vector<std::string> out;
  out.reserve(funcs.size());
  for (const auto& f : funcs) out.push_back(f.text());
  return out;
}

namespace {

void check_dims(const std::vector<ScalarFunction>& funcs, Eigen::Index dim) {
  for (std::size_t j = 0; j < funcs.size(); ++j) {
    const auto& f = funcs[j];
    const bool ok = f.exact_dim() ? f.min_input_dim() == dim : f.min_input_dim() <= dim;
    if (!ok) {
      throw ArgumentError("function " + std::to_string(j) + " (" + f.text() + ") cannot be evaluated on " +
                          std::to_string(dim) + "-dimensional points");
    }
  }
}

}  // namespace

Matrix eval_matrix(const std::vector<ScalarFunction>& funcs, const Matrix& points) {
  check_dims(funcs, points.cols());
  const Eigen::Index k = points.rows();
  Matrix out(k, static_cast<Eigen::Index>(funcs.size()));
  std::vector<double> row(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) row[static_cast<std::size_t>(c)] = points(r, c);
    for (std::size_t j = 0; j < funcs.size(); ++j) out(r, static_cast<Eigen::Index>(j)) = funcs[j](row);
  }
  return out;
}

Matrix eval_block(const std::vector<ScalarFunction>& funcs, const Matrix& data, int offset, int dim) {
  if (offset < 0 || offset + dim > data.cols()) throw ArgumentError("eval_block: block outside data columns");
  return eval_matrix(funcs, data.middleCols(offset, dim));
}

Matrix TestFunctionSet::eval(const Matrix& points) const {
  if (!homogeneous_rbf) return eval_matrix(functions, points);
  if (points.cols() != rbf_centers.cols()) {
    throw ArgumentError("test functions expect " + std::to_string(rbf_centers.cols()) +
                        "-dimensional points, got " + std::to_string(points.cols()));
  }
  // ||p - c||^2 = ||p||^2 + ||c||^2 - 2 p.c, clamped at zero against cancellation.
  const Vector pn = points.rowwise().squaredNorm();
  const Vector cn = rbf_centers.rowwise().squaredNorm();
  Matrix d2 = -2.0 * points * rbf_centers.transpose();
  d2.colwise() += pn;
  d2.rowwise() += cn.transpose();
  const double g2 = rbf_gamma * rbf_gamma;
  return (d2.cwiseMax(0.0) * (-g2)).array().exp().matrix();
}

TestFunctionSet make_rbf_set(const Matrix& centers, double gamma) {
  if (centers.rows() == 0 || centers.cols() == 0) throw ArgumentError("make_rbf_set: centers must be non-empty");
  if (!(gamma >= 0.0)) throw ArgumentError("make_rbf_set: gamma must be nonnegative");
  TestFunctionSet set;
  set.rbf_centers = centers;
  set.rbf_gamma = gamma;
  set.homogeneous_rbf = true;
  set.degenerate = gamma == 0.0;
  set.functions.reserve(static_cast<std::size_t>(centers.rows()));
  for (Eigen::Index r = 0; r < centers.rows(); ++r) {
    std::vector<double> c(static_cast<std::size_t>(centers.cols()));
    for (Eigen::Index j = 0; j < centers.cols(); ++j) c[static_cast<std::size_t>(j)] = centers(r, j);
    set.functions.push_back(ScalarFunction::gaussian_rbf(std::move(c), gamma));
  }
  set.id = "rbf(gamma=" + format_short(gamma) + ";count=" + std::to_string(centers.rows()) + ")";
  return set;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw ArgumentError("grid count must be positive");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return g;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (count < 1) throw ArgumentError("grid count must be positive");
  if (!(lo > 0.0 && hi > 0.0)) throw ArgumentError("geometric grid needs positive bounds");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    g[static_cast<std::size_t>(i)] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  }
  return g;
}

std::string to_string(Centering c) {
  switch (c) {
    case Centering::Raw:
      return "raw";
    case Centering::EmpiricalMean:
      return "empirical_mean";
    case Centering::AnalyticMean:
      return "analytic_mean";
  }
  return "raw";
}

Centering centering_from_string(std::string_view s) {
  if (s == "raw") return Centering::Raw;
  if (s == "empirical_mean") return Centering::EmpiricalMean;
  if (s == "analytic_mean") return Centering::AnalyticMean;
  throw ValidationError("unknown centering mode '" + std::string(s) + "'");
}

NodeFunctionSet NodeFunctionSet::uniform(int nodes, int inputs, const std::vector<ScalarFunction>& per_node,
                                         const std::vector<ScalarFunction>& per_input, Centering centering) {
  NodeFunctionSet set;
  set.node_functions.assign(static_cast<std::size_t>(nodes), per_node);
  set.input_functions.assign(static_cast<std::size_t>(inputs), per_input);
  set.centering = centering;
  return set;
}

NodeFunctionSet center_node_functions(const NodeFunctionSet& set, const SnapshotDataset& data) {
  if (set.centering == Centering::Raw) return set;
  if (data.samples() == 0) throw ArgumentError("center_node_functions: empty dataset");
  if (set.node_functions.size() != data.node_dims.size() || set.input_functions.size() != data.input_dims.size()) {
    throw ArgumentError("center_node_functions: node function set does not match dataset blocks");
  }
  NodeFunctionSet out = set;
  auto center_block = [&](std::vector<ScalarFunction>& funcs, const Matrix& cols, int offset, int dim) {
    if (funcs.empty()) return;
    if (set.centering == Centering::EmpiricalMean) {
      const Matrix vals = eval_block(funcs, cols, offset, dim);
      for (std::size_t j = 0; j < funcs.size(); ++j) {
        funcs[j] = funcs[j].shifted(vals.col(static_cast<Eigen::Index>(j)).mean());
      }
    } else {
      for (auto& f : funcs) f = f.shifted(f.box_mean(set.domain_lo, set.domain_hi, dim));
    }
  };
  for (int k = 0; k < data.num_nodes(); ++k) {
    center_block(out.node_functions[static_cast<std::size_t>(k)], data.x, data.node_offset(k),
                 data.node_dims[static_cast<std::size_t>(k)]);
  }
  for (int k = 0; k < data.num_inputs(); ++k) {
    center_block(out.input_functions[static_cast<std::size_t>(k)], data.u, data.input_offset(k),
                 data.input_dims[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace netkoop
