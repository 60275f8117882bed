#include "netkoop/simulate.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "netkoop/errors.hpp"
#include "netkoop/format.hpp"
#include "netkoop/parallel.hpp"
#include "netkoop/random.hpp"

namespace netkoop {

namespace fs = std::filesystem;
using nlohmann::json;

int SnapshotDataset::state_dim() const {
  int s = 0;
  for (int d : node_dims) s += d;
  return s;
}

int SnapshotDataset::input_dim() const {
  int s = 0;
  for (int d : input_dims) s += d;
  return s;
}

int SnapshotDataset::node_offset(int node) const {
  if (node < 0 || node >= num_nodes()) throw ArgumentError("dataset: node index out of range");
  int s = 0;
  for (int i = 0; i < node; ++i) s += node_dims[static_cast<std::size_t>(i)];
  return s;
}

int SnapshotDataset::input_offset(int input) const {
  if (input < 0 || input >= num_inputs()) throw ArgumentError("dataset: input index out of range");
  int s = 0;
  for (int i = 0; i < input; ++i) s += input_dims[static_cast<std::size_t>(i)];
  return s;
}

void SnapshotDataset::validate() const {
  if (!(ts > 0.0) || !std::isfinite(ts)) throw ValidationError("dataset: T_s must be positive");
  if (x.rows() < 1) throw ValidationError("dataset: K must be >= 1");
  if (node_dims.empty()) throw ValidationError("dataset: at least one node is required");
  for (int d : node_dims)
    if (d < 1) throw ValidationError("dataset: node dimensions must be positive");
  for (int d : input_dims)
    if (d < 1) throw ValidationError("dataset: input dimensions must be positive");
  const auto k = x.rows();
  if (y.rows() != k || u.rows() != k) throw ValidationError("dataset: X, U and Y must have the same row count");
  if (x.cols() != state_dim() || y.cols() != state_dim()) throw ValidationError("dataset: X/Y width differs from sum of n_i");
  if (u.cols() != input_dim()) throw ValidationError("dataset: U width differs from sum of m_k");
  if (x_clean.size() != 0 && (x_clean.rows() != k || x_clean.cols() != x.cols())) {
    throw ValidationError("dataset: X_clean shape differs from X");
  }
  if (y_clean.size() != 0 && (y_clean.rows() != k || y_clean.cols() != y.cols())) {
    throw ValidationError("dataset: Y_clean shape differs from Y");
  }
  if (!(noise_sigma >= 0.0)) throw ValidationError("dataset: noise sigma must be nonnegative");
  if (!all_finite(x) || !all_finite(y) || !all_finite(u)) throw ValidationError("dataset: non-finite entries");
}

int IntegratorConfig::steps_for(double t) const {
  if (substeps < 0) throw ArgumentError("integrator: substeps must be >= 0");
  if (substeps > 0) return substeps;
  if (!(max_step > 0.0)) throw ArgumentError("integrator: max_step must be positive");
  // the small slack keeps t = 0.01 at 10 steps instead of 11 from rounding
  return std::max(1, static_cast<int>(std::ceil(t / max_step - 1e-9)));
}

namespace {

// Flattened right-hand side: avoids per-call offset bookkeeping in the hot loop.
class CompiledField {
 public:
  explicit CompiledField(const NetworkModel& m) : n_(m.state_dim()) {
    const auto noff = m.node_offsets();
    const auto ioff = m.input_offsets();
    for (int i = 0; i < m.num_nodes(); ++i) {
      const auto& nd = m.nodes[static_cast<std::size_t>(i)];
      for (const auto& t : nd.terms) {
        const auto k = static_cast<std::size_t>(t.source.index);
        Entry e;
        e.fn = &t.fn;
        e.coef = t.coef.data();
        e.target = noff[static_cast<std::size_t>(i)];
        e.dim = nd.dim;
        e.from_input = t.source.kind == BlockKind::Input;
        e.source = e.from_input ? ioff[k] : noff[k];
        e.source_dim = e.from_input ? m.input_dims[k] : m.node_dims[k];
        entries_.push_back(e);
      }
    }
  }

  void eval(const double* x, const double* u, double* out) const {
    std::fill(out, out + n_, 0.0);
    for (const auto& e : entries_) {
      const double* src = (e.from_input ? u : x) + e.source;
      const double v = (*e.fn)(std::span<const double>(src, static_cast<std::size_t>(e.source_dim)));
      for (int c = 0; c < e.dim; ++c) out[e.target + c] += e.coef[c] * v;
    }
  }

 private:
  struct Entry {
    const ScalarFunction* fn;
    const double* coef;
    int target;
    int dim;
    int source;
    int source_dim;
    bool from_input;
  };
  int n_;
  std::vector<Entry> entries_;
};

Vector integrate(const CompiledField& f, const Vector& x0, const Vector& u, double t, int steps) {
  const Eigen::Index n = x0.size();
  Vector x = x0;
  if (t == 0.0) return x;
  const double h = t / steps;
  Vector k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (int s = 0; s < steps; ++s) {
    f.eval(x.data(), u.data(), k1.data());
    tmp = x + 0.5 * h * k1;
    f.eval(tmp.data(), u.data(), k2.data());
    tmp = x + 0.5 * h * k2;
    f.eval(tmp.data(), u.data(), k3.data());
    tmp = x + h * k3;
    f.eval(tmp.data(), u.data(), k4.data());
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      const double when = h * (s + 1);
      throw DivergenceError("flow: state became non-finite at t = " + format_short(when), when);
    }
  }
  return x;
}

Interval box_for(const std::vector<Interval>& box, Eigen::Index c, const char* what) {
  if (box.size() == 1) return box[0];
  if (static_cast<Eigen::Index>(box.size()) <= c) {
    throw ArgumentError(std::string("gen_dataset: ") + what + " box needs one interval or one per coordinate");
  }
  return box[static_cast<std::size_t>(c)];
}

}  // namespace

Vector flow(const NetworkModel& model, const Vector& x0, const Vector& u, double t, const IntegratorConfig& cfg) {
  if (!(t >= 0.0)) throw ArgumentError("flow: duration must be nonnegative");
  if (x0.size() != model.state_dim() || u.size() != model.input_dim()) {
    throw ArgumentError("flow: state/input dimensions do not match the model");
  }
  return integrate(CompiledField(model), x0, u, t, cfg.steps_for(t));
}

SnapshotDataset gen_dataset(const NetworkModel& model, const DatasetSpec& spec) {
  if (spec.samples < 1) throw ArgumentError("gen_dataset: K must be >= 1");
  if (!(spec.ts > 0.0)) throw ArgumentError("gen_dataset: T_s must be positive");
  if (!(spec.noise_sigma >= 0.0)) throw ArgumentError("gen_dataset: noise sigma must be nonnegative");
  model.validate();
  const int n = model.state_dim();
  const int m = model.input_dim();
  if (spec.state_box.empty() || (m > 0 && spec.input_box.empty())) throw ArgumentError("gen_dataset: empty box");
  for (int c = 0; c < n; ++c) box_for(spec.state_box, c, "state");
  for (int c = 0; c < m; ++c) box_for(spec.input_box, c, "input");

  SnapshotDataset ds;
  ds.ts = spec.ts;
  ds.node_dims = model.node_dims;
  ds.input_dims = model.input_dims;
  ds.noise_sigma = spec.noise_sigma;
  ds.seed = spec.seed;
  ds.model_hash = model.hash();
  const auto k = static_cast<Eigen::Index>(spec.samples);
  ds.x_clean.resize(k, n);
  ds.y_clean.resize(k, n);
  ds.u.resize(k, m);
  ds.x.resize(k, n);
  ds.y.resize(k, n);

  const CompiledField field(model);
  const int steps = spec.integrator.steps_for(spec.ts);
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t s) {
    RandomStream base(spec.seed, "sample", s);
    RandomStream rx = base.child("x0");
    RandomStream ru = base.child("u");
    Vector x0(n), u(m);
    for (int c = 0; c < n; ++c) {
      const auto b = box_for(spec.state_box, c, "state");
      x0(c) = rx.uniform(b.lo, b.hi);
    }
    for (int c = 0; c < m; ++c) {
      const auto b = box_for(spec.input_box, c, "input");
      u(c) = ru.uniform(b.lo, b.hi);
    }
    Vector y;
    try {
      y = integrate(field, x0, u, spec.ts, steps);
    } catch (const DivergenceError& e) {
      throw DivergenceError("gen_dataset: sample " + std::to_string(s) + ": " + e.what(), e.time);
    }
    const auto r = static_cast<Eigen::Index>(s);
    ds.x_clean.row(r) = x0.transpose();
    ds.y_clean.row(r) = y.transpose();
    ds.u.row(r) = u.transpose();
    RandomStream nx = base.child("noise_x");
    RandomStream ny = base.child("noise_y");
    for (int c = 0; c < n; ++c) {
      ds.x(r, c) = x0(c) + (spec.noise_sigma > 0.0 ? spec.noise_sigma * nx.normal() : 0.0);
      ds.y(r, c) = y(c) + (spec.noise_sigma > 0.0 ? spec.noise_sigma * ny.normal() : 0.0);
    }
  });
  ds.validate();
  return ds;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::string line;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) line += ',';
      line += format_full(m(r, c));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed: " + path);
}

Matrix read_csv_matrix(const std::string& path, Eigen::Index expected_rows, Eigen::Index expected_cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (!text.empty() && text.back() != '\n') throw ParseError(path + ": truncated (last line has no newline)");

  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = eol + 1;
    std::vector<double> row;
    if (!line.empty()) {
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
        while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
        double v = 0.0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": cannot parse field '" + std::string(field) + "'");
        }
        row.push_back(v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    if (static_cast<Eigen::Index>(row.size()) != expected_cols) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(expected_cols) +
                       " fields, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (static_cast<Eigen::Index>(rows.size()) != expected_rows) {
    throw ValidationError(path + ": manifest declares K = " + std::to_string(expected_rows) + " but the file has " +
                          std::to_string(rows.size()) + " rows");
  }
  Matrix m(expected_rows, expected_cols);
  for (Eigen::Index r = 0; r < expected_rows; ++r)
    for (Eigen::Index c = 0; c < expected_cols; ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

void save_dataset(const SnapshotDataset& ds, const std::string& dir) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  json j;
  j["format"] = "netkoop-dataset/1";
  j["samples"] = ds.samples();
  j["ts"] = ds.ts;
  j["node_dims"] = ds.node_dims;
  j["input_dims"] = ds.input_dims;
  j["noise_sigma"] = ds.noise_sigma;
  j["noise_convention"] = "standard deviation (variance = noise_sigma^2)";
  j["seed"] = ds.seed;
  j["model_hash"] = ds.model_hash;
  j["has_clean"] = ds.x_clean.size() != 0;
  {
    std::ofstream out(fs::path(dir) / "manifest", std::ios::binary);
    if (!out) throw IoError("cannot write manifest in " + dir);
    out << j.dump(1) << '\n';
  }
  const fs::path d(dir);
  write_csv_matrix((d / "X.csv").string(), ds.x);
  write_csv_matrix((d / "U.csv").string(), ds.u);
  write_csv_matrix((d / "Y.csv").string(), ds.y);
  if (ds.x_clean.size() != 0) {
    write_csv_matrix((d / "X_clean.csv").string(), ds.x_clean);
    write_csv_matrix((d / "Y_clean.csv").string(), ds.y_clean);
  }
}

SnapshotDataset load_dataset(const std::string& dir) {
  const fs::path d(dir);
  std::ifstream in(d / "manifest", std::ios::binary);
  if (!in) throw IoError("cannot open dataset manifest in " + dir);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(dir + "/manifest: " + e.what());
  }
  SnapshotDataset ds;
  Eigen::Index k = 0;
  bool has_clean = false;
  try {
    if (j.at("format") != "netkoop-dataset/1") throw ValidationError(dir + "/manifest: unsupported format");
    k = j.at("samples").get<Eigen::Index>();
    ds.ts = j.at("ts").get<double>();
    ds.node_dims = j.at("node_dims").get<std::vector<int>>();
    ds.input_dims = j.at("input_dims").get<std::vector<int>>();
    ds.noise_sigma = j.at("noise_sigma").get<double>();
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.model_hash = j.at("model_hash").get<std::string>();
    has_clean = j.value("has_clean", false);
  } catch (const json::exception& e) {
    throw ParseError(dir + "/manifest: " + e.what());
  }
  if (k < 1) throw ValidationError(dir + "/manifest: K must be >= 1");
  const Eigen::Index n = ds.state_dim();
  const Eigen::Index m = ds.input_dim();
  ds.x = read_csv_matrix((d / "X.csv").string(), k, n);
  ds.u = read_csv_matrix((d / "U.csv").string(), k, m);
  ds.y = read_csv_matrix((d / "Y.csv").string(), k, n);
  if (has_clean) {
    ds.x_clean = read_csv_matrix((d / "X_clean.csv").string(), k, n);
    ds.y_clean = read_csv_matrix((d / "Y_clean.csv").string(), k, n);
  }
  ds.validate();
  return ds;
}

}  // namespace netkoop
