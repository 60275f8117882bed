#include "netkoop/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "netkoop/errors.hpp"
#include "netkoop/format.hpp"

namespace netkoop {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::set<std::string> kFamilies = {"erdos_renyi_poly", "nonpoly", "hindmarsh_rose", "file"};
const std::set<std::string> kAxes = {"K", "N", "sigma", "edge_prob", "ts", "threshold", "gamma"};

// Strict reader over one JSON object: every key must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ValidationError(path + ": " + msg);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }

  void opt_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      if (!v->is_number()) fail(at(key), "expected a number or null");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      const auto x = v->get<long long>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(at(key), "out of range");
      out = static_cast<int>(x);
    }
  }

  void u64(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(at(key), "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void strings(const std::string& key, std::vector<std::string>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(at(key), "expected an array of strings");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a string");
        out.push_back((*v)[i].get<std::string>());
      }
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(at(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void interval(const std::string& key, Interval& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        fail(at(key), "expected [lo, hi]");
      }
      out.lo = (*v)[0].get<double>();
      out.hi = (*v)[1].get<double>();
    }
  }

  std::optional<Reader> object(const std::string& key) {
    if (const json* v = find(key)) return Reader(*v, at(key));
    return std::nullopt;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<ScalarFunction> parse_list(const std::vector<std::string>& texts, const std::string& path) {
  std::vector<ScalarFunction> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(ScalarFunction::parse(texts[i]));
    } catch (const Error& e) {
      Reader::fail(path + "[" + std::to_string(i) + "]", e.what());
    }
  }
  return out;
}

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, const std::string& where) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(where + ": unterminated quote");
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError(where + ": bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(where + ": bad number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw ParseError(where + ": bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(where + ": bad integer '" + s + "'");
  }
}

// Dense matrix with a header line and the row index in the first column.
std::string dense_csv(const Matrix& m, const std::string& row_name, const std::string& col_prefix) {
  std::ostringstream os;
  os << row_name;
  for (Eigen::Index c = 0; c < m.cols(); ++c) os << ',' << col_prefix << c;
  os << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << r;
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ',' << format_full(m(r, c));
    os << '\n';
  }
  return os.str();
}

Matrix parse_dense_csv(const std::string& text, const std::string& where) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError(where + ": empty file");
  const auto cols = split_csv_line(lines[0], where).size();
  if (cols < 1) throw ParseError(where + ": bad header");
  Matrix m(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(cols - 1));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::string at = where + ":" + std::to_string(r + 1);
    const auto f = split_csv_line(lines[r], at);
    if (f.size() != cols) throw ParseError(at + ": expected " + std::to_string(cols) + " fields");
    for (std::size_t c = 1; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = parse_double(f[c], at);
    }
  }
  return m;
}

std::string triplet_csv(const Matrix& m) {
  std::ostringstream os;
  os << "row,col,value\n";
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (m(r, c) != 0.0) os << r << ',' << c << ',' << format_full(m(r, c)) << '\n';
  return os.str();
}

std::string roc_csv(const RocCurve& roc) {
  std::ostringstream os;
  os << "threshold,fpr,tpr\n";
  for (const auto& p : roc.points)
    os << format_full(p.threshold) << ',' << format_full(p.fpr) << ',' << format_full(p.tpr) << '\n';
  return os.str();
}

std::string eps_csv(const ScoreReport& r) {
  std::ostringstream os;
  os << "node,eps,eps_strict,eps_extended\n";
  for (std::size_t i = 0; i < r.eps.size(); ++i) {
    os << i << ',' << format_full(r.eps[i]) << ',' << format_full(r.eps_strict[i]) << ','
       << format_full(r.eps_extended[i]) << '\n';
  }
  return os.str();
}

ojson sets_json(const std::vector<std::vector<int>>& sets) {
  ojson a = ojson::array();
  for (const auto& s : sets) a.push_back(s);
  return a;
}

Error with_stage(const std::string& stage, const Error& e) { return Error(e.kind(), stage + ": " + e.what()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<ScalarFunction> fns(std::initializer_list<const char*> texts) {
  std::vector<ScalarFunction> out;
  for (const char* t : texts) out.push_back(ScalarFunction::parse(t));
  return out;
}

}  // namespace

double DataConfig::noise_std() const { return noise_convention == "variance" ? std::sqrt(noise) : noise; }

std::vector<double> GammaGrid::values() const {
  return kind == "geometric" ? geometric_grid(lo, hi, count) : linear_grid(lo, hi, count);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Reader r(root, "");
  if (auto m = r.object("model")) {
    m->string("family", c.model.family);
    m->integer("nodes", c.model.nodes);
    m->u64("seed", c.model.seed);
    m->number("edge_prob", c.model.edge_prob);
    Interval coef{c.model.coef_lo, c.model.coef_hi};
    m->interval("coef_range", coef);
    c.model.coef_lo = coef.lo;
    c.model.coef_hi = coef.hi;
    m->integer("inputs", c.model.inputs);
    m->integer("mean_degree", c.model.mean_degree);
    m->number("rewire_prob", c.model.rewire_prob);
    if (auto hr = m->object("hindmarsh_rose")) {
      hr->number("c", c.model.hr_c);
      hr->number("tau", c.model.hr_tau);
      hr->number("nu", c.model.hr_nu);
      hr->finish();
    }
    m->string("path", c.model.path);
    m->finish();
  }
  if (auto d = r.object("data")) {
    d->integer("samples", c.data.samples);
    d->number("ts", c.data.ts);
    d->interval("state_box", c.data.state_box);
    d->interval("input_box", c.data.input_box);
    d->number("noise", c.data.noise);
    d->string("noise_convention", c.data.noise_convention);
    d->u64("seed", c.data.seed);
    if (auto in = d->object("integrator")) {
      in->integer("substeps", c.data.substeps);
      in->number("max_step", c.data.max_step);
      in->finish();
    }
    d->finish();
  }
  if (auto d = r.object("dual")) {
    d->opt_number("gamma", c.dual.gamma);
    if (auto g = d->object("gamma_grid")) {
      g->string("kind", c.dual.grid.kind);
      g->number("lo", c.dual.grid.lo);
      g->number("hi", c.dual.grid.hi);
      g->integer("count", c.dual.grid.count);
      g->finish();
    }
    d->string("centers", c.dual.centers);
    std::string mode = to_string(c.dual.log_mode);
    d->string("log_mode", mode);
    try {
      c.dual.log_mode = dual_log_mode_from_string(mode);
    } catch (const Error& e) {
      Reader::fail("dual.log_mode", e.what());
    }
    d->opt_number("rcond", c.dual.rcond);
    d->finish();
  }
  if (auto t = r.object("topology")) {
    t->strings("node_functions", c.topology.node_functions);
    t->strings("input_functions", c.topology.input_functions);
    std::string cent = to_string(c.topology.centering);
    t->string("centering", cent);
    try {
      c.topology.centering = centering_from_string(cent);
    } catch (const Error& e) {
      Reader::fail("topology.centering", e.what());
    }
    Interval dom{c.topology.domain_lo, c.topology.domain_hi};
    t->interval("domain", dom);
    c.topology.domain_lo = dom.lo;
    c.topology.domain_hi = dom.hi;
    if (auto p = t->object("penalty")) {
      p->boolean("relative", c.topology.penalty.relative);
      p->number("value", c.topology.penalty.value);
      p->finish();
    }
    t->boolean("standardize", c.topology.standardize);
    t->integer("max_iter", c.topology.max_iter);
    t->number("tol", c.topology.tol);
    t->number("threshold", c.topology.threshold);
    t->opt_number("input_threshold", c.topology.input_threshold);
    t->numbers("roc_thresholds", c.topology.roc_thresholds);
    t->finish();
  }
  if (auto l = r.object("local")) {
    l->strings("local_functions", c.local.local_functions);
    l->strings("coupling_functions", c.local.coupling_functions);
    l->strings("input_functions", c.local.input_functions);
    std::string zoh = to_string(c.local.zoh);
    l->string("zoh", zoh);
    try {
      c.local.zoh = zoh_mode_from_string(zoh);
    } catch (const Error& e) {
      Reader::fail("local.zoh", e.what());
    }
    l->opt_number("rcond", c.local.rcond);
    l->boolean("assemble_global", c.local.assemble_global);
    l->finish();
  }
  if (auto m = r.object("metrics")) {
    m->boolean("paper_strict", c.metrics.paper_strict);
    m->boolean("count_self_loops", c.metrics.count_self_loops);
    m->finish();
  }
  if (const json* s = r.find("sweep"); s && !s->is_null()) {
    Reader sr(*s, "sweep");
    SweepConfig sw;
    if (const json* ax = sr.find("axis")) {
      if (ax->is_array()) {
        if (ax->size() != 1 || !(*ax)[0].is_string()) Reader::fail("sweep.axis", "exactly one axis may be varied");
        sw.axis = (*ax)[0].get<std::string>();
      } else if (ax->is_string()) {
        sw.axis = ax->get<std::string>();
      } else {
        Reader::fail("sweep.axis", "expected a string");
      }
    }
    sr.numbers("values", sw.values);
    sr.integer("repeats", sw.repeats);
    sr.boolean("baseline", sw.baseline);
    sr.finish();
    c.sweep = sw;
  }
  r.string("out", c.out);
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return from_json(text);
}

std::string ExperimentConfig::to_json() const {
  ojson j;
  j["model"] = {{"family", model.family},
                {"nodes", model.nodes},
                {"seed", model.seed},
                {"edge_prob", model.edge_prob},
                {"coef_range", {model.coef_lo, model.coef_hi}},
                {"inputs", model.inputs},
                {"mean_degree", model.mean_degree},
                {"rewire_prob", model.rewire_prob},
                {"hindmarsh_rose", {{"c", model.hr_c}, {"tau", model.hr_tau}, {"nu", model.hr_nu}}},
                {"path", model.path}};
  j["data"] = {{"samples", data.samples},
               {"ts", data.ts},
               {"state_box", {data.state_box.lo, data.state_box.hi}},
               {"input_box", {data.input_box.lo, data.input_box.hi}},
               {"noise", data.noise},
               {"noise_convention", data.noise_convention},
               {"seed", data.seed},
               {"integrator", {{"substeps", data.substeps}, {"max_step", data.max_step}}}};
  j["dual"] = {{"gamma", opt_json(dual.gamma)},
               {"gamma_grid", {{"kind", dual.grid.kind}, {"lo", dual.grid.lo}, {"hi", dual.grid.hi}, {"count", dual.grid.count}}},
               {"centers", dual.centers},
               {"log_mode", to_string(dual.log_mode)},
               {"rcond", opt_json(dual.rcond)}};
  j["topology"] = {{"node_functions", topology.node_functions},
                   {"input_functions", topology.input_functions},
                   {"centering", to_string(topology.centering)},
                   {"domain", {topology.domain_lo, topology.domain_hi}},
                   {"penalty", {{"relative", topology.penalty.relative}, {"value", topology.penalty.value}}},
                   {"standardize", topology.standardize},
                   {"max_iter", topology.max_iter},
                   {"tol", topology.tol},
                   {"threshold", topology.threshold},
                   {"input_threshold", opt_json(topology.input_threshold)},
                   {"roc_thresholds", topology.roc_thresholds}};
  j["local"] = {{"local_functions", local.local_functions},
                {"coupling_functions", local.coupling_functions},
                {"input_functions", local.input_functions},
                {"zoh", to_string(local.zoh)},
                {"rcond", opt_json(local.rcond)},
                {"assemble_global", local.assemble_global}};
  j["metrics"] = {{"paper_strict", metrics.paper_strict}, {"count_self_loops", metrics.count_self_loops}};
  if (sweep) {
    j["sweep"] = {{"axis", sweep->axis}, {"values", sweep->values}, {"repeats", sweep->repeats}, {"baseline", sweep->baseline}};
  } else {
    j["sweep"] = nullptr;
  }
  j["out"] = out;
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& path, const std::string& msg) { Reader::fail(path, msg); };
  if (!kFamilies.count(model.family)) {
    fail("model.family", "unknown family '" + model.family + "' (erdos_renyi_poly, nonpoly, hindmarsh_rose, file)");
  }
  if (model.family == "file") {
    if (model.path.empty()) fail("model.path", "required when family is 'file'");
  } else if (model.nodes < 1) {
    fail("model.nodes", "must be positive");
  }
  if (!(model.edge_prob >= 0.0 && model.edge_prob <= 1.0)) fail("model.edge_prob", "must lie in [0, 1]");
  if (!(model.coef_lo > 0.0 && model.coef_lo <= model.coef_hi)) fail("model.coef_range", "need 0 < lo <= hi");
  if (model.inputs < 0) fail("model.inputs", "must be nonnegative");
  if (model.family == "nonpoly" && (model.nodes < 4 || model.nodes % 4 != 0)) {
    fail("model.nodes", "the nonpoly family needs a positive multiple of 4 nodes");
  }
  if (model.family == "hindmarsh_rose") {
    if (model.mean_degree < 2 || model.mean_degree % 2 != 0 || model.mean_degree >= model.nodes) {
      fail("model.mean_degree", "must be even, at least 2 and below the node count");
    }
  }
  if (!(model.rewire_prob >= 0.0 && model.rewire_prob <= 1.0)) fail("model.rewire_prob", "must lie in [0, 1]");
  if (!(model.hr_tau > 0.0)) fail("model.hindmarsh_rose.tau", "must be positive");
  if (data.samples < 1) fail("data.samples", "must be positive");
  if (!(data.ts > 0.0) || !std::isfinite(data.ts)) fail("data.ts", "must be positive");
  if (!(data.state_box.lo < data.state_box.hi)) fail("data.state_box", "need lo < hi");
  if (!(data.input_box.lo < data.input_box.hi)) fail("data.input_box", "need lo < hi");
  if (!(data.noise >= 0.0) || !std::isfinite(data.noise)) fail("data.noise", "must be nonnegative");
  if (data.noise_convention != "std" && data.noise_convention != "variance") {
    fail("data.noise_convention", "expected 'std' or 'variance'");
  }
  if (data.substeps < 0) fail("data.integrator.substeps", "must be nonnegative");
  if (!(data.max_step > 0.0)) fail("data.integrator.max_step", "must be positive");
  if (dual.gamma && !(*dual.gamma >= 0.0)) fail("dual.gamma", "must be nonnegative");
  if (dual.grid.kind != "linear" && dual.grid.kind != "geometric") fail("dual.gamma_grid.kind", "expected 'linear' or 'geometric'");
  if (dual.grid.count < 1) fail("dual.gamma_grid.count", "must be positive");
  if (!(dual.grid.lo >= 0.0 && dual.grid.lo <= dual.grid.hi)) fail("dual.gamma_grid", "need 0 <= lo <= hi");
  if (dual.grid.kind == "geometric" && !(dual.grid.lo > 0.0)) fail("dual.gamma_grid.lo", "must be positive for a geometric grid");
  if (dual.centers != "xy" && dual.centers != "x") fail("dual.centers", "expected 'xy' or 'x'");
  if (dual.rcond && !(*dual.rcond > 0.0)) fail("dual.rcond", "must be positive");
  parse_list(topology.node_functions, "topology.node_functions");
  parse_list(topology.input_functions, "topology.input_functions");
  if (!(topology.domain_lo < topology.domain_hi)) fail("topology.domain", "need lo < hi");
  if (!(topology.penalty.value >= 0.0)) fail("topology.penalty.value", "must be nonnegative");
  if (topology.max_iter < 1) fail("topology.max_iter", "must be positive");
  if (!(topology.tol > 0.0)) fail("topology.tol", "must be positive");
  if (!(topology.threshold >= 0.0)) fail("topology.threshold", "must be nonnegative");
  if (topology.input_threshold && !(*topology.input_threshold >= 0.0)) fail("topology.input_threshold", "must be nonnegative");
  parse_list(local.local_functions, "local.local_functions");
  parse_list(local.coupling_functions, "local.coupling_functions");
  parse_list(local.input_functions, "local.input_functions");
  if (local.rcond && !(*local.rcond > 0.0)) fail("local.rcond", "must be positive");
  if (sweep) {
    if (!kAxes.count(sweep->axis)) fail("sweep.axis", "unknown axis '" + sweep->axis + "' (K, N, sigma, edge_prob, ts, threshold, gamma)");
    if (sweep->values.empty()) fail("sweep.values", "at least one value is required");
    if (sweep->repeats < 1) fail("sweep.repeats", "must be positive");
    if (sweep->axis == "K" || sweep->axis == "N") {
      for (double v : sweep->values)
        if (v != std::floor(v)) fail("sweep.values", "values of axis " + sweep->axis + " must be integers");
    }
  }
}

ExperimentConfig ExperimentConfig::with_repeat(int r) const {
  ExperimentConfig c = *this;
  c.model.seed += static_cast<std::uint64_t>(r);
  c.data.seed += static_cast<std::uint64_t>(r);
  return c;
}

ExperimentConfig ExperimentConfig::with_seed(std::uint64_t s) const {
  ExperimentConfig c = *this;
  c.model.seed = s;
  c.data.seed = s + 1;
  return c;
}

NetworkModel build_model(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  if (m.family == "erdos_renyi_poly") {
    PolyNetworkOptions o;
    o.coef_lo = m.coef_lo;
    o.coef_hi = m.coef_hi;
    o.inputs = m.inputs;
    return gen_erdos_renyi_poly(m.nodes, m.edge_prob, m.seed, o);
  }
  if (m.family == "nonpoly") return gen_nonpoly_network(m.nodes, m.seed);
  if (m.family == "hindmarsh_rose") {
    HindmarshRoseOptions o;
    o.c = m.hr_c;
    o.tau = m.hr_tau;
    o.nu = m.hr_nu;
    return gen_hindmarsh_rose(m.nodes, m.mean_degree, m.rewire_prob, m.seed, o);
  }
  if (m.family == "file") {
    std::string text;
    try {
      text = read_file(m.path);
    } catch (const IoError& e) {
      throw ValidationError(std::string("model.path: ") + e.what());
    }
    return NetworkModel::from_json(text);
  }
  throw ValidationError("model.family: unknown family '" + m.family + "'");
}

SnapshotDataset build_dataset(const ExperimentConfig& cfg, const NetworkModel& model) {
  DatasetSpec s;
  s.samples = cfg.data.samples;
  s.ts = cfg.data.ts;
  s.state_box = {cfg.data.state_box};
  s.input_box = {cfg.data.input_box};
  s.noise_sigma = cfg.data.noise_std();
  s.seed = cfg.data.seed;
  s.integrator.substeps = cfg.data.substeps;
  s.integrator.max_step = cfg.data.max_step;
  SnapshotDataset ds = gen_dataset(model, s);
  ds.model_hash = model.hash();
  return ds;
}

NodeFunctionSet node_function_set(const ExperimentConfig& cfg, const std::vector<int>& node_dims, int num_inputs) {
  NodeFunctionSet set;
  set.centering = cfg.topology.centering;
  set.domain_lo = cfg.topology.domain_lo;
  set.domain_hi = cfg.topology.domain_hi;
  const auto given = parse_list(cfg.topology.node_functions, "topology.node_functions");
  for (int dim : node_dims) {
    if (!given.empty()) {
      set.node_functions.push_back(given);
    } else if (cfg.model.family == "hindmarsh_rose" && dim == 3) {
      set.node_functions.push_back(fns({"x[0]", "x[0]^2", "x[1]", "x[2]"}));
    } else {
      std::vector<ScalarFunction> f;
      for (int c = 0; c < dim; ++c) {
        f.push_back(ScalarFunction::monomial(1, c));
        f.push_back(ScalarFunction::monomial(2, c));
      }
      set.node_functions.push_back(std::move(f));
    }
  }
  const auto given_in = parse_list(cfg.topology.input_functions, "topology.input_functions");
  for (int k = 0; k < num_inputs; ++k)
    set.input_functions.push_back(given_in.empty() ? fns({"x[0]", "x[0]^2"}) : given_in);
  return set;
}

LocalDictionary local_dictionary(const ExperimentConfig& cfg, const std::vector<int>& node_dims, int num_inputs) {
  std::vector<ScalarFunction> extra, coupling, input;
  const auto& f = cfg.model.family;
  if (f == "erdos_renyi_poly") {
    extra = fns({"x[0]^2", "x[0]^3", "x[0]^4"});
    coupling = fns({"x[0]", "x[0]^2", "x[0]^3"});
  } else if (f == "nonpoly") {
    extra = fns({"x[0]^2", "x[0]^3", "sin(x[0])", "exp(x[0])"});
    coupling = fns({"x[0]", "x[0]^2", "x[0]^3", "sin(x[0])", "exp(x[0])"});
  } else if (f == "hindmarsh_rose") {
    extra = fns({"x[0]^2", "x[0]^3", "1"});
    for (double theta : {-0.5, -1.0, -1.5}) coupling.push_back(ScalarFunction::sigmoid(cfg.model.hr_nu, theta));
  } else {
    extra = fns({"x[0]^2", "x[0]^3"});
    coupling = fns({"x[0]", "x[0]^2", "x[0]^3"});
  }
  input = fns({"x[0]", "x[0]^2"});
  if (!cfg.local.local_functions.empty()) extra = parse_list(cfg.local.local_functions, "local.local_functions");
  if (!cfg.local.coupling_functions.empty()) {
    coupling = parse_list(cfg.local.coupling_functions, "local.coupling_functions");
  }
  if (!cfg.local.input_functions.empty()) input = parse_list(cfg.local.input_functions, "local.input_functions");
  return LocalDictionary::uniform(node_dims, num_inputs, extra, coupling, input);
}

bool IdentifyResult::partial() const {
  return std::any_of(node_failures.begin(), node_failures.end(), [](const std::string& s) { return !s.empty(); });
}

namespace {

// Dual stage shared by both identifiers: test-set choice and F_hat.
void run_dual(const ExperimentConfig& cfg, const SnapshotDataset& ds, IdentifyResult& r) {
  const auto t0 = std::chrono::steady_clock::now();
  const RbfCenters centers = cfg.dual.centers == "x" ? RbfCenters::DataX : RbfCenters::DataXY;
  DualOptions opts;
  opts.tol.rcond = cfg.dual.rcond;
  opts.log_mode = cfg.dual.log_mode;
  try {
    if (cfg.dual.gamma) {
      r.gamma = *cfg.dual.gamma;
    } else {
      r.gamma_grid = cfg.dual.grid.values();
      std::vector<TestFunctionSet> candidates;
      for (double g : r.gamma_grid) candidates.push_back(data_rbf_set(ds, g, centers));
      DualOptions sel = opts;
      sel.compute_generator = false;
      r.selection = select_test_set(ds, candidates, sel);
      if (!std::isfinite(r.selection.scores[r.selection.best])) {
        throw NumericalError("no test set could be built; first failure: " + r.selection.failures.front());
      }
      r.gamma = r.gamma_grid[r.selection.best];
    }
    const DualOperator op = build_dual_operator(ds, data_rbf_set(ds, r.gamma, centers), opts);
    r.dual = op.diag;
    r.test_set_id = op.test_set_id;
    r.f_hat = estimate_vector_field(op, ds);
    if (!r.f_hat.allFinite()) throw NumericalError("vector-field estimate has non-finite entries");
  } catch (const Error& e) {
    throw with_stage("dual stage", e);
  }
  for (const auto& w : r.dual.warnings) r.warnings.push_back("dual stage: " + w);
  r.timing.emplace_back("dual", seconds_since(t0));
}

WeightOptions weight_options(const ExperimentConfig& cfg) {
  WeightOptions wo;
  wo.penalty = cfg.topology.penalty;
  wo.lasso.max_iter = cfg.topology.max_iter;
  wo.lasso.tol = cfg.topology.tol;
  wo.lasso.standardize = cfg.topology.standardize;
  return wo;
}

void score_into(const ExperimentConfig& cfg, const NetworkModel* truth, const SnapshotDataset& ds, IdentifyResult& r) {
  if (!truth) return;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (truth->node_dims != ds.node_dims || truth->input_dims != ds.input_dims) {
      throw ScoringError("ground-truth model does not match the dataset dimensions");
    }
    MetricOptions mo;
    mo.paper_strict = cfg.metrics.paper_strict;
    mo.count_self_loops = cfg.metrics.count_self_loops;
    ScoreReport rep = score_run(*truth, r.topology.neighbors, r.params, mo);
    RocCurve roc = cfg.topology.roc_thresholds.empty()
                       ? roc_exact(r.lambda, *truth, mo.count_self_loops)
                       : roc_sweep(r.lambda, *truth, cfg.topology.roc_thresholds, mo.count_self_loops);
    if (roc.defined) rep.auroc = roc.auroc;
    r.score = rep;
    r.roc = roc;
  } catch (const Error& e) {
    throw with_stage("scoring", e);
  }
  r.timing.emplace_back("score", seconds_since(t0));
}

}  // namespace

IdentifyResult run_identify(const ExperimentConfig& cfg, const SnapshotDataset& ds, const NetworkModel* truth) {
  cfg.validate();
  ds.validate();
  IdentifyResult r;
  r.method = "two_step";
  run_dual(cfg, ds, r);

  auto t0 = std::chrono::steady_clock::now();
  try {
    r.node_functions = center_node_functions(node_function_set(cfg, ds.node_dims, ds.num_inputs()), ds);
    const DesignMatrix design = build_design_matrix(ds, r.node_functions);
    const WeightEstimate w = estimate_weights(r.f_hat, ds.node_dims, ds.num_inputs(), design, weight_options(cfg));
    r.lambda = w.lambda;
    r.delta = w.delta;
    for (const auto& s : w.warnings) r.warnings.push_back("topology stage: " + s);
    r.topology = threshold_topology(r.lambda, r.delta, cfg.topology.threshold, cfg.topology.input_threshold);
  } catch (const Error& e) {
    throw with_stage("topology stage", e);
  }
  r.timing.emplace_back("topology", seconds_since(t0));

  t0 = std::chrono::steady_clock::now();
  LocalOptions lo;
  lo.tol.rcond = cfg.local.rcond;
  lo.zoh = cfg.local.zoh;
  try {
    r.dictionary = local_dictionary(cfg, ds.node_dims, ds.num_inputs());
    LocalRun run = identify_local(ds, r.topology, r.dictionary, lo);
    r.local_models = std::move(run.models);
    r.params = std::move(run.params);
    r.node_failures.resize(run.failures.size());
    for (std::size_t i = 0; i < run.failures.size(); ++i) {
      if (!run.failures[i].empty()) r.node_failures[i] = "local stage, node " + std::to_string(i) + ": " + run.failures[i];
    }
    for (const auto& m : r.local_models)
      for (const auto& w : m.warnings) r.warnings.push_back("local stage, node " + std::to_string(m.node) + ": " + w);
  } catch (const Error& e) {
    throw with_stage("local stage", e);
  }
  r.timing.emplace_back("local", seconds_since(t0));

  if (cfg.local.assemble_global) {
    t0 = std::chrono::steady_clock::now();
    if (r.partial()) {
      r.warnings.push_back("global assembly skipped: some nodes failed");
    } else {
      try {
        r.global = assemble_global(ds, r.local_models, r.dictionary, lo);
      } catch (const Error& e) {
        r.warnings.push_back(std::string("global assembly: ") + e.what());
      }
    }
    r.timing.emplace_back("assembly", seconds_since(t0));
  }
  score_into(cfg, truth, ds, r);
  return r;
}

IdentifyResult run_baseline_dual(const ExperimentConfig& cfg, const SnapshotDataset& ds, const NetworkModel* truth) {
  cfg.validate();
  ds.validate();
  IdentifyResult r;
  r.method = "dual_baseline";
  run_dual(cfg, ds, r);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.dictionary = local_dictionary(cfg, ds.node_dims, ds.num_inputs());
    BaselineResult b = baseline_dual(ds, r.f_hat, r.dictionary, weight_options(cfg));
    r.lambda = b.lambda;
    r.delta = b.delta;
    r.params = std::move(b.params);
    for (const auto& s : b.warnings) r.warnings.push_back("global regression: " + s);
    r.topology = threshold_topology(r.lambda, r.delta, cfg.topology.threshold, cfg.topology.input_threshold);
  } catch (const Error& e) {
    throw with_stage("global regression", e);
  }
  r.node_failures.assign(static_cast<std::size_t>(ds.num_nodes()), std::string());
  r.timing.emplace_back("regression", seconds_since(t0));
  score_into(cfg, truth, ds, r);
  return r;
}

std::string parameters_csv(const ParameterEstimate& p) {
  std::ostringstream os;
  os << "node,source,index,function,component,value\n";
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    for (const auto& t : p.nodes[i].terms) {
      const std::string src = t.source.kind == BlockKind::Node ? "x" : "u";
      const std::string fn = csv_field(t.fn.text());
      for (std::size_t c = 0; c < t.coef.size(); ++c) {
        os << i << ',' << src << ',' << t.source.index << ',' << fn << ',' << c << ',' << format_full(t.coef[c]) << '\n';
      }
    }
  }
  return os.str();
}

ParameterEstimate parse_parameters_csv(const std::string& text, const std::vector<int>& node_dims) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "node,source,index,function,component,value") {
    throw ParseError("parameters.csv: missing or unexpected header");
  }
  ParameterEstimate p;
  for (int d : node_dims) p.nodes.push_back(NodeModel{d, {}});
  const int n = static_cast<int>(node_dims.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::string at = "parameters.csv:" + std::to_string(r + 1);
    const auto f = split_csv_line(lines[r], at);
    if (f.size() != 6) throw ParseError(at + ": expected 6 fields");
    const int node = parse_int(f[0], at);
    if (node < 0 || node >= n) throw ValidationError(at + ": node index out of range");
    if (f[1] != "x" && f[1] != "u") throw ParseError(at + ": source must be x or u");
    const BlockRef src{f[1] == "x" ? BlockKind::Node : BlockKind::Input, parse_int(f[2], at)};
    ScalarFunction fn;
    try {
      fn = ScalarFunction::parse(f[3]);
    } catch (const Error& e) {
      throw ParseError(at + ": " + e.what());
    }
    const int comp = parse_int(f[4], at);
    const int dim = node_dims[static_cast<std::size_t>(node)];
    if (comp < 0 || comp >= dim) throw ValidationError(at + ": component out of range");
    std::vector<double> coef(static_cast<std::size_t>(dim), 0.0);
    coef[static_cast<std::size_t>(comp)] = parse_double(f[5], at);
    auto& terms = p.nodes[static_cast<std::size_t>(node)].terms;
    auto it = std::find_if(terms.begin(), terms.end(),
                           [&](const Term& t) { return t.source == src && t.fn == fn; });
    if (it == terms.end()) {
      terms.push_back({src, fn, coef});
    } else {
      it->coef[static_cast<std::size_t>(comp)] += coef[static_cast<std::size_t>(comp)];
    }
  }
  return p;
}

void write_identify(const IdentifyResult& r, const ExperimentConfig& cfg, const std::string& dataset_dir,
                    const std::string& out_dir) {
  make_dir(out_dir);
  const fs::path d(out_dir);
  std::vector<std::string> outputs;
  auto put = [&](const std::string& name, const std::string& text) {
    write_file(d / name, text);
    outputs.push_back(name);
  };

  put("vector_field.csv", dense_csv(r.f_hat, "sample", "x"));
  put("lambda.csv", dense_csv(r.lambda, "node", "x"));
  put("delta.csv", dense_csv(r.delta, "node", "u"));
  ojson topo;
  topo["threshold"] = r.topology.threshold;
  topo["input_threshold"] = r.topology.input_threshold;
  topo["neighbors"] = sets_json(r.topology.neighbors);
  topo["inputs"] = sets_json(r.topology.inputs);
  put("topology.json", topo.dump(2) + "\n");
  put("parameters.csv", parameters_csv(r.params));
  if (!r.gamma_grid.empty()) {
    std::ostringstream os;
    os << "gamma,koopman_error,failure\n";
    for (std::size_t i = 0; i < r.gamma_grid.size(); ++i) {
      os << format_full(r.gamma_grid[i]) << ',' << format_full(r.selection.scores[i]) << ','
         << csv_field(r.selection.failures[i]) << '\n';
    }
    put("gamma_scores.csv", os.str());
  }
  if (r.global) {
    put("global_A.csv", triplet_csv(r.global->a));
    put("global_B.csv", triplet_csv(r.global->b));
    std::ostringstream os;
    os << "space,index,name\n";
    for (std::size_t i = 0; i < r.global->z_names.size(); ++i) os << "z," << i << ',' << csv_field(r.global->z_names[i]) << '\n';
    for (std::size_t i = 0; i < r.global->v_names.size(); ++i) os << "v," << i << ',' << csv_field(r.global->v_names[i]) << '\n';
    put("global_index.csv", os.str());
  }
  if (r.score) {
    put("score.csv", score_csv_header() + "\n" + score_csv_row(*r.score) + "\n");
    put("score.txt", score_text(*r.score));
    put("eps.csv", eps_csv(*r.score));
  }
  if (r.roc) put("roc.csv", roc_csv(*r.roc));

  std::ostringstream tm;
  tm << "stage,seconds\n";
  for (const auto& [stage, s] : r.timing) tm << stage << ',' << format_full(s) << '\n';
  write_file(d / "timing.csv", tm.str());

  ojson m;
  m["format"] = "netkoop-run/1";
  m["method"] = r.method;
  m["version"] = kVersion;
  m["config"] = ojson::parse(cfg.to_json());
  m["dataset"] = dataset_dir;
  m["seeds"] = {{"model", cfg.model.seed}, {"data", cfg.data.seed}};
  m["dual"] = {{"gamma", r.gamma},
               {"test_set", r.test_set_id},
               {"samples", r.dual.samples},
               {"tests", r.dual.tests},
               {"px_rank", r.dual.px_rank},
               {"px_sigma_max", r.dual.px_sigma_max},
               {"px_sigma_min_kept", r.dual.px_sigma_min_kept},
               {"compressed_log", r.dual.compressed},
               {"spectral_margin", r.dual.spectral_margin},
               {"log_residual", r.dual.log_residual}};
  m["warnings"] = r.warnings;
  ojson fails = ojson::array();
  for (std::size_t i = 0; i < r.node_failures.size(); ++i)
    if (!r.node_failures[i].empty()) fails.push_back({{"node", i}, {"error", r.node_failures[i]}});
  m["node_failures"] = fails;
  m["partial"] = r.partial();
  m["scored"] = r.score.has_value();
  if (!r.score) m["notice"] = "no ground-truth model next to the dataset; scoring skipped";
  m["outputs"] = outputs;
  write_file(d / "manifest.json", m.dump(2) + "\n");
}

namespace {

void apply_axis(ExperimentConfig& c, const std::string& axis, double v) {
  if (axis == "K") c.data.samples = static_cast<int>(v);
  else if (axis == "N") c.model.nodes = static_cast<int>(v);
  else if (axis == "sigma") c.data.noise = v;
  else if (axis == "edge_prob") c.model.edge_prob = v;
  else if (axis == "ts") c.data.ts = v;
  else if (axis == "threshold") c.topology.threshold = v;
  else if (axis == "gamma") c.dual.gamma = v;
}

double quantile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.sweep) throw ValidationError("sweep: no sweep section in the config");
  const auto& sw = *cfg.sweep;
  SweepResult res;
  for (double v : sw.values) {
    ExperimentConfig point = cfg;
    apply_axis(point, sw.axis, v);
    try {
      point.validate();
    } catch (const Error& e) {
      throw ValidationError("sweep value " + format_short(v) + ": " + e.what());
    }
    for (int rep = 0; rep < sw.repeats; ++rep) {
      const ExperimentConfig c = point.with_repeat(rep);
      std::vector<std::string> methods = {"two_step"};
      if (sw.baseline) methods.push_back("dual_baseline");
      std::optional<NetworkModel> model;
      std::optional<SnapshotDataset> ds;
      std::string setup_error;
      try {
        model = build_model(c);
        ds = build_dataset(c, *model);
      } catch (const Error& e) {
        setup_error = std::string("simulation: ") + e.what();
      }
      for (const auto& method : methods) {
        SweepRow row;
        row.value = v;
        row.repeat = rep;
        row.method = method;
        const auto t0 = std::chrono::steady_clock::now();
        if (!setup_error.empty()) {
          row.error = setup_error;
        } else {
          try {
            const IdentifyResult r =
                method == "two_step" ? run_identify(c, *ds, &*model) : run_baseline_dual(c, *ds, &*model);
            row.score = r.score;
            if (r.partial()) row.error = "partial: some nodes failed";
          } catch (const Error& e) {
            row.error = e.what();
          }
        }
        row.seconds = seconds_since(t0);
        res.rows.push_back(std::move(row));
      }
    }
  }
  return res;
}

void write_sweep(const SweepResult& r, const ExperimentConfig& cfg, const std::string& out_dir) {
  make_dir(out_dir);
  const fs::path d(out_dir);
  const std::string axis = cfg.sweep ? cfg.sweep->axis : "";
  const std::string nan_row = "nan,nan,nan,nan,nan,nan,nan,nan,nan,0,0,0,0";
  {
    std::ostringstream os;
    os << "value,repeat,model_seed,data_seed,method," << score_csv_header() << ",error\n";
    for (const auto& row : r.rows) {
      os << format_full(row.value) << ',' << row.repeat << ',' << cfg.model.seed + static_cast<std::uint64_t>(row.repeat)
         << ',' << cfg.data.seed + static_cast<std::uint64_t>(row.repeat) << ',' << row.method << ','
         << (row.score ? score_csv_row(*row.score) : nan_row) << ',' << csv_field(row.error) << '\n';
    }
    write_file(d / "sweep.csv", os.str());
  }
  {
    // Medians and quartiles per (value, method), in first-seen order.
    std::vector<std::pair<double, std::string>> keys;
    for (const auto& row : r.rows) {
      const auto k = std::make_pair(row.value, row.method);
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    std::ostringstream os;
    os << "value,method,runs,failed";
    const std::vector<std::string> metrics = {"rmse", "me", "tpr", "fpr", "auroc"};
    for (const auto& m : metrics) os << ',' << m << "_median," << m << "_q1," << m << "_q3";
    os << '\n';
    for (const auto& [value, method] : keys) {
      std::map<std::string, std::vector<double>> vals;
      int runs = 0, failed = 0;
      for (const auto& row : r.rows) {
        if (row.value != value || row.method != method) continue;
        ++runs;
        if (!row.score) {
          ++failed;
          continue;
        }
        if (!row.error.empty()) ++failed;
        vals["rmse"].push_back(row.score->rmse);
        vals["me"].push_back(row.score->me);
        vals["tpr"].push_back(row.score->tpr);
        vals["fpr"].push_back(row.score->fpr);
        vals["auroc"].push_back(row.score->auroc.value_or(std::numeric_limits<double>::quiet_NaN()));
      }
      os << format_full(value) << ',' << method << ',' << runs << ',' << failed;
      for (const auto& m : metrics) {
        const auto& v = vals[m];
        os << ',' << format_full(quantile(v, 0.5)) << ',' << format_full(quantile(v, 0.25)) << ','
           << format_full(quantile(v, 0.75));
      }
      os << '\n';
    }
    write_file(d / "summary.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "value,repeat,method,seconds\n";
    for (const auto& row : r.rows)
      os << format_full(row.value) << ',' << row.repeat << ',' << row.method << ',' << format_full(row.seconds) << '\n';
    write_file(d / "timing.csv", os.str());
  }
  ojson m;
  m["format"] = "netkoop-sweep/1";
  m["version"] = kVersion;
  m["axis"] = axis;
  m["config"] = ojson::parse(cfg.to_json());
  m["outputs"] = {"sweep.csv", "summary.csv"};
  write_file(d / "manifest.json", m.dump(2) + "\n");
}

void write_simulation(const ExperimentConfig& cfg, const NetworkModel& model, const SnapshotDataset& ds,
                      const std::string& out_dir) {
  make_dir(out_dir);
  save_dataset(ds, out_dir);
  write_file(fs::path(out_dir) / "model.json", model.to_json());
  ojson m;
  m["format"] = "netkoop-simulation/1";
  m["version"] = kVersion;
  m["config"] = ojson::parse(cfg.to_json());
  m["seeds"] = {{"model", cfg.model.seed}, {"data", cfg.data.seed}};
  m["model_hash"] = model.hash();
  write_file(fs::path(out_dir) / "experiment.json", m.dump(2) + "\n");
}

std::optional<NetworkModel> load_truth(const std::string& dataset_dir, const std::string& expected_hash) {
  const fs::path p = fs::path(dataset_dir) / "model.json";
  if (!fs::exists(p)) return std::nullopt;
  NetworkModel m = NetworkModel::from_json(read_file(p.string()));
  if (!expected_hash.empty() && m.hash() != expected_hash) {
    throw ValidationError(p.string() + ": model hash " + m.hash() + " does not match the dataset's " + expected_hash);
  }
  return m;
}

RunScore score_run_dir(const std::string& run_dir, const NetworkModel& truth, const MetricsConfig& opts,
                       const std::vector<double>& roc_thresholds) {
  const fs::path d(run_dir);
  const ParameterEstimate params = parse_parameters_csv(read_file((d / "parameters.csv").string()), truth.node_dims);
  json topo;
  try {
    topo = json::parse(read_file((d / "topology.json").string()));
  } catch (const json::exception& e) {
    throw ParseError(std::string("topology.json: ") + e.what());
  }
  std::vector<std::vector<int>> neighbors;
  try {
    neighbors = topo.at("neighbors").get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("topology.json: ") + e.what());
  }
  if (static_cast<int>(neighbors.size()) != truth.num_nodes()) {
    throw ScoringError("topology.json lists " + std::to_string(neighbors.size()) + " nodes, truth has " +
                       std::to_string(truth.num_nodes()));
  }
  MetricOptions mo;
  mo.paper_strict = opts.paper_strict;
  mo.count_self_loops = opts.count_self_loops;
  RunScore s;
  s.report = score_run(truth, neighbors, params, mo);
  if (fs::exists(d / "lambda.csv")) {
    const Matrix lambda = parse_dense_csv(read_file((d / "lambda.csv").string()), "lambda.csv");
    if (lambda.rows() != truth.num_nodes() || lambda.cols() != truth.num_nodes()) {
      throw ScoringError("lambda.csv shape does not match the truth");
    }
    s.roc = roc_thresholds.empty() ? roc_exact(lambda, truth, mo.count_self_loops)
                                   : roc_sweep(lambda, truth, roc_thresholds, mo.count_self_loops);
    if (s.roc->defined) s.report.auroc = s.roc->auroc;
  }
  return s;
}

void write_score(const RunScore& s, const std::string& out_dir) {
  make_dir(out_dir);
  const fs::path d(out_dir);
  write_file(d / "score.csv", score_csv_header() + "\n" + score_csv_row(s.report) + "\n");
  write_file(d / "score.txt", score_text(s.report));
  write_file(d / "eps.csv", eps_csv(s.report));
  if (s.roc) write_file(d / "roc.csv", roc_csv(*s.roc));
}

std::string library_version() { return kVersion; }

}  // namespace netkoop
