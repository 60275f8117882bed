#include "netkoop/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "netkoop/errors.hpp"
#include "netkoop/random.hpp"

namespace netkoop {

using nlohmann::json;

namespace {

std::vector<int> prefix_offsets(const std::vector<int>& dims) {
  std::vector<int> off(dims.size());
  int acc = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    off[i] = acc;
    acc += dims[i];
  }
  return off;
}

bool nonzero(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [](double c) { return c != 0.0; });
}

double signed_magnitude(RandomStream& rng, double lo, double hi) {
  const double mag = rng.uniform(lo, hi);
  return rng.bernoulli(0.5) ? mag : -mag;
}

}  // namespace

int NetworkModel::state_dim() const {
  int s = 0;
  for (int d : node_dims) s += d;
  return s;
}

int NetworkModel::input_dim() const {
  int s = 0;
  for (int d : input_dims) s += d;
  return s;
}

std::vector<int> NetworkModel::node_offsets() const { return prefix_offsets(node_dims); }
std::vector<int> NetworkModel::input_offsets() const { return prefix_offsets(input_dims); }

std::vector<int> NetworkModel::neighbors(int i, bool include_self) const {
  std::set<int> out;
  for (const auto& t : nodes.at(static_cast<std::size_t>(i)).terms) {
    if (t.source.kind != BlockKind::Node || !nonzero(t.coef)) continue;
    if (t.source.index == i && !include_self) continue;
    out.insert(t.source.index);
  }
  return {out.begin(), out.end()};
}

std::vector<int> NetworkModel::inputs_of(int i) const {
  std::set<int> out;
  for (const auto& t : nodes.at(static_cast<std::size_t>(i)).terms) {
    if (t.source.kind == BlockKind::Input && nonzero(t.coef)) out.insert(t.source.index);
  }
  return {out.begin(), out.end()};
}

int NetworkModel::edge_count(bool include_self) const {
  int e = 0;
  for (int i = 0; i < num_nodes(); ++i) e += static_cast<int>(neighbors(i, include_self).size());
  return e;
}

void NetworkModel::add_term(int node, BlockRef source, const ScalarFunction& fn, const std::vector<double>& coef) {
  auto& terms = nodes.at(static_cast<std::size_t>(node)).terms;
  const std::string key = fn.text();
  for (auto& t : terms) {
    if (t.source == source && t.fn.text() == key) {
      for (std::size_t c = 0; c < coef.size(); ++c) t.coef[c] += coef[c];
      return;
    }
  }
  terms.push_back(Term{source, fn, coef});
}

void NetworkModel::validate() const {
  if (nodes.size() != node_dims.size()) throw ValidationError("model: node_dims and nodes differ in length");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& nd = nodes[i];
    if (nd.dim != node_dims[i] || nd.dim < 1) {
      throw ValidationError("model: node " + std::to_string(i) + " has inconsistent dimension");
    }
    for (const auto& t : nd.terms) {
      if (static_cast<int>(t.coef.size()) != nd.dim) {
        throw ValidationError("model: node " + std::to_string(i) + " term " + t.fn.text() +
                              " has a coefficient vector of the wrong length");
      }
      const auto& dims = t.source.kind == BlockKind::Node ? node_dims : input_dims;
      if (t.source.index < 0 || t.source.index >= static_cast<int>(dims.size())) {
        throw ValidationError("model: node " + std::to_string(i) + " references a missing block");
      }
      const int bd = dims[static_cast<std::size_t>(t.source.index)];
      const bool ok = t.fn.exact_dim() ? t.fn.min_input_dim() == bd : t.fn.min_input_dim() <= bd;
      if (!ok) throw ValidationError("model: function " + t.fn.text() + " does not fit its source block");
      for (double c : t.coef) {
        if (!std::isfinite(c)) throw ValidationError("model: non-finite coefficient at node " + std::to_string(i));
      }
    }
  }
  for (int d : input_dims) {
    if (d < 1) throw ValidationError("model: input dimensions must be positive");
  }
}

std::string NetworkModel::to_json() const {
  json j;
  j["format"] = "netkoop-model/1";
  j["family"] = family;
  j["seed"] = seed;
  j["node_dims"] = node_dims;
  j["input_dims"] = input_dims;
  json notes_j = json::object();
  for (const auto& [k, v] : notes) notes_j[k] = v;
  j["notes"] = notes_j;
  json nodes_j = json::array();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    json terms = json::array();
    for (const auto& t : nodes[i].terms) {
      terms.push_back({{"source", t.source.kind == BlockKind::Node ? "x" : "u"},
                       {"index", t.source.index},
                       {"fn", t.fn.text()},
                       {"coef", t.coef}});
    }
    nodes_j.push_back({{"dim", nodes[i].dim}, {"terms", terms}});
  }
  j["nodes"] = nodes_j;
  json edges = json::array();
  for (int i = 0; i < num_nodes(); ++i)
    for (int k : neighbors(i, true)) edges.push_back({k, i});
  j["edges"] = edges;
  return j.dump(1);
}

NetworkModel NetworkModel::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model manifest: ") + e.what());
  }
  NetworkModel m;
  try {
    if (j.at("format") != "netkoop-model/1") throw ValidationError("model manifest: unsupported format");
    m.family = j.at("family").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.node_dims = j.at("node_dims").get<std::vector<int>>();
    m.input_dims = j.at("input_dims").get<std::vector<int>>();
    for (const auto& [k, v] : j.at("notes").items()) m.notes.emplace_back(k, v.get<std::string>());
    for (const auto& nj : j.at("nodes")) {
      NodeModel nd;
      nd.dim = nj.at("dim").get<int>();
      for (const auto& tj : nj.at("terms")) {
        Term t;
        const std::string src = tj.at("source").get<std::string>();
        if (src != "x" && src != "u") throw ValidationError("model manifest: term source must be x or u");
        t.source = {src == "x" ? BlockKind::Node : BlockKind::Input, tj.at("index").get<int>()};
        t.fn = ScalarFunction::parse(tj.at("fn").get<std::string>());
        t.coef = tj.at("coef").get<std::vector<double>>();
        nd.terms.push_back(std::move(t));
      }
      m.nodes.push_back(std::move(nd));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model manifest: ") + e.what());
  }
  m.validate();
  return m;
}

std::string NetworkModel::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(to_json())));
  return buf;
}

std::vector<Edge> generate_graph(const GraphSpec& spec, int n) {
  if (n < 1) throw ArgumentError("graph: node count must be positive");
  std::vector<Edge> edges;
  switch (spec.kind) {
    case GraphKind::ErdosRenyi: {
      if (!(spec.edge_prob >= 0.0 && spec.edge_prob <= 1.0)) throw ArgumentError("graph: edge_prob must lie in [0,1]");
      for (int i = 0; i < n; ++i) {
        RandomStream rng(spec.seed, "er_edges", static_cast<std::uint64_t>(i));
        for (int k = 0; k < n; ++k) {
          const bool present = rng.bernoulli(spec.edge_prob);
          if (!present || (k == i && !spec.allow_self_loops)) continue;
          if (!spec.directed && k > i) continue;
          edges.push_back({k, i});
          if (!spec.directed && k != i) edges.push_back({i, k});
        }
      }
      break;
    }
    case GraphKind::WattsStrogatz: {
      if (!(spec.rewire_prob >= 0.0 && spec.rewire_prob <= 1.0)) {
        throw ArgumentError("graph: rewire_prob must lie in [0,1]");
      }
      if (spec.mean_degree < 0 || n < spec.mean_degree + 1) {
        throw ArgumentError("graph: Watts-Strogatz needs n >= mean_degree + 1");
      }
      const int half = spec.mean_degree / 2;
      std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        for (int j = 1; j <= half; ++j) {
          const int k = (i + j) % n;
          adj[static_cast<std::size_t>(i)].insert(k);
          adj[static_cast<std::size_t>(k)].insert(i);
        }
      }
      RandomStream rng(spec.seed, "ws_rewire");
      for (int j = 1; j <= half; ++j) {
        for (int i = 0; i < n; ++i) {
          const int k = (i + j) % n;
          if (!rng.bernoulli(spec.rewire_prob)) continue;
          auto& ai = adj[static_cast<std::size_t>(i)];
          if (!ai.count(k)) continue;  // already rewired away
          if (static_cast<int>(ai.size()) >= n - 1) continue;  // no free endpoint
          int w = rng.uniform_int(0, n - 1);
          while (w == i || ai.count(w)) w = rng.uniform_int(0, n - 1);
          ai.erase(k);
          adj[static_cast<std::size_t>(k)].erase(i);
          ai.insert(w);
          adj[static_cast<std::size_t>(w)].insert(i);
        }
      }
      for (int i = 0; i < n; ++i)
        for (int k : adj[static_cast<std::size_t>(i)]) edges.push_back({k, i});
      break;
    }
    case GraphKind::Explicit: {
      std::set<std::pair<int, int>> seen;
      for (const auto& e : spec.edges) {
        if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n) {
          throw ArgumentError("graph: explicit edge references a missing node");
        }
        if (!seen.insert({e.target, e.source}).second) throw ArgumentError("graph: duplicate explicit edge");
        edges.push_back(e);
        if (!spec.directed && e.source != e.target) {
          if (seen.insert({e.source, e.target}).second) edges.push_back({e.target, e.source});
        }
      }
      break;
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.target != b.target ? a.target < b.target : a.source < b.source;
  });
  return edges;
}

NetworkModel gen_erdos_renyi_poly(int n, double edge_prob, std::uint64_t seed, const PolyNetworkOptions& opts) {
  if (n < 1) throw ArgumentError("erdos_renyi_poly: N must be >= 1");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ArgumentError("erdos_renyi_poly: edge_prob must lie in [0,1]");
  if (!(opts.coef_lo > 0.0 && opts.coef_hi >= opts.coef_lo)) throw ArgumentError("erdos_renyi_poly: bad coefficient range");
  if (opts.inputs < 0) throw ArgumentError("erdos_renyi_poly: input count must be nonnegative");
  NetworkModel m;
  m.family = "erdos_renyi_poly";
  m.seed = seed;
  m.node_dims.assign(static_cast<std::size_t>(n), 1);
  m.input_dims.assign(static_cast<std::size_t>(opts.inputs), 1);
  m.nodes.assign(static_cast<std::size_t>(n), NodeModel{1, {}});
  m.notes = {{"coefficients", "uniform on [-" + std::to_string(opts.coef_hi) + ",-" + std::to_string(opts.coef_lo) +
                                   "] U [" + std::to_string(opts.coef_lo) + "," + std::to_string(opts.coef_hi) + "]"},
             {"self_loops", "self edges are stored as local terms"}};

  GraphSpec g;
  g.kind = GraphKind::ErdosRenyi;
  g.edge_prob = edge_prob;
  g.seed = seed;
  for (const auto& e : generate_graph(g, n)) {
    RandomStream rng(seed, "er_coupling", static_cast<std::uint64_t>(e.target) * static_cast<std::uint64_t>(n) +
                                              static_cast<std::uint64_t>(e.source));
    const int degree = rng.uniform_int(1, 3);
    m.add_term(e.target, {BlockKind::Node, e.source}, ScalarFunction::monomial(degree),
               {signed_magnitude(rng, opts.coef_lo, opts.coef_hi)});
  }
  for (int i = 0; i < n; ++i) {
    RandomStream rng(seed, "er_inputs", static_cast<std::uint64_t>(i));
    for (int k = 0; k < opts.inputs; ++k) {
      RandomStream link = rng.child("input", static_cast<std::uint64_t>(k));
      if (!link.bernoulli(edge_prob)) continue;
      const int degree = link.uniform_int(1, 2);
      m.add_term(i, {BlockKind::Input, k}, ScalarFunction::monomial(degree),
                 {signed_magnitude(link, opts.coef_lo, opts.coef_hi)});
    }
  }
  m.validate();
  return m;
}

NetworkModel gen_nonpoly_network(int n, std::uint64_t seed) {
  if (n < 4 || n % 4 != 0) throw ArgumentError("nonpoly network: N must be a positive multiple of 4");
  NetworkModel m;
  m.family = "nonpoly";
  m.seed = seed;
  m.node_dims.assign(static_cast<std::size_t>(n), 1);
  m.input_dims.assign(4, 1);
  m.nodes.assign(static_cast<std::size_t>(n), NodeModel{1, {}});
  m.notes = {{"index_convention", "1-based node labels; (a mod n) == 0 maps to n; stored indices are label-1"},
             {"random_neighbor", "t_i uniform on {1..n}"}};

  // 1-based label -> stored 0-based index
  auto wrap = [n](long long label) {
    long long r = ((label % n) + n) % n;
    if (r == 0) r = n;
    return static_cast<int>(r - 1);
  };
  const auto x = [](int d) { return ScalarFunction::monomial(d); };
  const auto sin1 = ScalarFunction::sine();
  const auto exp1 = ScalarFunction::exponential();
  const auto node = [](int k) { return BlockRef{BlockKind::Node, k}; };
  const auto input = [](int k) { return BlockRef{BlockKind::Input, k}; };

  for (int label = 1; label <= n; ++label) {
    const int i = label - 1;
    RandomStream rng(seed, "nonpoly_extra", static_cast<std::uint64_t>(i));
    const int t = rng.uniform_int(1, n) - 1;
    switch ((label - 1) % 4) {
      case 0:
        m.add_term(i, node(i), x(2), {-0.5});
        m.add_term(i, node(wrap(47LL * label)), x(1), {-0.5});
        m.add_term(i, node(wrap(label + 1)), x(1), {0.7});
        m.add_term(i, node(t), sin1, {-0.5});
        m.add_term(i, input(0), x(1), {1.4});
        break;
      case 1:
        m.add_term(i, node(i), x(1), {-0.5});
        m.add_term(i, node(wrap(label - 1)), x(2), {0.7});
        m.add_term(i, node(wrap(23LL * label)), x(3), {0.7});
        m.add_term(i, node(t), exp1, {0.7});
        m.add_term(i, input(3), x(2), {1.4});
        break;
      case 2:
        m.add_term(i, node(i), x(1), {-0.5});
        m.add_term(i, node(wrap(label + 1)), x(2), {0.7});
        m.add_term(i, node(wrap(67LL * label)), x(1), {-0.5});
        m.add_term(i, node(t), exp1, {0.5});
        m.add_term(i, input(1), x(2), {1.4});
        break;
      default:
        m.add_term(i, node(i), x(2), {-0.5});
        m.add_term(i, node(wrap(label - 1)), x(2), {-0.5});
        m.add_term(i, node(wrap(11LL * label)), x(3), {0.7});
        m.add_term(i, node(t), sin1, {-0.5});
        m.add_term(i, input(2), x(2), {1.4});
        break;
    }
  }
  m.validate();
  return m;
}

NetworkModel gen_hindmarsh_rose(int n, int mean_degree, double rewire_prob, std::uint64_t seed,
                                 const HindmarshRoseOptions& opts) {
  if (n < mean_degree + 1) throw ArgumentError("hindmarsh_rose: N must be >= mean_degree + 1");
  if (!(opts.tau > 0.0)) throw ArgumentError("hindmarsh_rose: tau must be positive");
  static constexpr double kA[] = {1.0, 1.25, 1.5, 1.75, 2.0};
  static constexpr double kB[] = {2.0, 2.75, 3.5, 4.25, 5.0};
  static constexpr double kD[] = {-3.0, -3.5, -4.0, -4.5, -5.0};
  static constexpr double kS[] = {8.0, 11.0, 14.0, 17.0, 20.0};
  static constexpr double kE[] = {-4.0, -2.0, 0.0, 2.0, 4.0};
  static constexpr double kTheta[] = {-0.5, -1.0, -1.5};

  NetworkModel m;
  m.family = "hindmarsh_rose";
  m.seed = seed;
  m.node_dims.assign(static_cast<std::size_t>(n), 3);
  m.nodes.assign(static_cast<std::size_t>(n), NodeModel{3, {}});
  m.notes = {{"state", "x[0]=x, x[1]=y, x[2]=z"},
             {"c", std::to_string(opts.c)},
             {"tau", std::to_string(opts.tau)}};

  const double tau = opts.tau;
  for (int i = 0; i < n; ++i) {
    RandomStream rng(seed, "hr_params", static_cast<std::uint64_t>(i));
    const double a = kA[rng.uniform_int(0, 4)];
    const double b = kB[rng.uniform_int(0, 4)];
    const double d = kD[rng.uniform_int(0, 4)];
    const double s = kS[rng.uniform_int(0, 4)];
    const double e = kE[rng.uniform_int(0, 4)];
    const BlockRef self{BlockKind::Node, i};
    // x' = y - b x^2 + a x^3 - z + C,  y' = c - d x^2 - y,  z' = (s (x - e) - z) / tau
    m.add_term(i, self, ScalarFunction::coordinate(0), {0.0, 0.0, s / tau});
    m.add_term(i, self, ScalarFunction::coordinate(1), {1.0, -1.0, 0.0});
    m.add_term(i, self, ScalarFunction::coordinate(2), {-1.0, 0.0, -1.0 / tau});
    m.add_term(i, self, ScalarFunction::monomial(2, 0), {-b, -d, 0.0});
    m.add_term(i, self, ScalarFunction::monomial(3, 0), {a, 0.0, 0.0});
    m.add_term(i, self, ScalarFunction::constant(1.0), {0.0, opts.c, -s * e / tau});
  }

  GraphSpec g;
  g.kind = GraphKind::WattsStrogatz;
  g.mean_degree = mean_degree;
  g.rewire_prob = rewire_prob;
  g.directed = false;
  g.seed = seed;
  for (const auto& edge : generate_graph(g, n)) {
    RandomStream rng(seed, "hr_theta", static_cast<std::uint64_t>(edge.target) * static_cast<std::uint64_t>(n) +
                                           static_cast<std::uint64_t>(edge.source));
    const double theta = kTheta[rng.uniform_int(0, 2)];
    m.add_term(edge.target, {BlockKind::Node, edge.source}, ScalarFunction::sigmoid(opts.nu, theta, 1.0, 0),
               {4.0, 0.0, 0.0});
  }
  m.validate();
  return m;
}

Vector eval_vector_field(const NetworkModel& model, const Vector& x, const Vector& u) {
  if (x.size() != model.state_dim() || u.size() != model.input_dim()) {
    throw ArgumentError("eval_vector_field: state/input dimensions do not match the model");
  }
  const auto noff = model.node_offsets();
  const auto ioff = model.input_offsets();
  Vector out = Vector::Zero(x.size());
  for (int i = 0; i < model.num_nodes(); ++i) {
    const auto& nd = model.nodes[static_cast<std::size_t>(i)];
    const int oi = noff[static_cast<std::size_t>(i)];
    for (const auto& t : nd.terms) {
      const std::size_t k = static_cast<std::size_t>(t.source.index);
      const double v = t.source.kind == BlockKind::Node
                           ? t.fn(std::span<const double>(x.data() + noff[k], static_cast<std::size_t>(model.node_dims[k])))
                           : t.fn(std::span<const double>(u.data() + ioff[k], static_cast<std::size_t>(model.input_dims[k])));
      for (int c = 0; c < nd.dim; ++c) out(oi + c) += t.coef[static_cast<std::size_t>(c)] * v;
    }
    for (int c = 0; c < nd.dim; ++c) {
      if (!std::isfinite(out(oi + c))) {
        throw NumericalError("eval_vector_field: non-finite derivative at node " + std::to_string(i));
      }
    }
  }
  return out;
}

}  // namespace netkoop
