#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "netkoop/dictionary.hpp"
#include "netkoop/numerics.hpp"

namespace netkoop {

enum class BlockKind { Node, Input };

struct BlockRef {
  BlockKind kind = BlockKind::Node;
  int index = 0;

  friend bool operator==(const BlockRef&, const BlockRef&) = default;
};

/// coef * fn(source block); coef has one entry per component of the owning node.
struct Term {
  BlockRef source;
  ScalarFunction fn;
  std::vector<double> coef;
};

/// Right-hand side of one node: local terms have source == the node itself.
struct NodeModel {
  int dim = 1;
  std::vector<Term> terms;
};

/// Ground-truth network x_i' = F_i(x_i) + sum G_ik(u_k) + sum H_ik(x_k), every
/// piece written as coefficient vectors on dictionary functions.
struct NetworkModel {
  std::string family;
  std::uint64_t seed = 0;
  std::vector<int> node_dims;
  std::vector<int> input_dims;
  std::vector<NodeModel> nodes;
  std::vector<std::pair<std::string, std::string>> notes;  // free-form provenance (index convention, ...)

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_inputs() const { return static_cast<int>(input_dims.size()); }
  int state_dim() const;
  int input_dim() const;
  std::vector<int> node_offsets() const;
  std::vector<int> input_offsets() const;

  /// Source nodes with a coupling term on node i, ascending. The node itself
  /// is listed only when include_self is set and F_i has a nonzero term.
  std::vector<int> neighbors(int i, bool include_self = false) const;
  std::vector<int> inputs_of(int i) const;
  int edge_count(bool include_self = false) const;

  /// Adds coef to an existing (source, fn) term or appends a new one.
  void add_term(int node, BlockRef source, const ScalarFunction& fn, const std::vector<double>& coef);

  /// Throws ValidationError on inconsistent shapes or references.
  void validate() const;

  std::string to_json() const;
  static NetworkModel from_json(const std::string& text);
  /// FNV-1a of the serialized form, as 16 hex digits.
  std::string hash() const;
};

struct Edge {
  int source;
  int target;
  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class GraphKind { ErdosRenyi, WattsStrogatz, Explicit };

struct GraphSpec {
  GraphKind kind = GraphKind::ErdosRenyi;
  double edge_prob = 0.0;   // ErdosRenyi
  int mean_degree = 0;      // WattsStrogatz
  double rewire_prob = 0.0; // WattsStrogatz
  std::vector<Edge> edges;  // Explicit
  bool directed = true;
  bool allow_self_loops = true;  // ErdosRenyi only
  std::uint64_t seed = 0;
};

/// Directed edge list source -> target, sorted by (target, source). An
/// undirected graph yields both orientations.
std::vector<Edge> generate_graph(const GraphSpec& spec, int n);

struct PolyNetworkOptions {
  double coef_lo = 0.25;  // nonzero coefficients are drawn from [-hi,-lo] U [lo,hi]
  double coef_hi = 1.0;
  int inputs = 2;
};

/// Scalar nodes on a directed Erdos-Renyi graph (self loops allowed; they act
/// as local terms). Each edge carries one monomial of degree 1..3, each
/// input-node link (same probability) one monomial of degree 1..2.
NetworkModel gen_erdos_renyi_poly(int n, double edge_prob, std::uint64_t seed, const PolyNetworkOptions& opts = {});

/// Four-branch network with sine/exponential couplings and 4 inputs. Index maps
/// are 1-based, a result of 0 mapping to n.
NetworkModel gen_nonpoly_network(int n, std::uint64_t seed);

struct HindmarshRoseOptions {
  double c = 1.0;
  double tau = 1000.0;
  double nu = 1.0;
};

/// Hindmarsh-Rose neurons (x, y, z) coupled through sigmoids of x on an
/// undirected Watts-Strogatz graph.
NetworkModel gen_hindmarsh_rose(int n, int mean_degree, double rewire_prob, std::uint64_t seed,
                                 const HindmarshRoseOptions& opts = {});

/// Stacked right-hand side F(X, U).
Vector eval_vector_field(const NetworkModel& model, const Vector& x, const Vector& u);

}  // namespace netkoop
