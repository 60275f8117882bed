#pragma once

#include <string>
#include <vector>

#include "netkoop/dataset.hpp"
#include "netkoop/dictionary.hpp"
#include "netkoop/models.hpp"
#include "netkoop/numerics.hpp"
#include "netkoop/topology.hpp"

namespace netkoop {

/// Dictionaries for the local step: f on a node's own state (the first n_i
/// entries must be the coordinates x[0..n_i-1]), h on a neighbor's state,
/// g on an input.
struct LocalDictionary {
  std::vector<std::vector<ScalarFunction>> local;     // per node
  std::vector<std::vector<ScalarFunction>> coupling;  // per node, used when it is a neighbor
  std::vector<std::vector<ScalarFunction>> input;     // per input

  static LocalDictionary uniform(const std::vector<int>& node_dims, int num_inputs,
                                 const std::vector<ScalarFunction>& extra_local,
                                 const std::vector<ScalarFunction>& coupling,
                                 const std::vector<ScalarFunction>& input);

  /// Throws ArgumentError when sizes disagree with the blocks or when a
  /// local list does not start with the coordinate functions.
  void validate(const std::vector<int>& node_dims, const std::vector<int>& input_dims) const;
};

/// How E_i and B_i are recovered from the discrete blocks.
///   Integral: E = (int_0^Ts e^{A s} ds)^-1 Ebar; defined for singular A.
///   Inverse:  E = A (Abar - I)^-1 Ebar; fails when Abar - I is singular.
/// The two agree whenever A is invertible.
enum class ZohMode { Integral, Inverse };

std::string to_string(ZohMode m);
ZohMode zoh_mode_from_string(const std::string& s);

struct LocalOptions {
  SvdTolerance tol;
  ZohMode zoh = ZohMode::Integral;
  double singular_rcond = 1e-10;  // singularity cutoff for the ZOH inversion
};

struct LocalLiftedModel {
  int node = 0;
  int dim = 1;
  std::vector<int> neighbors;  // ascending, node itself excluded
  std::vector<int> inputs;     // ascending
  Matrix a_bar, e_bar, b_bar;  // discrete
  Matrix a, e, b;              // continuous (empty until to_continuous)
  std::vector<Eigen::Index> e_cols;  // column offset of each neighbor block in e / e_bar
  std::vector<Eigen::Index> b_cols;
  Eigen::Index regressor_rank = 0;
  Eigen::Index regressor_cols = 0;
  double log_residual = 0.0;
  std::vector<std::string> warnings;
};

/// Least-squares fit of f_i(y_i) on [f_i(x_i), h_k(x_k) for k in N_i, g_k(u_k) for k in M_i].
LocalLiftedModel fit_local_discrete(const SnapshotDataset& ds, int node, const std::vector<int>& neighbors,
                                    const std::vector<int>& inputs, const LocalDictionary& dict,
                                    const LocalOptions& opts = {});

/// A_i = log(Abar_i) / T_s and the ZOH conversion of E_i, B_i.
void to_continuous(LocalLiftedModel& model, double ts, const LocalOptions& opts = {});

/// Coefficient vectors read from the first n_i rows of A_i, E_i, B_i.
struct ParameterEstimate {
  std::vector<NodeModel> nodes;  // local terms have source == node
};

ParameterEstimate extract_parameters(const std::vector<LocalLiftedModel>& models, const LocalDictionary& dict);

/// Global lifted model dz/dt = A z + B v with z = [z_1 ... z_N] and
/// z_i = [f_i, coupling functions of node i that are not already in f_i].
struct GlobalLiftedModel {
  Matrix a;
  Matrix b;
  std::vector<Eigen::Index> z_offsets;  // start of z_i
  std::vector<Eigen::Index> v_offsets;  // start of each input block in v
  std::vector<std::string> z_names;
  std::vector<std::string> v_names;
};

/// Rows of the extra coupling functions come from an auxiliary regression of
/// the same form, so the f-rows equal the local models exactly.
GlobalLiftedModel assemble_global(const SnapshotDataset& ds, const std::vector<LocalLiftedModel>& models,
                                  const LocalDictionary& dict, const LocalOptions& opts = {});

/// Steps the discrete local models from x0 with u held over each step; row
/// s of the result is the predicted state after s steps (row 0 = x0).
Matrix predict_lifted(const std::vector<LocalLiftedModel>& models, const LocalDictionary& dict,
                      const std::vector<int>& node_dims, const std::vector<int>& input_dims, const Vector& x0,
                      const Matrix& u, int steps);

/// Runs the local step for every node: neighbors are the estimated sets
/// without the node itself. Failures are collected per node.
struct LocalRun {
  std::vector<LocalLiftedModel> models;
  std::vector<std::string> failures;  // per node, empty on success
  ParameterEstimate params;
};

LocalRun identify_local(const SnapshotDataset& ds, const TopologyEstimate& topo, const LocalDictionary& dict,
                        const LocalOptions& opts = {});

/// The dual method used as a global identifier: for every node component one
/// Lasso of F_hat over all dictionary functions of the network (the node's own
/// local dictionary, every other node's coupling dictionary, every input
/// dictionary).
struct BaselineResult {
  ParameterEstimate params;
  Matrix lambda;  // sum of |coefficients| per source node
  Matrix delta;
  std::vector<std::string> warnings;
};

BaselineResult baseline_dual(const SnapshotDataset& ds, const Matrix& f_hat, const LocalDictionary& dict,
                             const WeightOptions& opts = {});

}  // namespace netkoop
