#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netkoop/numerics.hpp"

namespace netkoop {

/// Snapshot triples {X_k, U_k, Y_k}: row k of y is the state reached from row k
/// of x after time ts with row k of u held constant.
struct SnapshotDataset {
  double ts = 0.0;
  Matrix x;        // K x n (noisy when sigma > 0)
  Matrix u;        // K x m
  Matrix y;        // K x n
  Matrix x_clean;  // noise-free copies, same shapes as x / y
  Matrix y_clean;
  std::vector<int> node_dims;   // n_i, sums to n
  std::vector<int> input_dims;  // m_k, sums to m
  double noise_sigma = 0.0;     // standard deviation of the added measurement noise
  std::uint64_t seed = 0;
  std::string model_hash;       // empty when the generating model is unknown

  Eigen::Index samples() const { return x.rows(); }
  int num_nodes() const { return static_cast<int>(node_dims.size()); }
  int num_inputs() const { return static_cast<int>(input_dims.size()); }
  int state_dim() const;
  int input_dim() const;
  int node_offset(int node) const;
  int input_offset(int input) const;

  /// Throws ValidationError when shapes or values are inconsistent.
  void validate() const;
};

}  // namespace netkoop
