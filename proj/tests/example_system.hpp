#pragma once

#include <cstdint>

#include "netkoop/dataset.hpp"
#include "netkoop/random.hpp"

namespace test {

// Three-state input-affine system with cross terms:
//   x1' = 2 x2 + 3 x3^2
//   x2' = -0.8 x1 x3 - 2 x1^2 x2 + u
//   x3' = -x2 x3 + x1 u^2
inline Eigen::Vector3d example_field(const Eigen::Vector3d& x, double u) {
  return {2.0 * x[1] + 3.0 * x[2] * x[2], -0.8 * x[0] * x[2] - 2.0 * x[0] * x[0] * x[1] + u,
          -x[1] * x[2] + x[0] * u * u};
}

struct ExampleData {
  netkoop::SnapshotDataset ds;
  netkoop::Matrix xdot;  // exact vector field at the samples
};

// Samples on [-1,1]^3 x [-1,1], integrated with a private RK4 (100 substeps).
inline ExampleData example_dataset(int samples, double ts, std::uint64_t seed) {
  netkoop::RandomStream rs(seed, "example_system");
  ExampleData out;
  auto& ds = out.ds;
  ds.ts = ts;
  ds.node_dims = {3};
  ds.input_dims = {1};
  ds.x.resize(samples, 3);
  ds.u.resize(samples, 1);
  ds.y.resize(samples, 3);
  out.xdot.resize(samples, 3);
  const int steps = 100;
  const double h = ts / steps;
  for (int k = 0; k < samples; ++k) {
    Eigen::Vector3d x;
    for (int c = 0; c < 3; ++c) x[c] = rs.uniform(-1.0, 1.0);
    const double u = rs.uniform(-1.0, 1.0);
    ds.x.row(k) = x.transpose();
    ds.u(k, 0) = u;
    out.xdot.row(k) = example_field(x, u).transpose();
    for (int s = 0; s < steps; ++s) {
      const Eigen::Vector3d k1 = example_field(x, u);
      const Eigen::Vector3d k2 = example_field(x + h / 2 * k1, u);
      const Eigen::Vector3d k3 = example_field(x + h / 2 * k2, u);
      const Eigen::Vector3d k4 = example_field(x + h * k3, u);
      x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    ds.y.row(k) = x.transpose();
  }
  ds.x_clean = ds.x;
  ds.y_clean = ds.y;
  return out;
}

}  // namespace test
