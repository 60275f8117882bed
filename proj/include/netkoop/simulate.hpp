#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netkoop/dataset.hpp"
#include "netkoop/models.hpp"

namespace netkoop {

/// Fixed-step classical RK4. With substeps == 0 the step count is chosen so
/// that each step is at most max_step.
struct IntegratorConfig {
  int substeps = 0;
  double max_step = 1e-3;

  int steps_for(double t) const;
};

/// State reached from x0 after time t with u held constant.
Vector flow(const NetworkModel& model, const Vector& x0, const Vector& u, double t, const IntegratorConfig& cfg = {});

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

struct DatasetSpec {
  int samples = 0;
  double ts = 0.0;
  // One interval applies to every coordinate; otherwise one per coordinate.
  std::vector<Interval> state_box{Interval{}};
  std::vector<Interval> input_box{Interval{}};
  double noise_sigma = 0.0;  // standard deviation
  std::uint64_t seed = 0;
  IntegratorConfig integrator;
};

/// Draws X_k, U_k uniformly from the boxes, integrates to Y_k, then adds
/// independent Gaussian noise to X_k and Y_k. Samples run in parallel; every
/// sample has its own random stream so the result does not depend on the
/// thread count.
SnapshotDataset gen_dataset(const NetworkModel& model, const DatasetSpec& spec);

/// Directory with `manifest` and headerless CSVs X, U, Y, X_clean, Y_clean.
void save_dataset(const SnapshotDataset& ds, const std::string& dir);
SnapshotDataset load_dataset(const std::string& dir);

/// Headerless CSV helpers shared by the dataset and result writers.
void write_csv_matrix(const std::string& path, const Matrix& m);
Matrix read_csv_matrix(const std::string& path, Eigen::Index expected_rows, Eigen::Index expected_cols);

}  // namespace netkoop
