#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netkoop/local_id.hpp"
#include "netkoop/models.hpp"
#include "netkoop/topology.hpp"

namespace netkoop {

struct MetricOptions {
  bool paper_strict = false;       // sum over the true sets only
  bool count_self_loops = false;   // treat local terms as a self edge
};

struct LocalError {
  double strict = 0.0;        // true coupling and input terms
  double with_spurious = 0.0; // plus estimated terms on false-positive neighbors and inputs
  double extended = 0.0;      // with_spurious plus local (alpha) terms
};

/// Coefficient errors of node i, aligned by canonical function text. Estimated
/// terms missing from the truth are compared with 0 and vice versa.
LocalError local_error(const NetworkModel& truth, const ParameterEstimate& est, int node,
                       const MetricOptions& opts = {});

struct ScoreReport {
  std::vector<double> eps;           // primary epsilon_i
  std::vector<double> eps_strict;    // literal formula over the true sets
  std::vector<double> eps_extended;  // including alpha
  double rmse = 0.0;
  double me = 0.0;
  double min = 0.0;
  double std = 0.0;
  double rmse_strict = 0.0;
  double rmse_extended = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  std::optional<double> auroc;
  EdgeCounts edges;
  bool paper_strict = false;
};

/// Aggregates epsilon_i (primary = with_spurious unless paper_strict) and the
/// Boolean counts of the estimated neighbor sets.
ScoreReport score_run(const NetworkModel& truth, const std::vector<std::vector<int>>& est_neighbors,
                      const ParameterEstimate& est, const MetricOptions& opts = {});

/// Flat CSV: header() then row(); 17 significant digits.
std::string score_csv_header();
std::string score_csv_row(const ScoreReport& r);
std::string score_text(const ScoreReport& r);

}  // namespace netkoop
