#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netkoop/dual_koopman.hpp"
#include "netkoop/local_id.hpp"
#include "netkoop/metrics.hpp"
#include "netkoop/models.hpp"
#include "netkoop/simulate.hpp"
#include "netkoop/topology.hpp"

namespace netkoop {

struct ModelConfig {
  std::string family = "erdos_renyi_poly";  // erdos_renyi_poly | nonpoly | hindmarsh_rose | file
  int nodes = 10;
  std::uint64_t seed = 1;
  double edge_prob = 0.25;
  double coef_lo = 0.25;
  double coef_hi = 1.0;
  int inputs = 2;
  int mean_degree = 8;
  double rewire_prob = 0.5;
  double hr_c = 1.0;
  double hr_tau = 1000.0;
  double hr_nu = 1.0;
  std::string path;  // family == file
};

struct DataConfig {
  int samples = 100;
  double ts = 0.01;
  Interval state_box;
  Interval input_box;
  double noise = 0.0;
  std::string noise_convention = "std";  // std | variance
  std::uint64_t seed = 2;
  int substeps = 0;
  double max_step = 1e-3;

  double noise_std() const;
};

struct GammaGrid {
  std::string kind = "linear";  // linear | geometric
  double lo = 0.0025;
  double hi = 0.025;
  int count = 20;

  std::vector<double> values() const;
};

struct DualConfig {
  std::optional<double> gamma;  // unset: chosen from the grid by ||e||
  GammaGrid grid;
  std::string centers = "xy";  // xy | x
  DualLogMode log_mode = DualLogMode::Auto;
  std::optional<double> rcond;
};

struct TopologyConfig {
  std::vector<std::string> node_functions;   // empty: family preset
  std::vector<std::string> input_functions;
  Centering centering = Centering::EmpiricalMean;
  double domain_lo = -1.0;
  double domain_hi = 1.0;
  PenaltyRule penalty;
  bool standardize = false;
  int max_iter = 10000;
  double tol = 1e-8;
  double threshold = 0.1;
  std::optional<double> input_threshold;
  std::vector<double> roc_thresholds;  // empty: every distinct weight
};

struct LocalConfig {
  std::vector<std::string> local_functions;  // after the coordinates; empty: preset
  std::vector<std::string> coupling_functions;
  std::vector<std::string> input_functions;
  ZohMode zoh = ZohMode::Integral;
  std::optional<double> rcond;
  bool assemble_global = true;
};

struct MetricsConfig {
  bool paper_strict = false;
  bool count_self_loops = false;
};

struct SweepConfig {
  std::string axis;  // K | N | sigma | edge_prob | ts | threshold | gamma
  std::vector<double> values;
  int repeats = 1;
  bool baseline = false;  // also run the dual baseline per point
};

struct ExperimentConfig {
  ModelConfig model;
  DataConfig data;
  DualConfig dual;
  TopologyConfig topology;
  LocalConfig local;
  MetricsConfig metrics;
  std::optional<SweepConfig> sweep;
  std::string out;  // default output directory; --out overrides

  /// Strict parse: unknown keys and wrong types are validation errors that
  /// name the offending field path.
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string to_json() const;
  void validate() const;

  /// Seeds for repeat r: model seed + r, data seed + r.
  ExperimentConfig with_repeat(int r) const;
  /// Model seed = s, data seed = s + 1.
  ExperimentConfig with_seed(std::uint64_t s) const;
};

NetworkModel build_model(const ExperimentConfig& cfg);
SnapshotDataset build_dataset(const ExperimentConfig& cfg, const NetworkModel& model);

/// Node functions and local dictionaries after applying family presets.
NodeFunctionSet node_function_set(const ExperimentConfig& cfg, const std::vector<int>& node_dims, int num_inputs);
LocalDictionary local_dictionary(const ExperimentConfig& cfg, const std::vector<int>& node_dims, int num_inputs);

struct IdentifyResult {
  std::string method;  // two_step | dual_baseline
  DualDiagnostics dual;
  std::string test_set_id;
  double gamma = 0.0;
  std::vector<double> gamma_grid;
  TestSetSelection selection;  // empty scores when gamma was given
  Matrix f_hat;
  Matrix lambda;
  Matrix delta;
  TopologyEstimate topology;
  std::vector<std::string> warnings;
  std::vector<std::string> node_failures;  // per node, empty on success
  ParameterEstimate params;
  std::vector<LocalLiftedModel> local_models;
  std::optional<GlobalLiftedModel> global;
  std::optional<ScoreReport> score;
  std::optional<RocCurve> roc;
  NodeFunctionSet node_functions;
  LocalDictionary dictionary;
  std::vector<std::pair<std::string, double>> timing;  // stage, seconds

  bool partial() const;
};

/// Dual vector field, Step 1 (weights and threshold) and Step 2 (local
/// identification) with scoring when the truth is known.
IdentifyResult run_identify(const ExperimentConfig& cfg, const SnapshotDataset& ds, const NetworkModel* truth);

/// Dual vector field followed by one global Lasso per node component.
IdentifyResult run_baseline_dual(const ExperimentConfig& cfg, const SnapshotDataset& ds, const NetworkModel* truth);

/// Output directory layout shared by identify and baseline-dual.
void write_identify(const IdentifyResult& r, const ExperimentConfig& cfg, const std::string& dataset_dir,
                    const std::string& out_dir);

/// Parameters as CSV rows: node,source,index,function,component,value.
std::string parameters_csv(const ParameterEstimate& p);
ParameterEstimate parse_parameters_csv(const std::string& text, const std::vector<int>& node_dims);

struct SweepRow {
  double value = 0.0;
  int repeat = 0;
  std::string method;
  std::optional<ScoreReport> score;
  std::string error;  // non-empty when the run failed
  double seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

SweepResult run_sweep(const ExperimentConfig& cfg);
/// sweep.csv (deterministic), summary.csv (median and quartiles), timing.csv.
void write_sweep(const SweepResult& r, const ExperimentConfig& cfg, const std::string& out_dir);

/// simulate: model.json plus the dataset files in out_dir.
void write_simulation(const ExperimentConfig& cfg, const NetworkModel& model, const SnapshotDataset& ds,
                      const std::string& out_dir);

/// The model stored next to a dataset, if any.
std::optional<NetworkModel> load_truth(const std::string& dataset_dir, const std::string& expected_hash = {});

/// Re-scores a run directory (parameters.csv, topology.json, lambda.csv)
/// against a ground-truth model.
struct RunScore {
  ScoreReport report;
  std::optional<RocCurve> roc;
};
RunScore score_run_dir(const std::string& run_dir, const NetworkModel& truth, const MetricsConfig& opts,
                       const std::vector<double>& roc_thresholds = {});
void write_score(const RunScore& s, const std::string& out_dir);

std::string library_version();

}  // namespace netkoop
