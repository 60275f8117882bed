#include "netkoop/netkoop.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <limits>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "netkoop/errors.hpp"
#include "netkoop/experiment.hpp"
#include "netkoop/parallel.hpp"

struct nk_config {
  netkoop::ExperimentConfig cfg;
};

struct nk_result {
  std::vector<std::vector<int>> neighbors;
  netkoop::Matrix lambda;
  std::optional<netkoop::ScoreReport> score;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool partial = false;
  std::vector<std::string> warnings;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

nk_status status_of(netkoop::ErrorKind k) {
  switch (k) {
    case netkoop::ErrorKind::Argument: return NK_ERR_ARGUMENT;
    case netkoop::ErrorKind::Validation: return NK_ERR_VALIDATION;
    case netkoop::ErrorKind::Parse: return NK_ERR_PARSE;
    case netkoop::ErrorKind::Numerical: return NK_ERR_NUMERICAL;
    case netkoop::ErrorKind::Scoring: return NK_ERR_SCORING;
    case netkoop::ErrorKind::Io: return NK_ERR_IO;
  }
  return NK_ERR_INTERNAL;
}

template <class F>
nk_status guarded(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const netkoop::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NK_ERR_INTERNAL;
  }
}

nk_status null_arg(const char* what) {
  g_last_error = std::string(what) + " is null";
  return NK_ERR_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

nk_result* make_result(const netkoop::IdentifyResult& r) {
  auto* out = new nk_result;
  out->neighbors = r.topology.neighbors;
  out->lambda = r.lambda;
  out->score = r.score;
  out->gamma = r.gamma;
  out->partial = r.partial();
  out->warnings = r.warnings;
  for (const auto& f : r.node_failures)
    if (!f.empty()) out->warnings.push_back(f);
  out->summary = r.score ? netkoop::score_text(*r.score)
                         : std::string("no ground-truth model next to the dataset; scoring skipped\n");
  return out;
}

using Runner = netkoop::IdentifyResult (*)(const netkoop::ExperimentConfig&, const netkoop::SnapshotDataset&,
                                           const netkoop::NetworkModel*);

nk_status run_dataset(Runner run, const nk_config* cfg, const char* dataset_dir, const char* out_dir, nk_result** out) {
  if (!cfg) return null_arg("config");
  if (!dataset_dir) return null_arg("dataset directory");
  return guarded([&] {
    const netkoop::SnapshotDataset ds = netkoop::load_dataset(dataset_dir);
    const auto truth = netkoop::load_truth(dataset_dir, ds.model_hash);
    const netkoop::IdentifyResult r = run(cfg->cfg, ds, truth ? &*truth : nullptr);
    if (out_dir) netkoop::write_identify(r, cfg->cfg, dataset_dir, out_dir);
    if (out) *out = make_result(r);
    if (r.partial()) {
      g_last_error = "some nodes failed; partial results kept";
      return NK_PARTIAL;
    }
    return NK_OK;
  });
}

}  // namespace

extern "C" {

const char* nk_version(void) {
  static const std::string v = netkoop::library_version();
  return v.c_str();
}

const char* nk_last_error(void) { return g_last_error.c_str(); }

const char* nk_status_name(nk_status s) {
  switch (s) {
    case NK_OK: return "ok";
    case NK_ERR_ARGUMENT: return "argument error";
    case NK_ERR_VALIDATION: return "validation error";
    case NK_ERR_NUMERICAL: return "numerical failure";
    case NK_PARTIAL: return "partial results";
    case NK_ERR_PARSE: return "parse error";
    case NK_ERR_SCORING: return "scoring error";
    case NK_ERR_IO: return "i/o error";
    case NK_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void nk_set_threads(int n) { netkoop::set_thread_count(n); }

int nk_get_threads(void) { return netkoop::thread_count(); }

nk_status nk_config_load(const char* path, nk_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("output handle");
  return guarded([&] {
    *out = new nk_config{netkoop::ExperimentConfig::load(path)};
    return NK_OK;
  });
}

nk_status nk_config_parse(const char* json_text, nk_config** out) {
  if (!json_text) return null_arg("json text");
  if (!out) return null_arg("output handle");
  return guarded([&] {
    *out = new nk_config{netkoop::ExperimentConfig::from_json(json_text)};
    return NK_OK;
  });
}

void nk_config_free(nk_config* cfg) { delete cfg; }

nk_status nk_config_to_json(const nk_config* cfg, char** out) {
  if (!cfg) return null_arg("config");
  if (!out) return null_arg("output string");
  return guarded([&] {
    *out = dup_string(cfg->cfg.to_json());
    return NK_OK;
  });
}

nk_status nk_config_set_seed(nk_config* cfg, uint64_t seed) {
  if (!cfg) return null_arg("config");
  return guarded([&] {
    cfg->cfg = cfg->cfg.with_seed(seed);
    return NK_OK;
  });
}

nk_status nk_config_out_dir(const nk_config* cfg, char** out) {
  if (!cfg) return null_arg("config");
  if (!out) return null_arg("output string");
  return guarded([&] {
    *out = dup_string(cfg->cfg.out);
    return NK_OK;
  });
}

void nk_free_string(char* s) { delete[] s; }

nk_status nk_simulate(const nk_config* cfg, const char* out_dir) {
  if (!cfg) return null_arg("config");
  if (!out_dir) return null_arg("output directory");
  return guarded([&] {
    const auto model = netkoop::build_model(cfg->cfg);
    const auto ds = netkoop::build_dataset(cfg->cfg, model);
    netkoop::write_simulation(cfg->cfg, model, ds, out_dir);
    return NK_OK;
  });
}

nk_status nk_identify(const nk_config* cfg, const char* dataset_dir, const char* out_dir, nk_result** out) {
  return run_dataset(&netkoop::run_identify, cfg, dataset_dir, out_dir, out);
}

nk_status nk_baseline_dual(const nk_config* cfg, const char* dataset_dir, const char* out_dir, nk_result** out) {
  return run_dataset(&netkoop::run_baseline_dual, cfg, dataset_dir, out_dir, out);
}

nk_status nk_sweep(const nk_config* cfg, const char* out_dir) {
  if (!cfg) return null_arg("config");
  if (!out_dir) return null_arg("output directory");
  return guarded([&] {
    const auto res = netkoop::run_sweep(cfg->cfg);
    netkoop::write_sweep(res, cfg->cfg, out_dir);
    for (const auto& row : res.rows) {
      if (!row.error.empty()) {
        g_last_error = "some sweep runs failed; see the error column of sweep.csv";
        return NK_PARTIAL;
      }
    }
    return NK_OK;
  });
}

nk_status nk_score(const char* run_dir, const char* truth_path, const nk_config* cfg, const char* out_dir,
                   nk_result** out) {
  if (!run_dir) return null_arg("run directory");
  if (!truth_path) return null_arg("truth path");
  return guarded([&] {
    std::ifstream in(truth_path, std::ios::binary);
    if (!in) throw netkoop::IoError(std::string("cannot open ") + truth_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto truth = netkoop::NetworkModel::from_json(ss.str());
    const netkoop::MetricsConfig mc = cfg ? cfg->cfg.metrics : netkoop::MetricsConfig{};
    const std::vector<double> thr = cfg ? cfg->cfg.topology.roc_thresholds : std::vector<double>{};
    const auto s = netkoop::score_run_dir(run_dir, truth, mc, thr);
    if (out_dir) netkoop::write_score(s, out_dir);
    if (out) {
      auto* r = new nk_result;
      r->score = s.report;
      r->summary = netkoop::score_text(s.report);
      *out = r;
    }
    return NK_OK;
  });
}

void nk_result_free(nk_result* r) { delete r; }

int nk_result_scored(const nk_result* r) { return r && r->score ? 1 : 0; }

int nk_result_partial(const nk_result* r) { return r && r->partial ? 1 : 0; }

int nk_result_num_nodes(const nk_result* r) { return r ? static_cast<int>(r->neighbors.size()) : 0; }

double nk_result_metric(const nk_result* r, const char* name) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!r || !name) return nan;
  const std::string n = name;
  if (n == "gamma") return r->gamma;
  if (!r->score) return nan;
  const auto& s = *r->score;
  if (n == "rmse") return s.rmse;
  if (n == "me") return s.me;
  if (n == "min") return s.min;
  if (n == "std") return s.std;
  if (n == "rmse_strict") return s.rmse_strict;
  if (n == "rmse_extended") return s.rmse_extended;
  if (n == "tpr") return s.tpr;
  if (n == "fpr") return s.fpr;
  if (n == "auroc") return s.auroc.value_or(nan);
  return nan;
}

int nk_result_neighbors(const nk_result* r, int node, int* buf, int cap) {
  if (!r || node < 0 || node >= static_cast<int>(r->neighbors.size())) return -1;
  const auto& nb = r->neighbors[static_cast<std::size_t>(node)];
  for (int i = 0; i < cap && i < static_cast<int>(nb.size()); ++i) buf[i] = nb[static_cast<std::size_t>(i)];
  return static_cast<int>(nb.size());
}

double nk_result_lambda(const nk_result* r, int i, int k) {
  if (!r || i < 0 || k < 0 || i >= r->lambda.rows() || k >= r->lambda.cols()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return r->lambda(i, k);
}

size_t nk_result_warning_count(const nk_result* r) { return r ? r->warnings.size() : 0; }

const char* nk_result_warning(const nk_result* r, size_t i) {
  if (!r || i >= r->warnings.size()) return nullptr;
  return r->warnings[i].c_str();
}

const char* nk_result_summary(const nk_result* r) { return r ? r->summary.c_str() : ""; }

}  // extern "C"
