#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "netkoop/netkoop.h"

namespace {

int exit_code(nk_status s) {
  switch (s) {
    case NK_OK: return 0;
    case NK_PARTIAL: return 4;
    case NK_ERR_NUMERICAL: return 3;
    case NK_ERR_ARGUMENT:
    case NK_ERR_VALIDATION:
    case NK_ERR_PARSE:
    case NK_ERR_SCORING:
    case NK_ERR_IO: return 2;
    default: return 1;
  }
}

int report(nk_status s, const char* what) {
  if (s != NK_OK) std::fprintf(stderr, "netkoop %s: %s: %s\n", what, nk_status_name(s), nk_last_error());
  return exit_code(s);
}

struct ConfigHandle {
  nk_config* cfg = nullptr;
  ~ConfigHandle() { nk_config_free(cfg); }
};

struct ResultHandle {
  nk_result* r = nullptr;
  ~ResultHandle() { nk_result_free(r); }
};

nk_status load_config(const std::string& path, std::optional<std::uint64_t> seed, ConfigHandle& h) {
  nk_status s = path.empty() ? nk_config_parse("{}", &h.cfg) : nk_config_load(path.c_str(), &h.cfg);
  if (s == NK_OK && seed) s = nk_config_set_seed(h.cfg, *seed);
  return s;
}

std::string resolve_out(const std::string& flag, const nk_config* cfg) {
  if (!flag.empty()) return flag;
  char* s = nullptr;
  std::string out;
  if (cfg && nk_config_out_dir(cfg, &s) == NK_OK) out = s;
  nk_free_string(s);
  return out;
}

void print_result(const nk_result* r) {
  std::fputs(nk_result_summary(r), stdout);
  const size_t n = nk_result_warning_count(r);
  for (size_t i = 0; i < n; ++i) std::fprintf(stderr, "warning: %s\n", nk_result_warning(r, i));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step Koopman network identification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nk_version()));

  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::string config_path, out_dir;
  app.add_option("--threads", threads, "worker threads (default: NETKOOP_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--seed-override", seed, "model seed; the data seed becomes seed + 1");

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--out", out_dir, "output directory (default: the config's \"out\")");
  };

  auto* simulate = app.add_subcommand("simulate", "generate a model and a snapshot dataset");
  add_common(simulate, true);

  std::string dataset;
  auto* identify = app.add_subcommand("identify", "two-step identification of a dataset");
  identify->add_option("dataset", dataset, "dataset directory")->required();
  add_common(identify, false);

  auto* baseline = app.add_subcommand("baseline-dual", "dual method with one global regression");
  baseline->add_option("dataset", dataset, "dataset directory")->required();
  add_common(baseline, false);

  auto* sweep = app.add_subcommand("sweep", "repeat simulate + identify over one varied axis");
  add_common(sweep, true);

  std::string run_dir, truth;
  auto* score = app.add_subcommand("score", "score an identification output against a model");
  score->add_option("run", run_dir, "identify or baseline-dual output directory")->required();
  score->add_option("--truth", truth, "ground-truth model.json")->required()->check(CLI::ExistingFile);
  add_common(score, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (threads > 0) nk_set_threads(threads);

  ConfigHandle cfg;
  if (nk_status s = load_config(config_path, seed, cfg); s != NK_OK) return report(s, "config");

  if (score->parsed()) {
    const std::string out = out_dir.empty() ? run_dir : out_dir;
    ResultHandle r;
    const nk_status s = nk_score(run_dir.c_str(), truth.c_str(), config_path.empty() ? nullptr : cfg.cfg,
                                 out.c_str(), &r.r);
    if (r.r) print_result(r.r);
    return report(s, "score");
  }

  const std::string out = resolve_out(out_dir, cfg.cfg);
  if (out.empty()) {
    std::fprintf(stderr, "netkoop: no output directory; pass --out or set \"out\" in the config\n");
    return 2;
  }

  if (simulate->parsed()) return report(nk_simulate(cfg.cfg, out.c_str()), "simulate");
  if (sweep->parsed()) return report(nk_sweep(cfg.cfg, out.c_str()), "sweep");

  ResultHandle r;
  const bool is_identify = identify->parsed();
  const nk_status s = is_identify ? nk_identify(cfg.cfg, dataset.c_str(), out.c_str(), &r.r)
                                  : nk_baseline_dual(cfg.cfg, dataset.c_str(), out.c_str(), &r.r);
  if (r.r) print_result(r.r);
  return report(s, is_identify ? "identify" : "baseline-dual");
}
