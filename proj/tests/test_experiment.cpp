#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "netkoop/errors.hpp"
#include "netkoop/experiment.hpp"
#include "netkoop/parallel.hpp"
#include "test_util.hpp"

using namespace netkoop;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "model": {"family": "erdos_renyi_poly", "nodes": 6, "edge_prob": 0.3, "seed": 4},
  "data": {"samples": 60, "ts": 0.01, "seed": 5},
  "dual": {"gamma_grid": {"lo": 0.05, "hi": 0.5, "count": 3}},
  "topology": {"threshold": 0.1}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string validation_message(const std::string& json) {
  try {
    ExperimentConfig::from_json(json);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config defaults and round trip") {
  const ExperimentConfig d = ExperimentConfig::from_json("{}");
  CHECK(d.model.family == "erdos_renyi_poly");
  CHECK(d.topology.penalty.relative);
  CHECK(d.topology.penalty.value == 0.01);
  CHECK(d.dual.grid.count == 20);
  CHECK_FALSE(d.dual.gamma.has_value());
  const ExperimentConfig c = ExperimentConfig::from_json(kSmall);
  const std::string text = c.to_json();
  CHECK(ExperimentConfig::from_json(text).to_json() == text);
  CHECK(c.model.nodes == 6);
  CHECK(c.data.samples == 60);
}

TEST_CASE("config errors name the offending field") {
  CHECK(validation_message(R"({"data": {"sample": 5}})").find("data.sample") != std::string::npos);
  CHECK(validation_message(R"({"data": {"samples": "many"}})").find("data.samples") != std::string::npos);
  CHECK(validation_message(R"({"data": {"samples": 0}})").find("data.samples: must be positive") != std::string::npos);
  CHECK(validation_message(R"({"model": {"family": "nonpoly", "nodes": 10}})").find("model.nodes") != std::string::npos);
  CHECK(validation_message(R"({"sweep": {"axis": ["K", "N"], "values": [1]}})").find("sweep.axis") != std::string::npos);
  CHECK(validation_message(R"({"sweep": {"axis": "K", "values": [10.5]}})").find("sweep.values") != std::string::npos);
  CHECK(validation_message(R"j({"topology": {"node_functions": ["cos(x[0])"]}})j").find("topology.node_functions") !=
        std::string::npos);
  CHECK(validation_message(R"({"extra": 1})").find("extra") != std::string::npos);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{"), ParseError);
}

TEST_CASE("seed helpers") {
  const ExperimentConfig c = ExperimentConfig::from_json(kSmall);
  const ExperimentConfig s = c.with_seed(40);
  CHECK(s.model.seed == 40);
  CHECK(s.data.seed == 41);
  const ExperimentConfig r = c.with_repeat(3);
  CHECK(r.model.seed == 7);
  CHECK(r.data.seed == 8);
  ExperimentConfig v = c;
  v.data.noise = 1e-4;
  v.data.noise_convention = "variance";
  CHECK(v.data.noise_std() == doctest::Approx(0.01));
}

TEST_CASE("parameters csv round trip") {
  ParameterEstimate p;
  p.nodes.assign(2, NodeModel{1, {}});
  p.nodes[1].dim = 2;
  p.nodes[0].terms.push_back({{BlockKind::Node, 1}, ScalarFunction::gaussian_rbf({0.5, -1.0}, 0.3), {0.125}});
  p.nodes[0].terms.push_back({{BlockKind::Input, 0}, ScalarFunction::monomial(2), {-1.0 / 3.0}});
  p.nodes[1].terms.push_back({{BlockKind::Node, 1}, ScalarFunction::sigmoid(1.0, -0.5), {1e-17, 4.0}});
  const std::string text = parameters_csv(p);
  const ParameterEstimate r = parse_parameters_csv(text, {1, 2});
  CHECK(parameters_csv(r) == text);
  CHECK(r.nodes[0].terms[1].coef[0] == -1.0 / 3.0);
  CHECK_THROWS_AS(parse_parameters_csv("node,value\n", {1}), ParseError);
  CHECK_THROWS_AS(parse_parameters_csv("node,source,index,function,component,value\n5,x,0,x[0],0,1\n", {1}),
                  ValidationError);
}

TEST_CASE("identify end to end with and without truth") {
  const ExperimentConfig cfg = ExperimentConfig::from_json(kSmall);
  const NetworkModel model = build_model(cfg);
  const SnapshotDataset ds = build_dataset(cfg, model);
  CHECK(ds.model_hash == model.hash());

  const IdentifyResult r = run_identify(cfg, ds, &model);
  CHECK(r.method == "two_step");
  CHECK(r.selection.scores.size() == 3);
  CHECK(r.gamma == doctest::Approx(cfg.dual.grid.values()[r.selection.best]));
  REQUIRE(r.score.has_value());
  REQUIRE(r.roc.has_value());
  CHECK(r.lambda.rows() == 6);
  CHECK(r.params.nodes.size() == 6);
  CHECK(r.global.has_value());
  CHECK_FALSE(r.partial());

  const IdentifyResult blind = run_identify(cfg, ds, nullptr);
  CHECK_FALSE(blind.score.has_value());
  CHECK(blind.lambda == r.lambda);

  const IdentifyResult base = run_baseline_dual(cfg, ds, &model);
  CHECK(base.method == "dual_baseline");
  CHECK(base.score.has_value());

  test::TempDir dir("identify");
  const auto data_dir = dir.path / "data";
  write_simulation(cfg, model, ds, data_dir.string());
  const auto truth = load_truth(data_dir.string(), ds.model_hash);
  REQUIRE(truth.has_value());
  CHECK(truth->hash() == model.hash());
  CHECK_THROWS_AS(load_truth(data_dir.string(), "0000000000000000"), ValidationError);

  write_identify(r, cfg, data_dir.string(), (dir.path / "run").string());
  for (const char* f : {"vector_field.csv", "lambda.csv", "delta.csv", "topology.json", "parameters.csv",
                        "gamma_scores.csv", "score.csv", "eps.csv", "roc.csv", "manifest.json", "timing.csv"}) {
    CHECK_MESSAGE(fs::exists(dir.path / "run" / f), f);
  }
  // Re-scoring the written run reproduces the in-memory score.
  const RunScore rs = score_run_dir((dir.path / "run").string(), model, cfg.metrics);
  CHECK(score_csv_row(rs.report) == score_csv_row(*r.score));
  write_score(rs, (dir.path / "rescore").string());
  CHECK(slurp(dir.path / "rescore" / "score.csv") == slurp(dir.path / "run" / "score.csv"));
}

TEST_CASE("identify output is deterministic across thread counts") {
  const ExperimentConfig cfg = ExperimentConfig::from_json(kSmall);
  test::TempDir dir("determinism");
  std::vector<std::string> first;
  for (int threads : {1, 3}) {
    set_thread_count(threads);
    const NetworkModel model = build_model(cfg);
    const SnapshotDataset ds = build_dataset(cfg, model);
    const auto out = dir.path / ("t" + std::to_string(threads));
    write_identify(run_identify(cfg, ds, &model), cfg, "", out.string());
    std::vector<std::string> files;
    for (const char* f : {"vector_field.csv", "lambda.csv", "parameters.csv", "score.csv", "roc.csv"})
      files.push_back(slurp(out / f));
    if (first.empty()) {
      first = files;
    } else {
      for (std::size_t i = 0; i < files.size(); ++i) CHECK(files[i] == first[i]);
    }
  }
  set_thread_count(1);
}

TEST_CASE("a one-point sweep") {
  ExperimentConfig cfg = ExperimentConfig::from_json(kSmall);
  cfg.sweep = SweepConfig{"K", {40, 60}, 2, true};
  const SweepResult r = run_sweep(cfg);
  CHECK(r.rows.size() == 2 * 2 * 2);
  for (const auto& row : r.rows) {
    CHECK(row.error.empty());
    CHECK(row.score.has_value());
  }
  test::TempDir dir("sweep");
  write_sweep(r, cfg, dir.str());
  const std::string sweep = slurp(dir.path / "sweep.csv");
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 9);
  CHECK(fs::exists(dir.path / "summary.csv"));
}

TEST_CASE("family presets") {
  ExperimentConfig cfg;
  cfg.model.family = "hindmarsh_rose";
  const auto nf = node_function_set(cfg, {3, 3}, 0);
  REQUIRE(nf.node_functions[0].size() == 4);
  CHECK(nf.node_functions[0][2].text() == "x[1]");
  const auto ld = local_dictionary(cfg, {3, 3}, 0);
  CHECK(ld.local[0].size() == 6);
  CHECK(ld.coupling[0].size() == 3);
  CHECK(ld.coupling[0][0].kind() == FunctionKind::Sigmoid);
  cfg.model.family = "nonpoly";
  const auto np = local_dictionary(cfg, {1}, 4);
  CHECK(np.local[0].size() == 5);
  CHECK(np.input[0].size() == 2);
}
