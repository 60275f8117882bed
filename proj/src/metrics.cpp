#include "netkoop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "netkoop/errors.hpp"
#include "netkoop/format.hpp"

namespace netkoop {

namespace {

using Key = std::tuple<int, int, std::string>;  // (kind, index, function text)

std::map<Key, std::vector<double>> term_map(const NodeModel& nd) {
  std::map<Key, std::vector<double>> out;
  for (const auto& t : nd.terms) {
    auto& v = out[{static_cast<int>(t.source.kind), t.source.index, t.fn.text()}];
    if (v.empty()) v.assign(t.coef.size(), 0.0);
    for (std::size_t c = 0; c < t.coef.size(); ++c) v[c] += t.coef[c];
  }
  return out;
}

}  // namespace

LocalError local_error(const NetworkModel& truth, const ParameterEstimate& est, int node, const MetricOptions& opts) {
  if (static_cast<int>(est.nodes.size()) != truth.num_nodes()) {
    throw ScoringError("estimate covers " + std::to_string(est.nodes.size()) + " nodes, truth has " +
                       std::to_string(truth.num_nodes()));
  }
  if (node < 0 || node >= truth.num_nodes()) throw ArgumentError("local_error: node index out of range");
  const auto& tn = truth.nodes[static_cast<std::size_t>(node)];
  const auto& en = est.nodes[static_cast<std::size_t>(node)];
  if (en.dim != tn.dim) {
    throw ScoringError("node " + std::to_string(node) + ": estimate has dimension " + std::to_string(en.dim) +
                       ", truth " + std::to_string(tn.dim));
  }
  std::vector<std::string> bad;
  for (const auto& t : en.terms)
    if (static_cast<int>(t.coef.size()) != tn.dim) bad.push_back(t.fn.text());
  if (!bad.empty()) {
    std::string msg = "node " + std::to_string(node) + ": coefficient vectors of the wrong length for";
    for (const auto& b : bad) msg += " " + b;
    throw ScoringError(msg);
  }

  const auto tm = term_map(tn);
  const auto em = term_map(en);
  const auto nb = truth.neighbors(node, false);
  const std::set<int> true_nodes(nb.begin(), nb.end());
  const auto in = truth.inputs_of(node);
  const std::set<int> true_inputs(in.begin(), in.end());
  const auto with_self = truth.neighbors(node, true);
  const bool self_is_edge =
      opts.count_self_loops && std::binary_search(with_self.begin(), with_self.end(), node);

  std::set<Key> keys;
  for (const auto& [k, v] : tm) keys.insert(k);
  for (const auto& [k, v] : em) keys.insert(k);

  double strict = 0.0, spurious = 0.0, local = 0.0;
  for (const auto& key : keys) {
    const auto ti = tm.find(key);
    const auto ei = em.find(key);
    double sq = 0.0;
    for (int c = 0; c < tn.dim; ++c) {
      const double tv = ti != tm.end() ? ti->second[static_cast<std::size_t>(c)] : 0.0;
      const double ev = ei != em.end() ? ei->second[static_cast<std::size_t>(c)] : 0.0;
      sq += (tv - ev) * (tv - ev);
    }
    const auto kind = static_cast<BlockKind>(std::get<0>(key));
    const int src = std::get<1>(key);
    if (kind == BlockKind::Node && src == node) {
      (self_is_edge ? strict : local) += sq;
    } else if (kind == BlockKind::Node) {
      (true_nodes.count(src) ? strict : spurious) += sq;
    } else {
      (true_inputs.count(src) ? strict : spurious) += sq;
    }
  }
  LocalError e;
  e.strict = std::sqrt(strict);
  e.with_spurious = std::sqrt(strict + spurious);
  e.extended = std::sqrt(strict + spurious + local);
  return e;
}

ScoreReport score_run(const NetworkModel& truth, const std::vector<std::vector<int>>& est_neighbors,
                      const ParameterEstimate& est, const MetricOptions& opts) {
  const int n = truth.num_nodes();
  if (n == 0) throw ArgumentError("score_run: empty network");
  ScoreReport r;
  r.paper_strict = opts.paper_strict;
  for (int i = 0; i < n; ++i) {
    const LocalError e = local_error(truth, est, i, opts);
    r.eps_strict.push_back(e.strict);
    r.eps.push_back(opts.paper_strict ? e.strict : e.with_spurious);
    r.eps_extended.push_back(e.extended);
  }
  auto rms = [n](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / n);
  };
  r.rmse = rms(r.eps);
  r.rmse_strict = rms(r.eps_strict);
  r.rmse_extended = rms(r.eps_extended);
  r.me = *std::max_element(r.eps.begin(), r.eps.end());
  r.min = *std::min_element(r.eps.begin(), r.eps.end());
  double mean = 0.0;
  for (double x : r.eps) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : r.eps) var += (x - mean) * (x - mean);
  r.std = std::sqrt(var / n);
  r.edges = count_edges(est_neighbors, truth, opts.count_self_loops);
  r.tpr = r.edges.tpr();
  r.fpr = r.edges.fpr();
  return r;
}

std::string score_csv_header() {
  return "rmse,me,min,std,rmse_strict,rmse_extended,tpr,fpr,auroc,tp,fp,fn,tn";
}

std::string score_csv_row(const ScoreReport& r) {
  std::ostringstream os;
  os << format_full(r.rmse) << ',' << format_full(r.me) << ',' << format_full(r.min) << ',' << format_full(r.std) << ','
     << format_full(r.rmse_strict) << ',' << format_full(r.rmse_extended) << ',' << format_full(r.tpr) << ','
     << format_full(r.fpr) << ',' << (r.auroc ? format_full(*r.auroc) : "nan") << ',' << r.edges.true_positive << ','
     << r.edges.false_positive << ',' << r.edges.false_negative << ',' << r.edges.true_negative;
  return os.str();
}

std::string score_text(const ScoreReport& r) {
  std::ostringstream os;
  os << "local error (" << (r.paper_strict ? "true sets only" : "true sets + spurious terms") << ")\n";
  os << "  RMSE " << format_short(r.rmse) << "  ME " << format_short(r.me) << "  min " << format_short(r.min)
     << "  std " << format_short(r.std) << "\n";
  os << "  RMSE over true sets " << format_short(r.rmse_strict) << ", with local terms "
     << format_short(r.rmse_extended) << "\n";
  os << "edges: TP " << r.edges.true_positive << "  FP " << r.edges.false_positive << "  FN "
     << r.edges.false_negative << "  TN " << r.edges.true_negative << "\n";
  os << "  TPR " << format_short(r.tpr) << "  FPR " << format_short(r.fpr);
  if (r.auroc) os << "  AUROC " << format_short(*r.auroc);
  os << "\n";
  return os.str();
}

}  // namespace netkoop
