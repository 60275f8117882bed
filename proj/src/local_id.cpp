#include "netkoop/local_id.hpp"

#include <algorithm>
#include <map>

#include "netkoop/errors.hpp"
#include "netkoop/format.hpp"
#include "netkoop/parallel.hpp"

namespace netkoop {

namespace {

std::vector<int> offsets_of(const std::vector<int>& dims) {
  std::vector<int> off(dims.size());
  int acc = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    off[i] = acc;
    acc += dims[i];
  }
  return off;
}

Eigen::Index total_width(const std::vector<std::vector<ScalarFunction>>& lists, const std::vector<int>& which) {
  Eigen::Index w = 0;
  for (int k : which) w += static_cast<Eigen::Index>(lists[static_cast<std::size_t>(k)].size());
  return w;
}

void check_sorted_subset(const std::vector<int>& v, int n, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] >= n) throw ArgumentError(std::string("local fit: ") + what + " index out of range");
    if (i > 0 && v[i] <= v[i - 1]) throw ArgumentError(std::string("local fit: ") + what + " must be strictly ascending");
  }
}

// Regressor [f(x_i), h_k(x_k)..., g_k(u_k)...] for one node.
Matrix regressor(const SnapshotDataset& ds, const std::vector<ScalarFunction>& own, int node,
                 const std::vector<int>& neighbors, const std::vector<int>& inputs, const LocalDictionary& dict,
                 const std::vector<int>& noff, const std::vector<int>& ioff) {
  const auto ni = ds.node_dims[static_cast<std::size_t>(node)];
  const Eigen::Index cols = static_cast<Eigen::Index>(own.size()) + total_width(dict.coupling, neighbors) +
                            total_width(dict.input, inputs);
  Matrix z(ds.samples(), cols);
  Eigen::Index c = 0;
  auto put = [&](const Matrix& block) {
    z.middleCols(c, block.cols()) = block;
    c += block.cols();
  };
  put(eval_block(own, ds.x, noff[static_cast<std::size_t>(node)], ni));
  for (int k : neighbors) {
    const auto kk = static_cast<std::size_t>(k);
    put(eval_block(dict.coupling[kk], ds.x, noff[kk], ds.node_dims[kk]));
  }
  for (int k : inputs) {
    const auto kk = static_cast<std::size_t>(k);
    put(eval_block(dict.input[kk], ds.u, ioff[kk], ds.input_dims[kk]));
  }
  return z;
}

struct Continuous {
  Matrix a, e, b;
  double residual = 0.0;
};

Continuous convert(const Matrix& a_bar, const Matrix& e_bar, const Matrix& b_bar, double ts, const LocalOptions& opts,
                   const std::string& where) {
  Continuous out;
  try {
    out.a = logm_principal(a_bar) / ts;
  } catch (const NonPrincipalSpectrum& e) {
    throw NonPrincipalSpectrum(where + ": " + e.what() + " (reduce T_s or revise the local dictionary)", e.eig_re,
                               e.eig_im);
  }
  const double nrm = a_bar.norm();
  out.residual = nrm > 0.0 ? (expm(out.a * ts) - a_bar).norm() / nrm : 0.0;
  const Eigen::Index n = a_bar.rows();
  if (opts.zoh == ZohMode::Integral) {
    const Matrix s = zoh_integral(out.a, ts);
    const Eigen::PartialPivLU<Matrix> lu(s / ts);
    if (!(lu.rcond() >= opts.singular_rcond)) {
      throw NumericalError(where + ": zero-order-hold integral is singular (rcond " + format_short(lu.rcond()) + ")");
    }
    out.e = e_bar.cols() ? Matrix(lu.solve(e_bar) / ts) : Matrix(n, 0);
    out.b = b_bar.cols() ? Matrix(lu.solve(b_bar) / ts) : Matrix(n, 0);
  } else {
    const Matrix m = a_bar - Matrix::Identity(n, n);
    const TruncatedSvd svd = truncated_svd(m);
    if (svd.sigma_max == 0.0 || svd.s(svd.rank - 1) < opts.singular_rcond * svd.sigma_max || svd.rank < n) {
      throw NumericalError(where + ": Abar - I is singular, A_i has a zero eigenvalue (integrator-mode node)");
    }
    const Matrix k = out.a * (svd.v * svd.s.cwiseInverse().asDiagonal() * svd.u.transpose());
    out.e = k * e_bar;
    out.b = k * b_bar;
  }
  return out;
}

}  // namespace

LocalDictionary LocalDictionary::uniform(const std::vector<int>& node_dims, int num_inputs,
                                         const std::vector<ScalarFunction>& extra_local,
                                         const std::vector<ScalarFunction>& coupling,
                                         const std::vector<ScalarFunction>& input) {
  LocalDictionary d;
  for (int n : node_dims) {
    std::vector<ScalarFunction> f;
    for (int c = 0; c < n; ++c) f.push_back(ScalarFunction::coordinate(c));
    for (const auto& g : extra_local)
      if (std::find(f.begin(), f.end(), g) == f.end()) f.push_back(g);
    d.local.push_back(std::move(f));
    d.coupling.push_back(coupling);
  }
  d.input.assign(static_cast<std::size_t>(num_inputs), input);
  return d;
}

void LocalDictionary::validate(const std::vector<int>& node_dims, const std::vector<int>& input_dims) const {
  if (local.size() != node_dims.size() || coupling.size() != node_dims.size()) {
    throw ArgumentError("local dictionary: node count differs from the dataset");
  }
  if (input.size() != input_dims.size()) throw ArgumentError("local dictionary: input count differs from the dataset");
  for (std::size_t i = 0; i < node_dims.size(); ++i) {
    const auto& f = local[i];
    const int n = node_dims[i];
    if (static_cast<int>(f.size()) < n) {
      throw ArgumentError("local dictionary: node " + std::to_string(i) + " has fewer functions than coordinates");
    }
    for (int c = 0; c < n; ++c) {
      if (!(f[static_cast<std::size_t>(c)] == ScalarFunction::coordinate(c))) {
        throw ArgumentError("local dictionary: node " + std::to_string(i) + " must start with the coordinates x[0.." +
                            std::to_string(n - 1) + "]");
      }
    }
    for (const auto& g : f)
      if (g.min_input_dim() > n) throw ArgumentError("local dictionary: " + g.text() + " does not fit node " + std::to_string(i));
    for (const auto& g : coupling[i])
      if (g.min_input_dim() > n) throw ArgumentError("local dictionary: " + g.text() + " does not fit node " + std::to_string(i));
  }
  for (std::size_t k = 0; k < input_dims.size(); ++k)
    for (const auto& g : input[k])
      if (g.min_input_dim() > input_dims[k]) {
        throw ArgumentError("local dictionary: " + g.text() + " does not fit input " + std::to_string(k));
      }
}

std::string to_string(ZohMode m) { return m == ZohMode::Integral ? "integral" : "inverse"; }

ZohMode zoh_mode_from_string(const std::string& s) {
  if (s == "integral") return ZohMode::Integral;
  if (s == "inverse") return ZohMode::Inverse;
  throw ValidationError("unknown zoh mode '" + s + "' (expected integral or inverse)");
}

LocalLiftedModel fit_local_discrete(const SnapshotDataset& ds, int node, const std::vector<int>& neighbors,
                                    const std::vector<int>& inputs, const LocalDictionary& dict,
                                    const LocalOptions& opts) {
  if (node < 0 || node >= ds.num_nodes()) throw ArgumentError("local fit: node index out of range");
  check_sorted_subset(neighbors, ds.num_nodes(), "neighbor");
  check_sorted_subset(inputs, ds.num_inputs(), "input");
  if (std::find(neighbors.begin(), neighbors.end(), node) != neighbors.end()) {
    throw ArgumentError("local fit: the node itself is covered by its local dictionary, not by a neighbor block");
  }
  dict.validate(ds.node_dims, ds.input_dims);
  const auto noff = offsets_of(ds.node_dims);
  const auto ioff = offsets_of(ds.input_dims);
  const auto& own = dict.local[static_cast<std::size_t>(node)];

  LocalLiftedModel m;
  m.node = node;
  m.dim = ds.node_dims[static_cast<std::size_t>(node)];
  m.neighbors = neighbors;
  m.inputs = inputs;

  const Matrix z = regressor(ds, own, node, neighbors, inputs, dict, noff, ioff);
  const Matrix target = eval_block(own, ds.y, noff[static_cast<std::size_t>(node)], m.dim);
  const TruncatedSvd svd = truncated_svd(z, opts.tol);
  m.regressor_rank = svd.rank;
  m.regressor_cols = z.cols();
  if (z.rows() < z.cols()) {
    m.warnings.push_back("node " + std::to_string(node) + ": K = " + std::to_string(z.rows()) + " is below the " +
                         std::to_string(z.cols()) + " regressors");
  }
  if (svd.rank < z.cols()) {
    m.warnings.push_back("node " + std::to_string(node) + ": regressor has effective rank " + std::to_string(svd.rank) +
                         " of " + std::to_string(z.cols()));
  }
  Matrix theta;
  if (svd.rank == 0) {
    theta = Matrix::Zero(z.cols(), target.cols());
  } else {
    theta = svd.v * (svd.s.cwiseInverse().asDiagonal() * (svd.u.transpose() * target));
  }
  const Matrix t = theta.transpose();
  const auto nf = static_cast<Eigen::Index>(own.size());
  const Eigen::Index ne = total_width(dict.coupling, neighbors);
  m.a_bar = t.leftCols(nf);
  m.e_bar = t.middleCols(nf, ne);
  m.b_bar = t.rightCols(t.cols() - nf - ne);
  Eigen::Index c = 0;
  for (int k : neighbors) {
    m.e_cols.push_back(c);
    c += static_cast<Eigen::Index>(dict.coupling[static_cast<std::size_t>(k)].size());
  }
  c = 0;
  for (int k : inputs) {
    m.b_cols.push_back(c);
    c += static_cast<Eigen::Index>(dict.input[static_cast<std::size_t>(k)].size());
  }
  return m;
}

void to_continuous(LocalLiftedModel& model, double ts, const LocalOptions& opts) {
  if (!(ts > 0.0)) throw ArgumentError("to_continuous: T_s must be positive");
  const Continuous c =
      convert(model.a_bar, model.e_bar, model.b_bar, ts, opts, "node " + std::to_string(model.node));
  model.a = c.a;
  model.e = c.e;
  model.b = c.b;
  model.log_residual = c.residual;
}

ParameterEstimate extract_parameters(const std::vector<LocalLiftedModel>& models, const LocalDictionary& dict) {
  ParameterEstimate p;
  for (const auto& m : models) {
    NodeModel nd;
    nd.dim = m.dim;
    if (m.a.size() != 0) {
      const auto& own = dict.local[static_cast<std::size_t>(m.node)];
      auto coef = [&](const Matrix& mat, Eigen::Index col) {
        std::vector<double> v(static_cast<std::size_t>(m.dim));
        for (int r = 0; r < m.dim; ++r) v[static_cast<std::size_t>(r)] = mat(r, col);
        return v;
      };
      for (std::size_t l = 0; l < own.size(); ++l) {
        nd.terms.push_back({{BlockKind::Node, m.node}, own[l], coef(m.a, static_cast<Eigen::Index>(l))});
      }
      for (std::size_t q = 0; q < m.neighbors.size(); ++q) {
        const int k = m.neighbors[q];
        const auto& h = dict.coupling[static_cast<std::size_t>(k)];
        for (std::size_t l = 0; l < h.size(); ++l) {
          nd.terms.push_back({{BlockKind::Node, k}, h[l], coef(m.e, m.e_cols[q] + static_cast<Eigen::Index>(l))});
        }
      }
      for (std::size_t q = 0; q < m.inputs.size(); ++q) {
        const int k = m.inputs[q];
        const auto& g = dict.input[static_cast<std::size_t>(k)];
        for (std::size_t l = 0; l < g.size(); ++l) {
          nd.terms.push_back({{BlockKind::Input, k}, g[l], coef(m.b, m.b_cols[q] + static_cast<Eigen::Index>(l))});
        }
      }
    }
    p.nodes.push_back(std::move(nd));
  }
  return p;
}

GlobalLiftedModel assemble_global(const SnapshotDataset& ds, const std::vector<LocalLiftedModel>& models,
                                  const LocalDictionary& dict, const LocalOptions& opts) {
  const int n = ds.num_nodes();
  if (static_cast<int>(models.size()) != n) throw ArgumentError("assemble_global: one local model per node is required");
  dict.validate(ds.node_dims, ds.input_dims);
  const auto noff = offsets_of(ds.node_dims);
  const auto ioff = offsets_of(ds.input_dims);

  // z_i = [f_i, extra_i]; slot[k][l] = position of coupling function l inside z_k.
  std::vector<std::vector<ScalarFunction>> extra(static_cast<std::size_t>(n));
  std::vector<std::vector<Eigen::Index>> slot(static_cast<std::size_t>(n));
  GlobalLiftedModel g;
  Eigen::Index zsize = 0;
  for (int k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const auto& f = dict.local[kk];
    for (const auto& h : dict.coupling[kk]) {
      const auto it = std::find(f.begin(), f.end(), h);
      if (it != f.end()) {
        slot[kk].push_back(it - f.begin());
      } else {
        const auto jt = std::find(extra[kk].begin(), extra[kk].end(), h);
        if (jt == extra[kk].end()) extra[kk].push_back(h);
        slot[kk].push_back(static_cast<Eigen::Index>(f.size()) +
                           (std::find(extra[kk].begin(), extra[kk].end(), h) - extra[kk].begin()));
      }
    }
    g.z_offsets.push_back(zsize);
    for (const auto& fn : f) g.z_names.push_back("z" + std::to_string(k) + ":" + fn.text());
    for (const auto& fn : extra[kk]) g.z_names.push_back("z" + std::to_string(k) + ":" + fn.text());
    zsize += static_cast<Eigen::Index>(f.size() + extra[kk].size());
  }
  Eigen::Index vsize = 0;
  for (int k = 0; k < ds.num_inputs(); ++k) {
    g.v_offsets.push_back(vsize);
    for (const auto& fn : dict.input[static_cast<std::size_t>(k)]) g.v_names.push_back("v" + std::to_string(k) + ":" + fn.text());
    vsize += static_cast<Eigen::Index>(dict.input[static_cast<std::size_t>(k)].size());
  }
  g.a = Matrix::Zero(zsize, zsize);
  g.b = Matrix::Zero(zsize, vsize);

  std::vector<Continuous> blocks(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const auto& m = models[i];
    const int node = static_cast<int>(i);
    if (m.node != node || m.a.size() == 0) {
      throw ArgumentError("assemble_global: node " + std::to_string(i) + " has no continuous local model");
    }
    const auto nf = static_cast<Eigen::Index>(dict.local[i].size());
    if (m.a.rows() != nf || m.e.cols() != total_width(dict.coupling, m.neighbors) ||
        m.b.cols() != total_width(dict.input, m.inputs)) {
      std::string who;
      for (int k : m.neighbors) who += " " + std::to_string(k);
      throw ArgumentError("assemble_global: dictionary of node " + std::to_string(i) +
                          " does not match its fitted model (neighbors:" + who + ")");
    }
    if (extra[i].empty()) {
      blocks[i] = {m.a, m.e, m.b, m.log_residual};
      return;
    }
    // Auxiliary regression for the extra coupling functions of node i.
    std::vector<ScalarFunction> own = dict.local[i];
    own.insert(own.end(), extra[i].begin(), extra[i].end());
    const Matrix z = regressor(ds, own, node, m.neighbors, m.inputs, dict, noff, ioff);
    const Matrix target = eval_block(extra[i], ds.y, noff[i], ds.node_dims[i]);
    const Matrix theta_t = (pinv(z, opts.tol) * target).transpose();
    const auto nx = static_cast<Eigen::Index>(extra[i].size());
    const Eigen::Index nz = nf + nx;
    Matrix a_bar = Matrix::Zero(nz, nz);
    a_bar.topLeftCorner(nf, nf) = m.a_bar;
    a_bar.bottomRows(nx) = theta_t.leftCols(nz);
    Matrix e_bar(nz, m.e_bar.cols());
    e_bar << m.e_bar, theta_t.middleCols(nz, m.e_bar.cols());
    Matrix b_bar(nz, m.b_bar.cols());
    b_bar << m.b_bar, theta_t.rightCols(m.b_bar.cols());
    Continuous c = convert(a_bar, e_bar, b_bar, ds.ts, opts, "node " + std::to_string(i) + " (global rows)");
    c.a.topRows(nf).setZero();
    c.a.topLeftCorner(nf, nf) = m.a;
    c.e.topRows(nf) = m.e;
    c.b.topRows(nf) = m.b;
    blocks[i] = std::move(c);
  });

  for (int i = 0; i < n; ++i) {
    const auto& m = models[static_cast<std::size_t>(i)];
    const auto& c = blocks[static_cast<std::size_t>(i)];
    const Eigen::Index r0 = g.z_offsets[static_cast<std::size_t>(i)];
    const Eigen::Index rows = c.a.rows();
    g.a.block(r0, r0, rows, rows) = c.a;
    for (std::size_t q = 0; q < m.neighbors.size(); ++q) {
      const auto k = static_cast<std::size_t>(m.neighbors[q]);
      for (std::size_t l = 0; l < slot[k].size(); ++l) {
        g.a.col(g.z_offsets[k] + slot[k][l]).segment(r0, rows) += c.e.col(m.e_cols[q] + static_cast<Eigen::Index>(l));
      }
    }
    for (std::size_t q = 0; q < m.inputs.size(); ++q) {
      const auto k = static_cast<std::size_t>(m.inputs[q]);
      const auto w = static_cast<Eigen::Index>(dict.input[k].size());
      g.b.block(r0, g.v_offsets[k], rows, w) = c.b.middleCols(m.b_cols[q], w);
    }
  }
  return g;
}

Matrix predict_lifted(const std::vector<LocalLiftedModel>& models, const LocalDictionary& dict,
                      const std::vector<int>& node_dims, const std::vector<int>& input_dims, const Vector& x0,
                      const Matrix& u, int steps) {
  if (steps < 0) throw ArgumentError("predict_lifted: steps must be nonnegative");
  if (models.size() != node_dims.size()) throw ArgumentError("predict_lifted: one local model per node is required");
  const auto noff = offsets_of(node_dims);
  const auto ioff = offsets_of(input_dims);
  int n = 0, mdim = 0;
  for (int d : node_dims) n += d;
  for (int d : input_dims) mdim += d;
  if (x0.size() != n) throw ArgumentError("predict_lifted: x0 has the wrong dimension");
  if (u.cols() != mdim || (steps > 0 && u.rows() < steps)) {
    throw ArgumentError("predict_lifted: input matrix needs one row per step");
  }
  Matrix traj(steps + 1, n);
  traj.row(0) = x0.transpose();
  auto lift = [](const std::vector<ScalarFunction>& fs, const double* p, int dim) {
    Vector v(static_cast<Eigen::Index>(fs.size()));
    for (std::size_t l = 0; l < fs.size(); ++l) {
      v(static_cast<Eigen::Index>(l)) = fs[l](std::span<const double>(p, static_cast<std::size_t>(dim)));
    }
    return v;
  };
  for (int s = 0; s < steps; ++s) {
    const Vector x = traj.row(s).transpose();
    const Vector us = u.row(s).transpose();
    for (std::size_t i = 0; i < models.size(); ++i) {
      const auto& m = models[i];
      Vector z = m.a_bar * lift(dict.local[i], x.data() + noff[i], node_dims[i]);
      for (std::size_t q = 0; q < m.neighbors.size(); ++q) {
        const auto k = static_cast<std::size_t>(m.neighbors[q]);
        const Vector w = lift(dict.coupling[k], x.data() + noff[k], node_dims[k]);
        z += m.e_bar.middleCols(m.e_cols[q], w.size()) * w;
      }
      for (std::size_t q = 0; q < m.inputs.size(); ++q) {
        const auto k = static_cast<std::size_t>(m.inputs[q]);
        const Vector v = lift(dict.input[k], us.data() + ioff[k], input_dims[k]);
        z += m.b_bar.middleCols(m.b_cols[q], v.size()) * v;
      }
      traj.row(s + 1).segment(noff[i], node_dims[i]) = z.head(node_dims[i]).transpose();
    }
    if (!traj.row(s + 1).allFinite()) {
      throw DivergenceError("predict_lifted: prediction diverged at step " + std::to_string(s + 1), s + 1);
    }
  }
  return traj;
}

LocalRun identify_local(const SnapshotDataset& ds, const TopologyEstimate& topo, const LocalDictionary& dict,
                        const LocalOptions& opts) {
  const int n = ds.num_nodes();
  if (static_cast<int>(topo.neighbors.size()) != n) throw ArgumentError("identify_local: topology size differs from dataset");
  dict.validate(ds.node_dims, ds.input_dims);
  LocalRun run;
  run.models.resize(static_cast<std::size_t>(n));
  run.failures.assign(static_cast<std::size_t>(n), std::string());
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const int node = static_cast<int>(i);
    std::vector<int> nb;
    for (int k : topo.neighbors[i])
      if (k != node) nb.push_back(k);
    auto& m = run.models[i];
    m.node = node;
    m.dim = ds.node_dims[i];
    try {
      m = fit_local_discrete(ds, node, nb, topo.inputs[i], dict, opts);
      to_continuous(m, ds.ts, opts);
    } catch (const Error& e) {
      run.failures[i] = e.what();
      m.a.resize(0, 0);
    }
  });
  run.params = extract_parameters(run.models, dict);
  return run;
}

BaselineResult baseline_dual(const SnapshotDataset& ds, const Matrix& f_hat, const LocalDictionary& dict,
                             const WeightOptions& opts) {
  dict.validate(ds.node_dims, ds.input_dims);
  const int n = ds.num_nodes();
  // Per node block: local functions, then coupling functions not already present.
  NodeFunctionSet all;
  all.centering = Centering::Raw;
  for (int k = 0; k < n; ++k) {
    auto fs = dict.local[static_cast<std::size_t>(k)];
    for (const auto& h : dict.coupling[static_cast<std::size_t>(k)])
      if (std::find(fs.begin(), fs.end(), h) == fs.end()) fs.push_back(h);
    all.node_functions.push_back(std::move(fs));
  }
  all.input_functions = dict.input;
  const DesignMatrix design = build_design_matrix(ds, all);
  const WeightEstimate w = estimate_weights(f_hat, ds.node_dims, ds.num_inputs(), design, opts);

  BaselineResult res;
  res.lambda = w.lambda;
  res.delta = w.delta;
  res.warnings = w.warnings;
  for (int i = 0; i < n; ++i) {
    const auto& ci = w.coef[static_cast<std::size_t>(i)];
    NodeModel nd;
    nd.dim = ds.node_dims[static_cast<std::size_t>(i)];
    for (const auto& blk : design.blocks) {
      const auto& fs = blk.kind == BlockKind::Node ? all.node_functions[static_cast<std::size_t>(blk.index)]
                                                    : all.input_functions[static_cast<std::size_t>(blk.index)];
      for (Eigen::Index l = 0; l < blk.width; ++l) {
        const auto row = ci.row(blk.col + l);
        if (row.cwiseAbs().maxCoeff() == 0.0) continue;
        std::vector<double> coef;
        for (Eigen::Index c = 0; c < row.size(); ++c) coef.push_back(row(c));
        nd.terms.push_back({{blk.kind, blk.index}, fs[static_cast<std::size_t>(l)], coef});
      }
    }
    res.params.nodes.push_back(std::move(nd));
  }
  return res;
}

}  // namespace netkoop
