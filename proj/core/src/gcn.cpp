/* Copyright 2026 The NPVI Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "npvi/gcn.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "npvi/error.hpp"

namespace npvi {

namespace {
constexpr Index kUnused = std::numeric_limits<Index>::max();

GCNNet make_net(const std::vector<Index>& widths) {
  if (widths.size() < 2 || widths.front() != 1 || widths.back() != 1) {
    throw InputError("GCN widths must start and end with 1");
  }
  GCNNet net;
  for (Index l = 0; l + 1 < widths.size(); ++l) {
    net.layers.push_back(Eigen::MatrixXd::Zero(widths[l], widths[l + 1]));
  }
  return net;
}

void glorot_fill(GCNNet& net, std::mt19937_64& rng) {
  for (auto& W : net.layers) {
    const double r = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
    std::uniform_real_distribution<double> u(-r, r);
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
      for (Eigen::Index a = 0; a < W.rows(); ++a) W(a, c) = u(rng);
    }
  }
}
}  // namespace

std::vector<Index> GCNNet::widths() const {
  std::vector<Index> w;
  if (layers.empty()) return w;
  w.push_back(layers.front().rows());
  for (const auto& W : layers) w.push_back(W.cols());
  return w;
}

Index GCNNet::parameter_count() const {
  Index n = 0;
  for (const auto& W : layers) n += W.size();
  return n;
}

GCNNet GCNNet::zeros_like() const {
  GCNNet z;
  for (const auto& W : layers) z.layers.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
  return z;
}

void GCNNet::set_zero() {
  for (auto& W : layers) W.setZero();
}

GCNWeights GCNWeights::glorot(const std::vector<Index>& widths, std::uint64_t seed) {
  GCNWeights w = zeros(widths);
  std::mt19937_64 rng(seed);
  glorot_fill(w.mu_net, rng);
  glorot_fill(w.l_net, rng);
  return w;
}

GCNWeights GCNWeights::zeros(const std::vector<Index>& widths) {
  return {make_net(widths), make_net(widths)};
}

LocalContext build_local_context(Index i, const NeighborGraph& graph, const PointSet& X,
                                 const KernelConfig& cfg, std::span<const double> y) {
  const auto pa = graph.parents_of(i);
  const Index m = pa.size() + 1;
  auto node = [&](Index a) { return a == 0 ? i : pa[a - 1]; };

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  A(0, 0) = cfg.prior_variance();
  for (Index a = 1; a < m; ++a) {
    A(a, 0) = rbf(point(X, node(a)), point(X, i), cfg);
    A(a, a) = cfg.prior_variance();
    for (Index b = 1; b < a; ++b) {
      A(a, b) = A(b, a) = rbf(point(X, node(a)), point(X, node(b)), cfg);
    }
  }
  Eigen::VectorXd d = A.rowwise().sum();
  for (Index a = 0; a < m; ++a) {
    if (!(d[a] > 0.0)) {
      throw NumericalError("build_local_context: non-positive row sum at point " +
                           std::to_string(i));
    }
    d[a] = 1.0 / std::sqrt(d[a]);
  }
  LocalContext ctx;
  ctx.adj_norm = d.asDiagonal() * A * d.asDiagonal();
  ctx.y_local.resize(m);
  for (Index a = 0; a < m; ++a) ctx.y_local[a] = y[node(a)];
  return ctx;
}

std::vector<LocalContext> build_contexts(const NeighborGraph& graph, const PointSet& X,
                                         const KernelConfig& cfg, std::span<const double> y) {
  std::vector<LocalContext> out;
  out.reserve(graph.size());
  for (Index i = 0; i < graph.size(); ++i) out.push_back(build_local_context(i, graph, X, cfg, y));
  return out;
}

Eigen::VectorXd gcn_forward(const GCNNet& net, const LocalContext& ctx, ForwardCache* cache) {
  Eigen::MatrixXd H = ctx.y_local;
  if (cache) {
    cache->propagated.resize(net.layers.size());
    cache->pre.resize(net.layers.size());
  }
  for (Index l = 0; l < net.layers.size(); ++l) {
    Eigen::MatrixXd P = ctx.adj_norm * H;
    Eigen::MatrixXd Z = P * net.layers[l];
    H = (l + 1 < net.layers.size()) ? Eigen::MatrixXd(Z.cwiseMax(0.0)) : Z;
    if (cache) {
      cache->propagated[l] = std::move(P);
      cache->pre[l] = std::move(Z);
    }
  }
  return H.col(0);
}

void gcn_backward(const GCNNet& net, const LocalContext& ctx, const ForwardCache& cache,
                  const Eigen::VectorXd& d_output, GCNNet& grad) {
  Eigen::MatrixXd dH = d_output;
  for (Index l = net.layers.size(); l-- > 0;) {
    Eigen::MatrixXd dZ = dH;
    if (l + 1 < net.layers.size()) {
      dZ = (cache.pre[l].array() > 0.0).select(dH, 0.0);
    }
    grad.layers[l].noalias() += cache.propagated[l].transpose() * dZ;
    if (l > 0) dH = ctx.adj_norm.transpose() * (dZ * net.layers[l].transpose());
  }
}

InferredRow infer_params(const GCNWeights& weights, const LocalContext& ctx) {
  const Eigen::VectorXd mu_out = gcn_forward(weights.mu_net, ctx);
  const Eigen::VectorXd l_out = gcn_forward(weights.l_net, ctx);
  InferredRow row;
  row.mu = mu_out.mean();
  row.diag_raw = l_out[0];
  row.diag = softplus(l_out[0]);
  row.off_diag.assign(l_out.data() + 1, l_out.data() + l_out.size());
  return row;
}

VariationalParams materialize_params(const GCNWeights& weights,
                                     std::span<const LocalContext> contexts, Index k) {
  VariationalParams p(contexts.size(), k);
  for (Index i = 0; i < contexts.size(); ++i) {
    const Eigen::VectorXd mu_out = gcn_forward(weights.mu_net, contexts[i]);
    const Eigen::VectorXd l_out = gcn_forward(weights.l_net, contexts[i]);
    p.mu[i] = mu_out.mean();
    p.log_diag[i] = log_softplus(l_out[0]);
    auto row = p.off_row(i);
    for (Eigen::Index a = 1; a < l_out.size(); ++a) row[a - 1] = l_out[a];
  }
  return p;
}

AmortizedElbo::AmortizedElbo(const NeighborGraph& graph, const VecchiaConditionals& cond,
                             const LikelihoodModel& lik, std::span<const double> y,
                             std::span<const LocalContext> contexts)
    : graph_(graph),
      cond_(cond),
      lik_(lik),
      y_(y),
      contexts_(contexts),
      params_(graph.size(), graph.k),
      grad_(graph.size(), graph.k),
      slot_(graph.size(), kUnused) {
  if (contexts.size() != graph.size()) {
    throw InputError("AmortizedElbo: one local context per point is required");
  }
}

TermBreakdown AmortizedElbo::evaluate(const GCNWeights& weights, std::span<const Index> batch,
                                      const NoiseDraws& noise, GCNWeights* grad) {
  for (Index r : closure_) slot_[r] = kUnused;
  closure_.clear();
  auto include = [&](Index r) {
    if (slot_[r] == kUnused) {
      slot_[r] = closure_.size();
      closure_.push_back(r);
    }
  };
  for (Index i : batch) {
    include(i);
    for (Index j : graph_.parents_of(i)) include(j);
  }

  mu_cache_.resize(std::max(mu_cache_.size(), closure_.size()));
  l_cache_.resize(std::max(l_cache_.size(), closure_.size()));
  l_out_.resize(std::max(l_out_.size(), closure_.size()));
  for (Index s = 0; s < closure_.size(); ++s) {
    const Index r = closure_[s];
    const auto& ctx = contexts_[r];
    const Eigen::VectorXd mu_out = gcn_forward(weights.mu_net, ctx, &mu_cache_[s]);
    l_out_[s] = gcn_forward(weights.l_net, ctx, &l_cache_[s]);
    params_.mu[r] = mu_out.mean();
    params_.log_diag[r] = log_softplus(l_out_[s][0]);
    auto row = params_.off_row(r);
    for (Eigen::Index a = 1; a < l_out_[s].size(); ++a) row[a - 1] = l_out_[s][a];
  }

  grad_.clear();
  const TermBreakdown terms = estimate_elbo(batch, params_, graph_, cond_, lik_, y_, noise,
                                            grad ? &grad_ : nullptr, &scratch_);
  if (!grad) return terms;

  for (Index r : grad_.touched_rows()) {
    const Index s = slot_[r];
    const auto& ctx = contexts_[r];
    const Index m = ctx.nodes();
    const Eigen::VectorXd d_mu =
        Eigen::VectorXd::Constant(m, grad_.mu_value(r) / static_cast<double>(m));
    gcn_backward(weights.mu_net, ctx, mu_cache_[s], d_mu, grad->mu_net);

    Eigen::VectorXd d_l(m);
    d_l[0] = grad_.log_diag_value(r) * dlog_softplus(l_out_[s][0]);
    const auto off = grad_.off_row_value(r);
    for (Index a = 1; a < m; ++a) d_l[a] = off[a - 1];
    gcn_backward(weights.l_net, ctx, l_cache_[s], d_l, grad->l_net);
  }
  return terms;
}

}  // namespace npvi
