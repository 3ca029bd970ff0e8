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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "npvi/elbo.hpp"
#include "npvi/kernel.hpp"

namespace npvi {

/// Weight matrices of one graph convolutional network; layers[l] maps width l to width l+1.
struct GCNNet {
  std::vector<Eigen::MatrixXd> layers;

  std::vector<Index> widths() const;
  Index parameter_count() const;
  GCNNet zeros_like() const;
  void set_zero();
};

/// The two inference networks: one for the variational mean, one for the factor row.
struct GCNWeights {
  GCNNet mu_net;
  GCNNet l_net;

  /// 1 -> 20 -> 10 -> 1
  static std::vector<Index> default_widths() { return {1, 20, 10, 1}; }
  /// Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer.
  static GCNWeights glorot(const std::vector<Index>& widths, std::uint64_t seed);
  static GCNWeights zeros(const std::vector<Index>& widths);

  GCNWeights zeros_like() const { return {mu_net.zeros_like(), l_net.zeros_like()}; }
  void set_zero() {
    mu_net.set_zero();
    l_net.set_zero();
  }
};

/// Local graph of point i and its parents (node 0 is i, then parents ascending).
/// The adjacency has a zero upper-right block so node i only aggregates itself.
struct LocalContext {
  Eigen::MatrixXd adj_norm;  // D^-1/2 A D^-1/2, D = diag(row sums of A)
  Eigen::VectorXd y_local;

  Index nodes() const { return static_cast<Index>(y_local.size()); }
};

LocalContext build_local_context(Index i, const NeighborGraph& graph, const PointSet& X,
                                 const KernelConfig& cfg, std::span<const double> y);

std::vector<LocalContext> build_contexts(const NeighborGraph& graph, const PointSet& X,
                                         const KernelConfig& cfg, std::span<const double> y);

struct ForwardCache {
  std::vector<Eigen::MatrixXd> propagated;  // A_norm * H_l
  std::vector<Eigen::MatrixXd> pre;         // A_norm * H_l * W_l
};

/// ReLU on hidden layers, identity on the last; returns the last layer as a vector.
Eigen::VectorXd gcn_forward(const GCNNet& net, const LocalContext& ctx,
                            ForwardCache* cache = nullptr);

/// Adds d(objective)/dW for every layer into `grad`, given d(objective)/d(output).
void gcn_backward(const GCNNet& net, const LocalContext& ctx, const ForwardCache& cache,
                  const Eigen::VectorXd& d_output, GCNNet& grad);

struct InferredRow {
  double mu = 0.0;
  double diag_raw = 0.0;  // network output before softplus
  double diag = 0.0;      // L_ii = softplus(diag_raw)
  std::vector<double> off_diag;
};

/// mu_i is the mean of the mean-network output; L_ii is softplus of the factor
/// network's node-i output and the remaining outputs are L_{i,parents} in order.
InferredRow infer_params(const GCNWeights& weights, const LocalContext& ctx);

/// Evaluates every row of q(f) from the networks.
VariationalParams materialize_params(const GCNWeights& weights,
                                     std::span<const LocalContext> contexts, Index k);

/// Batch ELBO as a function of the network weights. Only the rows in the batch and
/// their parents are evaluated, so one call costs O(|S| K^2) network work.
class AmortizedElbo {
 public:
  AmortizedElbo(const NeighborGraph& graph, const VecchiaConditionals& cond,
                const LikelihoodModel& lik, std::span<const double> y,
                std::span<const LocalContext> contexts);

  /// Returns the ELBO estimate; when grad is non-null, adds d(ELBO)/dW into it.
  TermBreakdown evaluate(const GCNWeights& weights, std::span<const Index> batch,
                         const NoiseDraws& noise, GCNWeights* grad);

 private:
  const NeighborGraph& graph_;
  const VecchiaConditionals& cond_;
  LikelihoodModel lik_;
  std::span<const double> y_;
  std::span<const LocalContext> contexts_;

  VariationalParams params_;
  ParamGradient grad_;
  SupportAccumulator scratch_;
  std::vector<Index> slot_;  // row -> closure position, npos when unused
  std::vector<Index> closure_;
  std::vector<ForwardCache> mu_cache_;
  std::vector<ForwardCache> l_cache_;
  std::vector<Eigen::VectorXd> l_out_;
};

}  // namespace npvi
