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

#include <cmath>
#include <span>
#include <vector>

#include "npvi/neighbor_graph.hpp"

namespace npvi {

/// q(f) = N(mu, L L^T) with L sparse lower triangular. Row i of L holds its
/// off-diagonal entries in the first |parents(i)| slots of a width-k row, aligned
/// with graph.parents_of(i); the remaining slots stay zero. The diagonal is kept
/// in log space so L_ii > 0 under any update.
struct VariationalParams {
  Index k = 0;
  std::vector<double> mu;
  std::vector<double> log_diag;
  std::vector<double> off_diag;  // n x k, row-major

  VariationalParams() = default;
  VariationalParams(Index n, Index k);

  Index size() const { return mu.size(); }
  double diag(Index i) const { return std::exp(log_diag[i]); }
  std::span<double> off_row(Index i) { return {off_diag.data() + i * k, k}; }
  std::span<const double> off_row(Index i) const { return {off_diag.data() + i * k, k}; }

  /// mu = 0, off-diagonals = 0, L_ii = sqrt(cond_var_i).
  static VariationalParams prior_init(const NeighborGraph& graph,
                                      const VecchiaConditionals& cond);

  /// Number of free entries in L: n(k+1) - k(k+1)/2 when n > k.
  static Index free_factor_entries(const NeighborGraph& graph);
};

/// f_i = mu_i + sum_a L_{i,parent_a} eps_a + L_ii eps_last. eps has |parents(i)| + 1 entries.
double sample_marginal(Index i, const VariationalParams& params, const NeighborGraph& graph,
                       std::span<const double> eps);

/// f = mu + L eps.
std::vector<double> sample_joint(const VariationalParams& params, const NeighborGraph& graph,
                                 std::span<const double> eps);

/// V_ij = L_i . L_j over the common support of the two rows.
double covariance_entry(Index i, Index j, const VariationalParams& params,
                        const NeighborGraph& graph);

/// Builds L row by row so that (L L^T)_ij equals target(i, j) for every edge j in
/// parents(i) and on the diagonal. mu is left at zero. Throws NumericalError if a
/// row's residual diagonal variance is not positive.
VariationalParams match_posterior_rows(const Eigen::MatrixXd& target, const NeighborGraph& graph);

/// Gradient buffers with the same layout as VariationalParams. Only rows that were
/// written since the last clear() are reset, so clearing costs O(touched rows).
class ParamGradient {
 public:
  ParamGradient() = default;
  ParamGradient(Index n, Index k);

  Index size() const { return mu_.size(); }
  Index k() const { return k_; }

  double& mu(Index i) {
    touch(i);
    return mu_[i];
  }
  double& log_diag(Index i) {
    touch(i);
    return log_diag_[i];
  }
  std::span<double> off_row(Index i) {
    touch(i);
    return {off_diag_.data() + i * k_, k_};
  }

  double mu_value(Index i) const { return mu_[i]; }
  double log_diag_value(Index i) const { return log_diag_[i]; }
  std::span<const double> off_row_value(Index i) const { return {off_diag_.data() + i * k_, k_}; }

  const std::vector<Index>& touched_rows() const { return touched_; }
  void clear();

 private:
  void touch(Index i) {
    if (!flag_[i]) {
      flag_[i] = 1;
      touched_.push_back(i);
    }
  }

  Index k_ = 0;
  std::vector<double> mu_;
  std::vector<double> log_diag_;
  std::vector<double> off_diag_;
  std::vector<unsigned char> flag_;
  std::vector<Index> touched_;
};

}  // namespace npvi
