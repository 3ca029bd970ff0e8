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

#include "npvi/variational.hpp"

#include <algorithm>
#include <string>

#include "npvi/error.hpp"

namespace npvi {

VariationalParams::VariationalParams(Index n, Index k)
    : k(k), mu(n, 0.0), log_diag(n, 0.0), off_diag(n * k, 0.0) {}

VariationalParams VariationalParams::prior_init(const NeighborGraph& graph,
                                                const VecchiaConditionals& cond) {
  VariationalParams p(graph.size(), graph.k);
  for (Index i = 0; i < graph.size(); ++i) p.log_diag[i] = 0.5 * std::log(cond.cond_var[i]);
  return p;
}

Index VariationalParams::free_factor_entries(const NeighborGraph& graph) {
  Index total = 0;
  for (Index i = 0; i < graph.size(); ++i) total += graph.parents_of(i).size() + 1;
  return total;
}

double sample_marginal(Index i, const VariationalParams& params, const NeighborGraph& graph,
                       std::span<const double> eps) {
  const auto pa = graph.parents_of(i);
  const auto row = params.off_row(i);
  double f = params.mu[i];
  for (Index a = 0; a < pa.size(); ++a) f += row[a] * eps[a];
  return f + params.diag(i) * eps[pa.size()];
}

std::vector<double> sample_joint(const VariationalParams& params, const NeighborGraph& graph,
                                 std::span<const double> eps) {
  if (eps.size() != graph.size()) {
    throw InputError("sample_joint: expected " + std::to_string(graph.size()) +
                     " noise values, got " + std::to_string(eps.size()));
  }
  std::vector<double> f(graph.size());
  for (Index i = 0; i < graph.size(); ++i) {
    const auto pa = graph.parents_of(i);
    const auto row = params.off_row(i);
    double v = params.mu[i] + params.diag(i) * eps[i];
    for (Index a = 0; a < pa.size(); ++a) v += row[a] * eps[pa[a]];
    f[i] = v;
  }
  return f;
}

double covariance_entry(Index i, Index j, const VariationalParams& params,
                        const NeighborGraph& graph) {
  // both supports are ascending parent lists followed by the row's own index
  const auto pi = graph.parents_of(i);
  const auto pj = graph.parents_of(j);
  const auto ri = params.off_row(i);
  const auto rj = params.off_row(j);
  auto col = [](std::span<const Index> pa, Index self, Index a) {
    return a < pa.size() ? pa[a] : self;
  };
  auto val = [&params](std::span<const double> row, std::span<const Index> pa, Index self,
                       Index a) { return a < pa.size() ? row[a] : params.diag(self); };

  double v = 0.0;
  Index a = 0;
  Index b = 0;
  while (a <= pi.size() && b <= pj.size()) {
    const Index ca = col(pi, i, a);
    const Index cb = col(pj, j, b);
    if (ca == cb) {
      v += val(ri, pi, i, a) * val(rj, pj, j, b);
      ++a;
      ++b;
    } else if (ca < cb) {
      ++a;
    } else {
      ++b;
    }
  }
  return v;
}

VariationalParams match_posterior_rows(const Eigen::MatrixXd& target, const NeighborGraph& graph) {
  const Index n = graph.size();
  if (static_cast<Index>(target.rows()) != n || static_cast<Index>(target.cols()) != n) {
    throw InputError("match_posterior_rows: target must be " + std::to_string(n) + "x" +
                     std::to_string(n));
  }
  VariationalParams p(n, graph.k);
  for (Index i = 0; i < n; ++i) {
    const auto pa = graph.parents_of(i);
    const Index m = pa.size();
    // lower-triangular block L[pa, pa]; row pa[r] is already final
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (Index r = 0; r < m; ++r) {
      const auto ppa = graph.parents_of(pa[r]);
      const auto row = p.off_row(pa[r]);
      for (Index c = 0; c < r; ++c) {
        const auto it = std::lower_bound(ppa.begin(), ppa.end(), pa[c]);
        if (it != ppa.end() && *it == pa[c]) M(r, c) = row[it - ppa.begin()];
      }
      M(r, r) = p.diag(pa[r]);
    }
    Eigen::VectorXd v(m);
    for (Index r = 0; r < m; ++r) v[r] = target(pa[r], i);
    const Eigen::VectorXd x = M.triangularView<Eigen::Lower>().solve(v);
    const double residual = target(i, i) - x.squaredNorm();
    if (!(residual > 0.0)) {
      throw NumericalError("match_posterior_rows: non-positive residual variance at row " +
                           std::to_string(i));
    }
    auto row = p.off_row(i);
    for (Index r = 0; r < m; ++r) row[r] = x[r];
    p.log_diag[i] = 0.5 * std::log(residual);
  }
  return p;
}

ParamGradient::ParamGradient(Index n, Index k)
    : k_(k), mu_(n, 0.0), log_diag_(n, 0.0), off_diag_(n * k, 0.0), flag_(n, 0) {}

void ParamGradient::clear() {
  for (Index i : touched_) {
    mu_[i] = 0.0;
    log_diag_[i] = 0.0;
    std::fill_n(off_diag_.begin() + i * k_, k_, 0.0);
    flag_[i] = 0;
  }
  touched_.clear();
}

}  // namespace npvi
