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
#include <optional>
#include <span>
#include <vector>

#include "npvi/kernel.hpp"

namespace npvi {

/// Parent DAG over data points. Parents of i are strictly smaller indices,
/// sorted ascending, and |parents(i)| == min(k, i).
struct NeighborGraph {
  Index k = 0;
  std::vector<std::vector<Index>> parents;
  /// order[i] is the row of the caller's original data that sits at position i.
  std::vector<Index> order;

  Index size() const { return parents.size(); }
  std::span<const Index> parents_of(Index i) const { return parents[i]; }

  /// Throws InputError if any structural invariant is violated.
  void validate() const;
};

/// Three-step construction: symmetric k-NN edges, orientation toward larger index,
/// then trimming (largest indices dropped first) or filling with the nearest
/// lower-index points until every point has min(k, i) parents.
NeighborGraph build_dag(const PointSet& X, Index k);

/// Random permutation used to study ordering effects; identity when no seed is given.
std::vector<Index> ordering(Index n, std::optional<std::uint64_t> seed);

/// Returns X with rows rearranged so that row i is X.row(order[i]).
PointSet permute_rows(const PointSet& X, std::span<const Index> order);

/// Gaussian conditional of one latent value given a set of others under the GP prior.
struct Conditional {
  Eigen::VectorXd b;  // regression weights on the conditioning values
  double var = 0.0;
};

/// Conditions the value at x (with prior variance prior_var) on the rows of X listed in
/// `given`. Throws NumericalError if the conditioning block is not positive definite.
Conditional condition_on(const PointSet& X, std::span<const Index> given,
                         std::span<const double> x, double prior_var, const KernelConfig& cfg);

struct VecchiaConditionals {
  std::vector<Eigen::VectorXd> b;
  std::vector<double> cond_var;

  Index size() const { return cond_var.size(); }
};

VecchiaConditionals vecchia_conditionals(const NeighborGraph& graph, const PointSet& X,
                                         const KernelConfig& cfg);

/// log p(f) under the nearest-neighbor factorization prod_i p(f_i | f_parents(i)).
double vecchia_log_prior(std::span<const double> f, const NeighborGraph& graph,
                         const VecchiaConditionals& cond);

/// Draws f from the factorized prior sequentially (used when a dense Cholesky is too big).
template <class Rng>
std::vector<double> sample_vecchia_prior(const NeighborGraph& graph,
                                         const VecchiaConditionals& cond, Rng& rng);

}  // namespace npvi

#include <cmath>
#include <random>

namespace npvi {

template <class Rng>
std::vector<double> sample_vecchia_prior(const NeighborGraph& graph,
                                         const VecchiaConditionals& cond, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> f(graph.size());
  for (Index i = 0; i < graph.size(); ++i) {
    const auto pa = graph.parents_of(i);
    double mean = 0.0;
    for (Index a = 0; a < pa.size(); ++a) mean += cond.b[i][a] * f[pa[a]];
    f[i] = mean + std::sqrt(cond.cond_var[i]) * normal(rng);
  }
  return f;
}

}  // namespace npvi
