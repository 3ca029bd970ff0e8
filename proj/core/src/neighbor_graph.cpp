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

#include "npvi/neighbor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "npvi/error.hpp"
#include "npvi/kd_tree.hpp"

namespace npvi {

void NeighborGraph::validate() const {
  if (order.size() != parents.size()) {
    throw InputError("NeighborGraph: order has " + std::to_string(order.size()) +
                     " entries for " + std::to_string(parents.size()) + " points");
  }
  for (Index i = 0; i < parents.size(); ++i) {
    const auto& pa = parents[i];
    if (pa.size() != std::min(k, i)) {
      throw InputError("NeighborGraph: point " + std::to_string(i) + " has " +
                       std::to_string(pa.size()) + " parents, expected " +
                       std::to_string(std::min(k, i)));
    }
    for (Index a = 0; a < pa.size(); ++a) {
      if (pa[a] >= i || (a > 0 && pa[a] <= pa[a - 1])) {
        throw InputError("NeighborGraph: parents of point " + std::to_string(i) +
                         " are not strictly increasing lower indices");
      }
    }
  }
}

NeighborGraph build_dag(const PointSet& X, Index k) {
  const auto n = static_cast<Index>(X.rows());
  if (n == 0) throw InputError("build_dag: no points");
  if (k == 0) throw InputError("build_dag: neighbor budget k must be at least 1");
  const KdTree tree(X);  // rejects non-finite coordinates

  NeighborGraph g;
  g.k = k;
  g.parents.assign(n, {});
  g.order.resize(n);
  std::iota(g.order.begin(), g.order.end(), Index{0});

  // step 1 + 2: symmetric k-NN edges, oriented from smaller to larger index
  for (Index i = 0; i < n; ++i) {
    KnnFilter self;
    self.exclude = i;
    for (const auto& nb : tree.knn(point(X, i), k, self)) {
      const Index lo = std::min(i, nb.index);
      const Index hi = std::max(i, nb.index);
      g.parents[hi].push_back(lo);
    }
  }

  // step 3: enforce |parents(i)| == min(k, i)
  for (Index i = 0; i < n; ++i) {
    auto& pa = g.parents[i];
    std::sort(pa.begin(), pa.end());
    pa.erase(std::unique(pa.begin(), pa.end()), pa.end());
    const Index target = std::min(k, i);
    if (pa.size() > target) {
      pa.resize(target);
    } else if (pa.size() < target) {
      KnnFilter lower;
      lower.below = i;
      std::vector<Index> extra;
      for (const auto& nb : tree.knn(point(X, i), target, lower)) {
        if (pa.size() + extra.size() == target) break;
        if (!std::binary_search(pa.begin(), pa.end(), nb.index)) extra.push_back(nb.index);
      }
      pa.insert(pa.end(), extra.begin(), extra.end());
      std::sort(pa.begin(), pa.end());
    }
  }
  return g;
}

std::vector<Index> ordering(Index n, std::optional<std::uint64_t> seed) {
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  if (seed) {
    std::mt19937_64 rng(*seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

PointSet permute_rows(const PointSet& X, std::span<const Index> order) {
  PointSet out(X.rows(), X.cols());
  for (Index i = 0; i < order.size(); ++i) out.row(i) = X.row(order[i]);
  return out;
}

Conditional condition_on(const PointSet& X, std::span<const Index> given,
                         std::span<const double> x, double prior_var, const KernelConfig& cfg) {
  Conditional c;
  const Index m = given.size();
  if (m == 0) {
    c.var = prior_var;
    return c;
  }
  const Eigen::MatrixXd S = kernel_submatrix(X, given, cfg);
  Eigen::VectorXd s(m);
  for (Index a = 0; a < m; ++a) {
    s[a] = rbf(point(X, given[a]), x, cfg);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("conditioning block is not positive definite");
  }
  c.b = llt.solve(s);
  c.var = prior_var - s.dot(c.b);
  if (!(c.var > 0.0)) {
    throw NumericalError("non-positive conditional variance " + std::to_string(c.var));
  }
  return c;
}

VecchiaConditionals vecchia_conditionals(const NeighborGraph& graph, const PointSet& X,
                                         const KernelConfig& cfg) {
  cfg.validate();
  if (graph.size() != static_cast<Index>(X.rows())) {
    throw InputError("vecchia_conditionals: graph has " + std::to_string(graph.size()) +
                     " points but X has " + std::to_string(X.rows()));
  }
  VecchiaConditionals out;
  out.b.resize(graph.size());
  out.cond_var.resize(graph.size());
  for (Index i = 0; i < graph.size(); ++i) {
    try {
      auto c = condition_on(X, graph.parents_of(i), point(X, i), cfg.prior_variance(), cfg);
      out.b[i] = std::move(c.b);
      out.cond_var[i] = c.var;
    } catch (const NumericalError& e) {
      throw NumericalError("vecchia_conditionals: point " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

double vecchia_log_prior(std::span<const double> f, const NeighborGraph& graph,
                         const VecchiaConditionals& cond) {
  if (f.size() != graph.size()) {
    throw InputError("vecchia_log_prior: expected " + std::to_string(graph.size()) +
                     " values, got " + std::to_string(f.size()));
  }
  constexpr double log_2pi = 1.8378770664093454836;
  double total = 0.0;
  for (Index i = 0; i < graph.size(); ++i) {
    if (!std::isfinite(f[i])) throw InputError("vecchia_log_prior: non-finite value");
    const auto pa = graph.parents_of(i);
    double mean = 0.0;
    for (Index a = 0; a < pa.size(); ++a) mean += cond.b[i][a] * f[pa[a]];
    const double r = f[i] - mean;
    total += -0.5 * (log_2pi + std::log(cond.cond_var[i])) - 0.5 * r * r / cond.cond_var[i];
  }
  return total;
}

}  // namespace npvi
