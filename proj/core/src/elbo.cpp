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

#include "npvi/elbo.hpp"

#include <cmath>
#include <numeric>
#include <optional>

namespace npvi {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

NoiseDraws zero_noise(std::span<const Index> batch, const NeighborGraph& graph, Index samples) {
  NoiseDraws d;
  d.samples = samples;
  d.offset.resize(batch.size());
  Index total = 0;
  for (Index p = 0; p < batch.size(); ++p) {
    d.offset[p] = total;
    total += samples * (graph.parents_of(batch[p]).size() + 1);
  }
  d.values.assign(total, 0.0);
  return d;
}

std::vector<Index> all_indices(Index n) {
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

double estimate_ell(std::span<const Index> batch, const VariationalParams& params,
                    const NeighborGraph& graph, const LikelihoodModel& lik,
                    std::span<const double> y, const NoiseDraws& noise, ParamGradient* grad) {
  if (batch.empty()) return 0.0;
  const double scale = static_cast<double>(graph.size()) / static_cast<double>(batch.size()) /
                       static_cast<double>(noise.samples);
  double value = 0.0;
  for (Index p = 0; p < batch.size(); ++p) {
    const Index i = batch[p];
    const Index width = graph.parents_of(i).size() + 1;
    const double lii = params.diag(i);
    for (Index s = 0; s < noise.samples; ++s) {
      const auto eps = noise.block(p, s, width);
      const double f = sample_marginal(i, params, graph, eps);
      value += scale * log_prob(lik, y[i], f);
      if (grad) {
        const double g = scale * dlog_prob_df(lik, y[i], f);
        grad->mu(i) += g;
        auto row = grad->off_row(i);
        for (Index a = 0; a + 1 < width; ++a) row[a] += g * eps[a];
        grad->log_diag(i) += g * eps[width - 1] * lii;
      }
    }
  }
  return value;
}

double estimate_entropy(std::span<const Index> batch, const VariationalParams& params,
                        ParamGradient* grad) {
  const double n = static_cast<double>(params.size());
  if (batch.empty()) return 0.5 * n * (kLog2Pi + 1.0);
  const double scale = n / static_cast<double>(batch.size());
  double sum = 0.0;
  for (Index i : batch) {
    sum += 2.0 * params.log_diag[i];
    if (grad) grad->log_diag(i) += scale;
  }
  return 0.5 * (n * (kLog2Pi + 1.0) + scale * sum);
}

namespace {

template <class T>
void prefetch_range(const T* p, Index n) {
  const char* b = reinterpret_cast<const char*>(p);
  const char* e = reinterpret_cast<const char*>(p + n);
  for (; b < e; b += 64) __builtin_prefetch(b);
}

// Pulls in what estimate_cross reads for batch point i: its own and its parents' rows.
void prefetch_point(Index i, const VariationalParams& params, const NeighborGraph& graph,
                    const VecchiaConditionals& cond) {
  const auto pa = graph.parents_of(i);
  prefetch_range(cond.b[i].data(), pa.size());
  auto row = [&](Index r) {
    const auto rpa = graph.parents_of(r);
    prefetch_range(rpa.data(), rpa.size());
    prefetch_range(params.off_diag.data() + r * params.k, rpa.size());
    __builtin_prefetch(&params.mu[r]);
    __builtin_prefetch(&params.log_diag[r]);
  };
  for (Index r : pa) row(r);
  row(i);
}

}  // namespace

double estimate_cross(std::span<const Index> batch, const VariationalParams& params,
                      const NeighborGraph& graph, const VecchiaConditionals& cond,
                      ParamGradient* grad, SupportAccumulator* scratch) {
  if (batch.empty()) return 0.0;
  std::optional<SupportAccumulator> local;
  if (!scratch) {
    local.emplace();
    scratch = &*local;
  }
  SupportAccumulator& Q = *scratch;
  Q.reset();
  Q.reserve((graph.k + 1) * (graph.k + 1));
  const double scale = static_cast<double>(graph.size()) / static_cast<double>(batch.size());
  std::vector<Index> slots;
  slots.reserve((graph.k + 1) * (graph.k + 1));

  if (batch.size() > 1) prefetch_range(graph.parents_of(batch[1]).data(), graph.k);
  prefetch_point(batch[0], params, graph, cond);

  double value = 0.0;
  for (Index p = 0; p < batch.size(); ++p) {
    const Index i = batch[p];
    if (p + 2 < batch.size()) {
      __builtin_prefetch(&graph.parents[batch[p + 2]]);
      __builtin_prefetch(&cond.b[batch[p + 2]]);
    }
    if (p + 1 < batch.size()) prefetch_point(batch[p + 1], params, graph, cond);

    const auto pa = graph.parents_of(i);
    const auto& b = cond.b[i];
    const double c = cond.cond_var[i];

    // rows r in (parents..., i) with coefficients (-b..., 1)
    auto coef = [&](Index a) { return a < pa.size() ? -b[a] : 1.0; };
    auto row_of = [&](Index a) { return a < pa.size() ? pa[a] : i; };

    double m = params.mu[i];
    for (Index a = 0; a < pa.size(); ++a) m -= b[a] * params.mu[pa[a]];

    Q.reset();
    slots.clear();
    for (Index a = 0; a <= pa.size(); ++a) {
      const Index r = row_of(a);
      const double w = coef(a);
      const auto rpa = graph.parents_of(r);
      const auto row = params.off_row(r);
      for (Index t = 0; t < rpa.size(); ++t) slots.push_back(Q.add(rpa[t], w * row[t]));
      slots.push_back(Q.add(r, w * params.diag(r)));
    }
    double q2 = 0.0;
    for (Index col : Q.support()) q2 += Q[col] * Q[col];

    value += scale * (-0.5 * (kLog2Pi + std::log(c)) - 0.5 * (q2 + m * m) / c);

    if (grad) {
      const double g = -scale / c;
      Index s = 0;
      for (Index a = 0; a <= pa.size(); ++a) {
        const Index r = row_of(a);
        const double w = coef(a);
        const auto rpa = graph.parents_of(r);
        grad->mu(r) += g * m * w;
        auto grow = grad->off_row(r);
        for (Index t = 0; t < rpa.size(); ++t) grow[t] += g * Q.slot_value(slots[s++]) * w;
        grad->log_diag(r) += g * Q.slot_value(slots[s++]) * w * params.diag(r);
      }
    }
  }
  Q.reset();
  return value;
}

TermBreakdown estimate_elbo(std::span<const Index> batch, const VariationalParams& params,
                            const NeighborGraph& graph, const VecchiaConditionals& cond,
                            const LikelihoodModel& lik, std::span<const double> y,
                            const NoiseDraws& noise, ParamGradient* grad,
                            SupportAccumulator* scratch) {
  TermBreakdown t;
  t.ell = estimate_ell(batch, params, graph, lik, y, noise, grad);
  t.cross = estimate_cross(batch, params, graph, cond, grad, scratch);
  t.ent = estimate_entropy(batch, params, grad);
  return t;
}

BatchEstimate estimate_elbo(std::span<const Index> batch, const VariationalParams& params,
                            const NeighborGraph& graph, const VecchiaConditionals& cond,
                            const LikelihoodModel& lik, std::span<const double> y,
                            const NoiseDraws& noise) {
  BatchEstimate est;
  est.grad = ParamGradient(params.size(), params.k);
  est.terms = estimate_elbo(batch, params, graph, cond, lik, y, noise, &est.grad);
  est.value = est.terms.total();
  return est;
}

}  // namespace npvi
