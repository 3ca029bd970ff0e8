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

#include <bit>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "npvi/likelihood.hpp"
#include "npvi/neighbor_graph.hpp"
#include "npvi/variational.hpp"

namespace npvi {

/// Standard normal draws for the reparameterized marginal samples of a batch.
/// Batch position p owns `samples` consecutive blocks of |parents(i)| + 1 values.
struct NoiseDraws {
  Index samples = 1;
  std::vector<double> values;
  std::vector<Index> offset;  // start of position p's first block

  std::span<const double> block(Index p, Index s, Index width) const {
    return {values.data() + offset[p] + s * width, width};
  }
};

NoiseDraws zero_noise(std::span<const Index> batch, const NeighborGraph& graph,
                      Index samples = 1);

template <class Rng>
NoiseDraws draw_noise(std::span<const Index> batch, const NeighborGraph& graph, Index samples,
                      Rng& rng) {
  NoiseDraws d = zero_noise(batch, graph, samples);
  std::normal_distribution<double> normal;
  for (double& v : d.values) v = normal(rng);
  return d;
}

struct TermBreakdown {
  double ell = 0.0;
  double cross = 0.0;
  double ent = 0.0;

  double total() const { return ell + cross + ent; }
};

struct BatchEstimate {
  double value = 0.0;
  TermBreakdown terms;
  ParamGradient grad;
};

/// Dense-indexed sparse accumulator for the row combination Q = L_i - b_i^T L_parents.
/// Only the support union is visited and reset, so each use costs O(K^2).
class SupportAccumulator {
 public:
  SupportAccumulator() { rehash(64); }
  explicit SupportAccumulator(Index expected_support) {
    Index slots = 64;
    while (slots < 2 * expected_support) slots *= 2;
    rehash(slots);
  }

  /// Returns the slot holding `col`; slots stay valid until the next reset() or
  /// until the support outgrows the reserved size.
  Index add(Index col, double v) {
    if (2 * (cols_.size() + 1) > keys_.size()) rehash(2 * keys_.size());
    const Index s = probe(col);
    if (keys_[s] == kEmpty) {
      keys_[s] = col;
      cols_.push_back(col);
      slots_.push_back(s);
    }
    values_[s] += v;
    return s;
  }
  double slot_value(Index s) const { return values_[s]; }
  void reserve(Index support) {
    Index slots = keys_.size();
    while (slots < 2 * support) slots *= 2;
    if (slots != keys_.size()) rehash(slots);
  }
  double operator[](Index col) const {
    const Index s = probe(col);
    return keys_[s] == kEmpty ? 0.0 : values_[s];
  }
  /// Columns in first-touch order.
  const std::vector<Index>& support() const { return cols_; }
  void reset() {
    for (Index s : slots_) {
      keys_[s] = kEmpty;
      values_[s] = 0.0;
    }
    cols_.clear();
    slots_.clear();
  }

 private:
  static constexpr Index kEmpty = static_cast<Index>(-1);

  Index probe(Index col) const {
    const Index mask = keys_.size() - 1;
    Index s = (col * 0x9E3779B97F4A7C15ull) >> shift_;
    while (keys_[s] != kEmpty && keys_[s] != col) s = (s + 1) & mask;
    return s;
  }
  void rehash(Index slots) {
    std::vector<Index> cols = std::move(cols_);
    std::vector<double> vals;
    vals.reserve(cols.size());
    for (Index c : cols) vals.push_back((*this)[c]);
    keys_.assign(slots, kEmpty);
    values_.assign(slots, 0.0);
    shift_ = 64 - std::countr_zero(static_cast<std::uint64_t>(slots));
    cols_.clear();
    slots_.clear();
    for (std::size_t j = 0; j < cols.size(); ++j) add(cols[j], vals[j]);
  }

  std::vector<Index> keys_;
  std::vector<double> values_;
  std::vector<Index> cols_;
  std::vector<Index> slots_;
  int shift_ = 64;
};

/// (N/|S|) sum_{i in S} log p(y_i | f_i) with f_i = mu_i + L_i eps, averaged over samples.
/// Gradients are accumulated (added) into `grad` when it is non-null.
double estimate_ell(std::span<const Index> batch, const VariationalParams& params,
                    const NeighborGraph& graph, const LikelihoodModel& lik,
                    std::span<const double> y, const NoiseDraws& noise, ParamGradient* grad);

/// 0.5 (N log(2 pi e) + (N/|S|) sum_{i in S} log L_ii^2).
double estimate_entropy(std::span<const Index> batch, const VariationalParams& params,
                        ParamGradient* grad);

/// (N/|S|) sum_{i in S} E_q[log p(f_i | f_parents(i))] in closed form, all constants kept.
double estimate_cross(std::span<const Index> batch, const VariationalParams& params,
                      const NeighborGraph& graph, const VecchiaConditionals& cond,
                      ParamGradient* grad, SupportAccumulator* scratch = nullptr);

TermBreakdown estimate_elbo(std::span<const Index> batch, const VariationalParams& params,
                            const NeighborGraph& graph, const VecchiaConditionals& cond,
                            const LikelihoodModel& lik, std::span<const double> y,
                            const NoiseDraws& noise, ParamGradient* grad,
                            SupportAccumulator* scratch = nullptr);

/// Convenience form that allocates its own gradient buffer.
BatchEstimate estimate_elbo(std::span<const Index> batch, const VariationalParams& params,
                            const NeighborGraph& graph, const VecchiaConditionals& cond,
                            const LikelihoodModel& lik, std::span<const double> y,
                            const NoiseDraws& noise);

std::vector<Index> all_indices(Index n);

}  // namespace npvi
