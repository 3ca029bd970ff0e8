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

#include <benchmark/benchmark.h>

#include <random>

#include "npvi/dataset.hpp"
#include "npvi/gcn.hpp"
#include "npvi/kd_tree.hpp"
#include "npvi/neighbor_graph.hpp"
#include "npvi/trainer.hpp"

namespace {

using namespace npvi;

PointSet uniform(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  PointSet X(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) X(i, j) = u(rng);
  }
  return X;
}

Dataset poisson_data(Index n) {
  SynthOptions o;
  o.n = n;
  o.length_scale = 0.1;
  o.likelihood = LikelihoodModel::poisson();
  o.seed = 1;
  o.vecchia_k = 10;
  return generate_synthetic(o);
}

void BM_NpviStep(benchmark::State& state) {
  const auto data = poisson_data(state.range(0));
  auto c = TrainConfig::defaults(Method::npvi);
  c.k = state.range(1);
  Trainer t(data, c, KernelConfig::with_length_scale(0.1), LikelihoodModel::poisson());
  for (auto _ : state) benchmark::DoNotOptimize(t.step());
}
BENCHMARK(BM_NpviStep)
    ->ArgsProduct({{1000, 10000, 100000}, {10}})
    ->Args({10000, 20})
    ->Args({10000, 40})
    ->Unit(benchmark::kMicrosecond);

void BM_NpviNnStep(benchmark::State& state) {
  const auto data = poisson_data(state.range(0));
  auto c = TrainConfig::defaults(Method::npvi_nn);
  c.k = 10;
  Trainer t(data, c, KernelConfig::with_length_scale(0.1), LikelihoodModel::poisson());
  for (auto _ : state) benchmark::DoNotOptimize(t.step());
}
BENCHMARK(BM_NpviNnStep)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_KdTreeBuild(benchmark::State& state) {
  const auto X = uniform(state.range(0), 2, 2);
  for (auto _ : state) {
    KdTree tree(X);
    benchmark::DoNotOptimize(tree.size());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->RangeMultiplier(10)->Range(1000, 100000)->Complexity(
    benchmark::oNLogN);

void BM_KdTreeKnn(benchmark::State& state) {
  const auto X = uniform(state.range(0), 2, 3);
  const auto Q = uniform(1024, 2, 4);
  const KdTree tree(X);
  Index q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.knn(point(Q, q), 10));
    q = (q + 1) % Q.rows();
  }
}
BENCHMARK(BM_KdTreeKnn)->RangeMultiplier(10)->Range(1000, 100000);

void BM_BuildDag(benchmark::State& state) {
  const auto X = uniform(state.range(0), 2, 5);
  for (auto _ : state) benchmark::DoNotOptimize(build_dag(X, 10));
}
BENCHMARK(BM_BuildDag)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GcnForward(benchmark::State& state) {
  const auto data = poisson_data(2000);
  const auto g = build_dag(data.X, state.range(0));
  const auto contexts = build_contexts(g, data.X, KernelConfig::with_length_scale(0.1), data.y);
  const auto w = GCNWeights::glorot(GCNWeights::default_widths(), 6);
  Index i = g.size() - 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gcn_forward(w.mu_net, contexts[i]));
    i = i == g.k ? g.size() - 1 : i - 1;
  }
}
BENCHMARK(BM_GcnForward)->Arg(10)->Arg(20)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
