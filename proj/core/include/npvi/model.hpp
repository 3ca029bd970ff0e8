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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "npvi/gcn.hpp"
#include "npvi/kd_tree.hpp"
#include "npvi/likelihood.hpp"
#include "npvi/neighbor_graph.hpp"
#include "npvi/preprocessing.hpp"
#include "npvi/variational.hpp"

namespace npvi {

enum class Method { npvi, npvi_nn };

std::string to_string(Method method);
Method method_from_string(std::string_view name);

struct TrainingRecord {
  Index step = 0;
  double seconds = 0.0;
  double elbo_estimate = 0.0;
  double val_nll = 0.0;
};

/// Everything needed to predict: prior, graph, training data (stored in graph order)
/// and either the direct variational parameters or the inference-network weights.
struct FittedModel {
  Method method = Method::npvi;
  KernelConfig kernel;
  LikelihoodModel likelihood;
  PointSet X;
  std::vector<double> y;
  NeighborGraph graph;
  VecchiaConditionals cond;
  /// Trained state for npvi; for npvi_nn a cache evaluated from `weights` by prepare().
  VariationalParams params;
  std::optional<GCNWeights> weights;
  /// Ingestion transforms of the training data, for mapping targets back.
  Preprocessing prep;
  std::vector<TrainingRecord> log;
  std::shared_ptr<const KdTree> index;

  bool ready() const;
  /// Builds the nearest-neighbor index and, for npvi_nn, re-evaluates params from the weights.
  void prepare();
};

}  // namespace npvi
