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

#include "npvi/grid_search.hpp"

#include <cmath>
#include <limits>

#include "npvi/error.hpp"

namespace npvi {

void ExperimentConfig::validate() const {
  if (length_scale_grid.empty()) throw InputError("length-scale grid is empty");
  for (double ls : length_scale_grid) {
    if (!(ls > 0.0) || !std::isfinite(ls)) throw InputError("grid length scales must be positive");
  }
  fractions.validate();
  likelihood.validate();
  train.validate();
}

GridResult grid_search(const Dataset& train, const Dataset& validation,
                       const ExperimentConfig& config) {
  config.validate();
  const auto order = ordering(train.size(), config.train.order_seed);
  NeighborGraph graph = build_dag(permute_rows(train.X, order), config.train.k);
  graph.order = order;

  GridResult result;
  double best = std::numeric_limits<double>::infinity();
  for (double ls : config.length_scale_grid) {
    const auto kernel = KernelConfig::with_length_scale(ls, config.signal_variance);
    Trainer trainer(train, config.train, kernel, config.likelihood, &graph);
    FittedModel model = trainer.run(validation);
    double score = std::numeric_limits<double>::infinity();
    for (const auto& r : model.log) score = std::min(score, r.val_nll);
    result.table.push_back({ls, score, trainer.steps()});
    if (score < best || (score == best && ls < result.best_length_scale)) {
      best = score;
      result.best_length_scale = ls;
      result.best_model = std::move(model);
    }
  }
  if (!std::isfinite(best)) throw NumericalError("no grid value produced a finite validation NLL");
  return result;
}

}  // namespace npvi
