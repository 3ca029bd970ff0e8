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
#include <vector>

#include "npvi/dataset.hpp"
#include "npvi/trainer.hpp"

namespace npvi {

struct ExperimentConfig {
  LikelihoodModel likelihood = LikelihoodModel::poisson();
  TrainConfig train;
  std::vector<double> length_scale_grid = default_grid();
  double signal_variance = 1.0;
  SplitFractions fractions;
  std::uint64_t seed = 0;

  static std::vector<double> default_grid() { return {0.05, 0.1, 0.5, 1.0, 1.5, 2.0, 2.5}; }
  void validate() const;
};

struct GridRow {
  double length_scale = 0.0;
  double val_nll = 0.0;
  Index steps = 0;
};

struct GridResult {
  std::vector<GridRow> table;  // one row per grid value, in grid order
  double best_length_scale = 0.0;
  FittedModel best_model;
};

/// Trains one model per length scale on `train` and selects the lowest validation NLL
/// (ties go to the smaller length scale). The DAG is built once and shared.
GridResult grid_search(const Dataset& train, const Dataset& validation,
                       const ExperimentConfig& config);

}  // namespace npvi
