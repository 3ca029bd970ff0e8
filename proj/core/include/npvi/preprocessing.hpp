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

#include <optional>
#include <vector>

#include "npvi/kernel.hpp"

namespace npvi {

/// Affine transforms applied at ingestion, kept so results can be mapped back.
struct Preprocessing {
  bool standardized = false;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  double target_offset = 0.0;
  double target_scale = 1.0;
  std::optional<double> clamp_floor;
  Index rows_rejected = 0;
  Index rows_clamped = 0;

  double target_to_original(double y) const { return y * target_scale + target_offset; }
  double target_from_original(double y) const { return (y - target_offset) / target_scale; }

  /// Applies the stored feature standardization to new inputs (no-op if none).
  void transform_features(PointSet& X) const {
    if (!standardized) return;
    for (Index j = 0; j < feature_mean.size() && j < static_cast<Index>(X.cols()); ++j) {
      X.col(j) = (X.col(j).array() - feature_mean[j]) / feature_scale[j];
    }
  }
};

}  // namespace npvi
