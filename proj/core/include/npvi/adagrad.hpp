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

#include <span>
#include <string_view>

#include "npvi/gcn.hpp"
#include "npvi/variational.hpp"

namespace npvi {

inline constexpr double kAdagradEpsilon = 1e-8;

/// Ascent step: accum += g^2, param += lr * g / (sqrt(accum) + 1e-8).
/// Throws NumericalError naming `block` if any gradient entry is non-finite;
/// nothing is modified in that case.
void adagrad_step(std::span<double> param, std::span<const double> grad, std::span<double> accum,
                  double lr, std::string_view block);

/// AdaGrad state for the direct parameterization. Only rows touched by the
/// gradient are updated, which is identical to a dense step with zero elsewhere.
class ParamAdagrad {
 public:
  ParamAdagrad() = default;
  explicit ParamAdagrad(const VariationalParams& like);

  void step(VariationalParams& params, const ParamGradient& grad, double lr);

 private:
  VariationalParams accum_;
};

class WeightAdagrad {
 public:
  WeightAdagrad() = default;
  explicit WeightAdagrad(const GCNWeights& like);

  void step(GCNWeights& weights, const GCNWeights& grad, double lr);

 private:
  GCNWeights accum_;
};

}  // namespace npvi
