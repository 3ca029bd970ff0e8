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

#include "npvi/adagrad.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "npvi/error.hpp"

namespace npvi {

void adagrad_step(std::span<double> param, std::span<const double> grad, std::span<double> accum,
                  double lr, std::string_view block) {
  if (param.size() != grad.size() || param.size() != accum.size()) {
    throw InputError("adagrad_step: buffer sizes differ in block " + std::string(block));
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw NumericalError("non-finite gradient in parameter block " + std::string(block));
    }
  }
  for (std::size_t j = 0; j < param.size(); ++j) {
    accum[j] += grad[j] * grad[j];
    param[j] += lr * grad[j] / (std::sqrt(accum[j]) + kAdagradEpsilon);
  }
}

ParamAdagrad::ParamAdagrad(const VariationalParams& like) : accum_(like.size(), like.k) {}

void ParamAdagrad::step(VariationalParams& params, const ParamGradient& grad, double lr) {
  auto update = [lr](double& p, double g, double& acc) {
    acc += g * g;
    p += lr * g / (std::sqrt(acc) + kAdagradEpsilon);
  };
  for (Index r : grad.touched_rows()) {
    const auto off = grad.off_row_value(r);
    bool finite = std::isfinite(grad.mu_value(r)) && std::isfinite(grad.log_diag_value(r));
    if (!finite) {
      throw NumericalError("non-finite gradient in parameter block mu/log_diag of row " +
                           std::to_string(r));
    }
    if (!std::all_of(off.begin(), off.end(), [](double g) { return std::isfinite(g); })) {
      throw NumericalError("non-finite gradient in parameter block off_diag of row " +
                           std::to_string(r));
    }
  }
  for (Index r : grad.touched_rows()) {
    update(params.mu[r], grad.mu_value(r), accum_.mu[r]);
    update(params.log_diag[r], grad.log_diag_value(r), accum_.log_diag[r]);
    const auto off = grad.off_row_value(r);
    auto row = params.off_row(r);
    auto acc = accum_.off_row(r);
    for (Index a = 0; a < off.size(); ++a) update(row[a], off[a], acc[a]);
  }
}

WeightAdagrad::WeightAdagrad(const GCNWeights& like) : accum_(like.zeros_like()) {}

void WeightAdagrad::step(GCNWeights& weights, const GCNWeights& grad, double lr) {
  auto apply = [&](GCNNet& net, const GCNNet& g, GCNNet& acc, std::string_view name) {
    for (Index l = 0; l < net.layers.size(); ++l) {
      auto& W = net.layers[l];
      adagrad_step({W.data(), static_cast<std::size_t>(W.size())},
                   {g.layers[l].data(), static_cast<std::size_t>(W.size())},
                   {acc.layers[l].data(), static_cast<std::size_t>(W.size())}, lr,
                   std::string(name) + ".W" + std::to_string(l));
    }
  };
  apply(weights.mu_net, grad.mu_net, accum_.mu_net, "mu_net");
  apply(weights.l_net, grad.l_net, accum_.l_net, "l_net");
}

}  // namespace npvi
