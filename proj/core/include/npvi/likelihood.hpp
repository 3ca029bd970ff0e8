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

#include <string>
#include <string_view>

namespace npvi {

enum class LikelihoodKind { poisson_softplus, lognormal, gaussian };

std::string to_string(LikelihoodKind kind);
LikelihoodKind likelihood_kind_from_string(std::string_view name);

/// Observation model p(y | f). sigma2 is the noise variance for the lognormal
/// (in log space) and gaussian models and is ignored for Poisson.
struct LikelihoodModel {
  LikelihoodKind kind = LikelihoodKind::gaussian;
  double sigma2 = 1.0;

  static LikelihoodModel poisson() { return {LikelihoodKind::poisson_softplus, 1.0}; }
  static LikelihoodModel lognormal(double sigma2 = 0.01) { return {LikelihoodKind::lognormal, sigma2}; }
  static LikelihoodModel gaussian(double sigma2 = 1.0) { return {LikelihoodKind::gaussian, sigma2}; }

  void validate() const;
  /// Throws InputError when y is outside the support of the model.
  void check_observation(double y) const;
};

/// log(1 + exp(f)) without overflow or underflow to zero for large |f|.
double softplus(double f);
/// log(softplus(f)), finite for every finite f.
double log_softplus(double f);
/// d/df log(softplus(f)) = sigmoid(f) / softplus(f).
double dlog_softplus(double f);
double sigmoid(double f);

double log_prob(const LikelihoodModel& model, double y, double f);
double dlog_prob_df(const LikelihoodModel& model, double y, double f);

}  // namespace npvi
