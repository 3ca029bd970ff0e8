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
#include <random>
#include <span>
#include <vector>

#include "npvi/model.hpp"

namespace npvi {

/// q(f*) at a new input, conditioned on its k nearest training points.
struct PredictiveLatent {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<Index> neighbor_set;
};

/// m* = b^T mu_A and v* = s2 + b^T V_AA b, where (b, s2) is the prior conditional of
/// f* on the k nearest training values A. Throws StateError if the model is not ready.
PredictiveLatent predict_latent(std::span<const double> x, const FittedModel& model);

/// log (1/S) sum_s p(y | f_s), f_s ~ N(m*, v*), evaluated with log-sum-exp.
double predictive_log_prob(const PredictiveLatent& latent, double y, const LikelihoodModel& lik,
                           Index n_samples, std::mt19937_64& rng);

double predictive_log_prob(std::span<const double> x, double y, const FittedModel& model,
                           const LikelihoodModel& lik, Index n_samples, std::mt19937_64& rng);

/// E[y] under the predictive distribution, in the likelihood's units. Closed form for
/// gaussian and lognormal; Monte Carlo with n_samples draws for poisson.
double predictive_mean(const PredictiveLatent& latent, const LikelihoodModel& lik,
                       Index n_samples, std::mt19937_64& rng);

struct NllSummary {
  double mean = 0.0;
  double std_error = 0.0;
  Index count = 0;
};

/// Mean negative predictive log-likelihood over a labelled set; deterministic given seed.
NllSummary evaluate_nll(const FittedModel& model, const PointSet& X, std::span<const double> y,
                        Index n_samples, std::uint64_t seed);

}  // namespace npvi
