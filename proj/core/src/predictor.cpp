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

#include "npvi/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "npvi/error.hpp"

namespace npvi {

PredictiveLatent predict_latent(std::span<const double> x, const FittedModel& model) {
  if (!model.ready()) throw StateError("predict_latent: model is not fitted");
  for (double v : x) {
    if (!std::isfinite(v)) throw InputError("predict_latent: non-finite input");
  }
  const Index k = std::min<Index>(std::max<Index>(model.graph.k, 1), model.X.rows());
  const auto nbrs = model.index->knn(x, k);

  PredictiveLatent out;
  out.neighbor_set.reserve(nbrs.size());
  for (const auto& nb : nbrs) out.neighbor_set.push_back(nb.index);
  std::sort(out.neighbor_set.begin(), out.neighbor_set.end());

  const Conditional c =
      condition_on(model.X, out.neighbor_set, x, model.kernel.prior_variance(), model.kernel);
  const auto& A = out.neighbor_set;
  double explained = 0.0;
  for (Index a = 0; a < A.size(); ++a) {
    out.mean += c.b[a] * model.params.mu[A[a]];
    explained += c.b[a] * c.b[a] * covariance_entry(A[a], A[a], model.params, model.graph);
    for (Index b = 0; b < a; ++b) {
      explained += 2.0 * c.b[a] * c.b[b] * covariance_entry(A[a], A[b], model.params, model.graph);
    }
  }
  out.variance = c.var + explained;
  return out;
}

double predictive_log_prob(const PredictiveLatent& latent, double y, const LikelihoodModel& lik,
                           Index n_samples, std::mt19937_64& rng) {
  if (n_samples == 0) throw InputError("predictive_log_prob: n_samples must be at least 1");
  lik.check_observation(y);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(std::max(latent.variance, 0.0));
  std::vector<double> lp(n_samples);
  for (double& v : lp) v = log_prob(lik, y, latent.mean + sd * normal(rng));
  const double top = *std::max_element(lp.begin(), lp.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : lp) sum += std::exp(v - top);
  return top + (std::log(sum) - std::log(static_cast<double>(n_samples)));
}

double predictive_log_prob(std::span<const double> x, double y, const FittedModel& model,
                           const LikelihoodModel& lik, Index n_samples, std::mt19937_64& rng) {
  return predictive_log_prob(predict_latent(x, model), y, lik, n_samples, rng);
}

double predictive_mean(const PredictiveLatent& latent, const LikelihoodModel& lik,
                       Index n_samples, std::mt19937_64& rng) {
  switch (lik.kind) {
    case LikelihoodKind::gaussian:
      return latent.mean;
    case LikelihoodKind::lognormal:
      return std::exp(latent.mean + 0.5 * (latent.variance + lik.sigma2));
    case LikelihoodKind::poisson_softplus: {
      if (n_samples == 0) throw InputError("predictive_mean: n_samples must be at least 1");
      std::normal_distribution<double> normal;
      const double sd = std::sqrt(std::max(latent.variance, 0.0));
      double sum = 0.0;
      for (Index s = 0; s < n_samples; ++s) sum += softplus(latent.mean + sd * normal(rng));
      return sum / static_cast<double>(n_samples);
    }
  }
  return latent.mean;
}

NllSummary evaluate_nll(const FittedModel& model, const PointSet& X, std::span<const double> y,
                        Index n_samples, std::uint64_t seed) {
  if (static_cast<Index>(X.rows()) != y.size() || y.empty()) {
    throw InputError("evaluate_nll: need matching, non-empty inputs and targets");
  }
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  double sum2 = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double nll = -predictive_log_prob(point(X, i), y[i], model, model.likelihood,
                                            n_samples, rng);
    sum += nll;
    sum2 += nll * nll;
  }
  NllSummary s;
  s.count = y.size();
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    const double var = (sum2 - s.count * s.mean * s.mean) / static_cast<double>(s.count - 1);
    s.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(s.count));
  }
  return s;
}

}  // namespace npvi
