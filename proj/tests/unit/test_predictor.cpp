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

#include <gtest/gtest.h>

#include "npvi/error.hpp"
#include "npvi/predictor.hpp"
#include "oracles.hpp"

namespace npvi {
namespace {

/// Exact posterior stored in a complete graph. k = n so that prediction conditions on
/// every training point.
FittedModel exact_gaussian_model(Index n, double ls, double sigma2, std::uint64_t seed) {
  FittedModel m;
  m.kernel = KernelConfig::with_length_scale(ls);
  m.likelihood = LikelihoodModel::gaussian(sigma2);
  m.X = testing::uniform_points(n, 2, seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd y(n);
  for (auto& v : y) v = normal(rng);
  m.y.assign(y.data(), y.data() + n);
  m.graph = build_dag(m.X, n);
  m.graph.order = ordering(n, std::nullopt);
  m.cond = vecchia_conditionals(m.graph, m.X, m.kernel);
  const auto post = testing::gaussian_posterior(testing::dense_prior(m.X, m.kernel), y, sigma2);
  m.params = match_posterior_rows(post.cov, m.graph);
  for (Index i = 0; i < n; ++i) m.params.mu[i] = post.mean[i];
  m.prepare();
  return m;
}

PredictiveLatent latent(double mean, double var) {
  PredictiveLatent p;
  p.mean = mean;
  p.variance = var;
  return p;
}

TEST(PredictLatent, RequiresPreparedModel) {
  FittedModel m;
  const std::vector<double> x{0.0, 0.0};
  EXPECT_THROW(predict_latent(x, m), StateError);
}

TEST(PredictLatent, DistantPointRecoversPrior) {
  const auto m = exact_gaussian_model(30, 0.1, 0.1, 1);
  const std::vector<double> x{50.0, -40.0};
  const auto p = predict_latent(x, m);
  EXPECT_NEAR(p.mean, 0.0, 1e-12);
  EXPECT_NEAR(p.variance, m.kernel.prior_variance(), 1e-12);
}

TEST(PredictLatent, CoincidentPointWithOneNeighbor) {
  auto m = exact_gaussian_model(30, 0.05, 0.1, 2);
  // Refit the graph with a single parent and a matching factor.
  m.graph = build_dag(m.X, 1);
  m.graph.order = ordering(30, std::nullopt);
  m.cond = vecchia_conditionals(m.graph, m.X, m.kernel);
  std::mt19937_64 rng(3);
  m.params = testing::random_params(m.graph, rng);
  m.prepare();
  const Index j = 17;
  const std::vector<double> x(m.X.row(j).data(), m.X.row(j).data() + 2);
  const auto p = predict_latent(x, m);
  ASSERT_EQ(p.neighbor_set, (std::vector<Index>{j}));
  EXPECT_NEAR(p.mean, m.params.mu[j], 1e-5);
  EXPECT_NEAR(p.variance, covariance_entry(j, j, m.params, m.graph), 1e-5);
}

TEST(PredictLatent, FullParentGaussianMatchesExactPredictive) {
  const auto m = exact_gaussian_model(40, 0.2, 0.1, 4);
  const Eigen::Map<const Eigen::VectorXd> y(m.y.data(), 40);
  const auto Q = testing::uniform_points(15, 2, 99);
  for (Index t = 0; t < 15; ++t) {
    const auto [mean, var] = testing::gaussian_predict(m.X, y, m.kernel, 0.1, Q.row(t));
    const auto p = predict_latent(point(Q, t), m);
    EXPECT_NEAR(p.mean, mean, 1e-3);
    EXPECT_NEAR(p.variance, var, 1e-3);
    EXPECT_GT(p.variance, 0.0);
  }
}

TEST(PredictiveLogProb, DegenerateLatentIsExact) {
  std::mt19937_64 rng(1);
  const LikelihoodModel liks[] = {LikelihoodModel::poisson(), LikelihoodModel::lognormal(0.01),
                                  LikelihoodModel::gaussian(1.0)};
  for (const auto& lik : liks) {
    const double y = lik.kind == LikelihoodKind::gaussian ? -0.3 : 3.0;
    for (Index n : {1u, 10u, 1000u}) {
      EXPECT_EQ(predictive_log_prob(latent(0.4, 0.0), y, lik, n, rng), log_prob(lik, y, 0.4));
    }
  }
}

TEST(PredictiveLogProb, GaussianMatchesConvolutionWithinError) {
  const auto lik = LikelihoodModel::gaussian(0.2);
  const auto p = latent(0.3, 0.5);
  const double y = 1.1;
  const double exact = -0.5 * std::log(2.0 * M_PI * 0.7) - 0.5 * (y - 0.3) * (y - 0.3) / 0.7;
  std::vector<double> reps;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::mt19937_64 rng(s);
    reps.push_back(predictive_log_prob(p, y, lik, 10000, rng));
  }
  double mean = 0.0, var = 0.0;
  for (double v : reps) mean += v / 10.0;
  for (double v : reps) var += (v - mean) * (v - mean) / 9.0;
  const double se_single = std::sqrt(var);
  std::mt19937_64 rng(123);
  EXPECT_NEAR(predictive_log_prob(p, y, lik, 10000, rng), exact, 3.0 * se_single + 1e-9);
}

TEST(PredictiveLogProb, ReproducibleWithSeed) {
  const auto lik = LikelihoodModel::poisson();
  std::mt19937_64 a(5), b(5);
  EXPECT_EQ(predictive_log_prob(latent(0.1, 1.0), 2.0, lik, 1, a),
            predictive_log_prob(latent(0.1, 1.0), 2.0, lik, 1, b));
}

TEST(PredictiveLogProb, StableForVeryUnlikelyObservations) {
  const auto lik = LikelihoodModel::gaussian(0.01);
  std::mt19937_64 rng(2);
  const double v = predictive_log_prob(latent(0.0, 0.01), 4.5, lik, 1000, rng);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(v, -500.0);
  EXPECT_GT(v, -1500.0);
}

TEST(PredictiveLogProb, VarianceShrinksWithSamples) {
  const auto lik = LikelihoodModel::poisson();
  auto spread = [&](Index n) {
    std::vector<double> reps;
    for (std::uint64_t s = 0; s < 200; ++s) {
      std::mt19937_64 rng(1000 + s);
      reps.push_back(predictive_log_prob(latent(0.5, 0.8), 3.0, lik, n, rng));
    }
    double mean = 0.0, var = 0.0;
    for (double v : reps) mean += v / reps.size();
    for (double v : reps) var += (v - mean) * (v - mean) / (reps.size() - 1);
    return var;
  };
  const double ratio = spread(100) / spread(400);
  EXPECT_GT(ratio, 2.5);
  EXPECT_LT(ratio, 6.0);
}

TEST(PredictiveMean, ClosedFormsAndMonteCarlo) {
  std::mt19937_64 rng(3);
  EXPECT_EQ(predictive_mean(latent(0.7, 2.0), LikelihoodModel::gaussian(), 1, rng), 0.7);
  EXPECT_NEAR(predictive_mean(latent(0.2, 0.3), LikelihoodModel::lognormal(0.01), 1, rng),
              std::exp(0.2 + 0.5 * 0.31), 1e-14);
  EXPECT_NEAR(predictive_mean(latent(1.0, 0.0), LikelihoodModel::poisson(), 10, rng),
              softplus(1.0), 1e-14);
}

TEST(EvaluateNll, PointMassGaussian) {
  auto m = exact_gaussian_model(20, 0.1, 1.0, 6);
  // Prior recovered far away: m* = 0 and v* = prior variance.
  PointSet Xq(1, 2);
  Xq << 100.0, 100.0;
  const std::vector<double> yq{0.0};
  const auto s = evaluate_nll(m, Xq, yq, 20000, 1);
  const double exact = 0.5 * std::log(2.0 * M_PI * (1.0 + m.kernel.prior_variance()));
  EXPECT_NEAR(s.mean, exact, 0.02);
  EXPECT_EQ(s.count, 1u);
  EXPECT_EQ(s.std_error, 0.0);
}

TEST(EvaluateNll, DeterministicAndStandardError) {
  const auto m = exact_gaussian_model(30, 0.2, 0.1, 7);
  const auto Q = testing::uniform_points(25, 2, 70);
  std::vector<double> yq(25, 0.1);
  const auto a = evaluate_nll(m, Q, yq, 100, 3);
  const auto b = evaluate_nll(m, Q, yq, 100, 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_GT(a.std_error, 0.0);
  EXPECT_THROW(evaluate_nll(m, Q, std::vector<double>(3, 0.0), 100, 3), InputError);
}

}  // namespace
}  // namespace npvi
