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

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "npvi/adagrad.hpp"
#include "npvi/error.hpp"
#include "npvi/trainer.hpp"
#include "oracles.hpp"

namespace npvi {
namespace {

TEST(Adagrad, FirstStep) {
  std::vector<double> p{0.0}, g{1.0}, acc{0.0};
  adagrad_step(p, g, acc, 0.1, "x");
  EXPECT_NEAR(p[0], 0.1, 1e-8);
  EXPECT_EQ(acc[0], 1.0);
}

TEST(Adagrad, ZeroGradient) {
  std::vector<double> p{0.4}, g{0.0}, acc{0.0};
  adagrad_step(p, g, acc, 0.1, "x");
  EXPECT_EQ(p[0], 0.4);
}

TEST(Adagrad, SecondStepShrinks) {
  std::vector<double> p{0.0}, g{1.0}, acc{0.0};
  adagrad_step(p, g, acc, 0.1, "x");
  const double before = p[0];
  adagrad_step(p, g, acc, 0.1, "x");
  EXPECT_NEAR(p[0] - before, 0.1 / std::sqrt(2.0), 1e-8);
}

TEST(Adagrad, NonFiniteGradientLeavesStateUntouched) {
  std::vector<double> p{1.0, 2.0}, g{1.0, std::nan("")}, acc{0.0, 0.0};
  try {
    adagrad_step(p, g, acc, 0.1, "mu_net.W1");
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("mu_net.W1"), std::string::npos);
  }
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(acc, (std::vector<double>{0.0, 0.0}));
}

TEST(ParamAdagrad, SparseEqualsDenseStep) {
  std::mt19937_64 rng(1);
  const auto g = testing::random_graph(20, 3, rng);
  auto p = testing::random_params(g, rng);
  auto dense = p;
  ParamAdagrad opt(p);
  ParamGradient grad(20, 3);
  grad.mu(4) = 0.5;
  grad.log_diag(7) = -1.0;
  grad.off_row(9)[1] = 2.0;
  opt.step(p, grad, 0.1);
  std::vector<double> acc(20, 0.0);
  for (Index i = 0; i < 20; ++i) {
    std::vector<double> gi{grad.mu_value(i)};
    adagrad_step({&dense.mu[i], 1}, gi, {&acc[i], 1}, 0.1, "mu");
  }
  EXPECT_EQ(p.mu, dense.mu);
  EXPECT_NEAR(p.log_diag[7] - dense.log_diag[7], -0.1, 1e-8);
  EXPECT_NEAR(p.off_row(9)[1] - dense.off_row(9)[1], 0.1, 1e-8);
}

Splits gaussian_splits(Index n, std::uint64_t seed, double ls = 0.2, double sigma2 = 0.1) {
  SynthOptions o;
  o.n = n;
  o.d = 2;
  o.length_scale = ls;
  o.likelihood = LikelihoodModel::gaussian(sigma2);
  o.seed = seed;
  return split(generate_synthetic(o), {}, seed);
}

TrainConfig quick_config(Method m) {
  auto c = TrainConfig::defaults(m);
  c.k = 5;
  c.batch_size = 20;
  c.eval_every = 25;
  c.max_steps = 100;
  c.val_samples = 50;
  c.seed = 3;
  return c;
}

TEST(TrainConfig, DefaultsAndValidation) {
  EXPECT_EQ(TrainConfig::defaults(Method::npvi).learning_rate, 0.2);
  EXPECT_EQ(TrainConfig::defaults(Method::npvi_nn).learning_rate, 0.1);
  auto c = TrainConfig::defaults(Method::npvi);
  EXPECT_EQ(c.batch_size, 50u);
  EXPECT_EQ(c.eval_every, 200u);
  EXPECT_EQ(c.patience, 10u);
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), InputError);
  c = TrainConfig::defaults(Method::npvi);
  c.learning_rate = -1.0;
  EXPECT_THROW(c.validate(), InputError);
  c = TrainConfig::defaults(Method::npvi);
  c.mc_samples = 0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Trainer, ZeroLearningRateKeepsParameters) {
  const auto s = gaussian_splits(200, 1);
  auto c = quick_config(Method::npvi);
  c.learning_rate = 0.0;
  const auto kernel = KernelConfig::with_length_scale(0.2);
  Trainer t(s.train, c, kernel, LikelihoodModel::gaussian(0.1));
  const auto before = t.model().params;
  const auto m = t.run(s.validation);
  EXPECT_EQ(m.params.mu, before.mu);
  EXPECT_EQ(m.params.log_diag, before.log_diag);
  EXPECT_EQ(m.params.off_diag, before.off_diag);
  for (const auto& r : m.log) EXPECT_EQ(r.val_nll, m.log.front().val_nll);
}

TEST(Trainer, DeterministicLogs) {
  for (Method method : {Method::npvi, Method::npvi_nn}) {
    const auto s = gaussian_splits(150, 2);
    const auto c = quick_config(method);
    const auto kernel = KernelConfig::with_length_scale(0.2);
    const auto a = fit(s.train, s.validation, c, kernel, LikelihoodModel::gaussian(0.1));
    const auto b = fit(s.train, s.validation, c, kernel, LikelihoodModel::gaussian(0.1));
    ASSERT_EQ(a.log.size(), b.log.size());
    for (Index i = 0; i < a.log.size(); ++i) {
      EXPECT_EQ(a.log[i].step, b.log[i].step);
      EXPECT_EQ(a.log[i].val_nll, b.log[i].val_nll);
      if (i > 0) {
        EXPECT_EQ(a.log[i].elbo_estimate, b.log[i].elbo_estimate);
      }
    }
    EXPECT_EQ(a.params.mu, b.params.mu);
  }
}

TEST(Trainer, LogCadenceAndStepCap) {
  const auto s = gaussian_splits(150, 3);
  const auto m = fit(s.train, s.validation, quick_config(Method::npvi),
                     KernelConfig::with_length_scale(0.2), LikelihoodModel::gaussian(0.1));
  ASSERT_EQ(m.log.size(), 5u);
  for (Index i = 0; i < 5; ++i) EXPECT_EQ(m.log[i].step, 25 * i);
  EXPECT_TRUE(std::isnan(m.log[0].elbo_estimate));
  EXPECT_TRUE(m.ready());
}

TEST(Trainer, EpochsAndPartialBatches) {
  const auto s = gaussian_splits(100, 4);
  auto c = quick_config(Method::npvi);
  c.batch_size = 30;
  c.max_steps = 0;
  c.max_epochs = 2;
  Trainer t(s.train, c, KernelConfig::with_length_scale(0.2), LikelihoodModel::gaussian(0.1));
  t.run(s.validation);
  EXPECT_EQ(t.epochs_completed(), 2u);
  EXPECT_EQ(t.steps(), 6u);
}

TEST(Trainer, PatienceStopsEarly) {
  const auto s = gaussian_splits(100, 5);
  auto c = quick_config(Method::npvi);
  c.learning_rate = 0.0;
  c.max_steps = 10000;
  c.patience = 3;
  c.eval_every = 10;
  Trainer t(s.train, c, KernelConfig::with_length_scale(0.2), LikelihoodModel::gaussian(0.1));
  t.run(s.validation);
  EXPECT_EQ(t.steps(), 30u);
}

TEST(Trainer, ElboMovingAverageRises) {
  const auto s = gaussian_splits(1000, 6, 0.2, 0.1);
  auto c = TrainConfig::defaults(Method::npvi);
  c.k = 10;
  c.seed = 11;
  Trainer t(s.train, c, KernelConfig::with_length_scale(0.2), LikelihoodModel::gaussian(0.1));
  std::vector<double> averages;
  double sum = 0.0;
  for (Index step = 1; step <= 2000; ++step) {
    sum += t.step();
    if (step % 100 == 0) {
      averages.push_back(sum / 100.0);
      sum = 0.0;
    }
  }
  ASSERT_EQ(averages.size(), 20u);
  // Batch noise allows small dips; the trend must be clearly upward.
  Index rises = 0;
  for (Index i = 1; i < averages.size(); ++i) rises += averages[i] >= averages[i - 1];
  EXPECT_GE(rises, 15u);
  EXPECT_GT(averages.back(), averages.front());
}

TEST(Trainer, AmortizedParamsAreFunctionOfWeights) {
  const auto s = gaussian_splits(150, 7);
  const auto m = fit(s.train, s.validation, quick_config(Method::npvi_nn),
                     KernelConfig::with_length_scale(0.2), LikelihoodModel::gaussian(0.1));
  ASSERT_TRUE(m.weights.has_value());
  const auto contexts = build_contexts(m.graph, m.X, m.kernel, m.y);
  const auto p = materialize_params(*m.weights, contexts, m.graph.k);
  EXPECT_EQ(p.mu, m.params.mu);
  EXPECT_EQ(p.log_diag, m.params.log_diag);
}

TEST(Trainer, OrderSeedPermutesTrainingData) {
  const auto s = gaussian_splits(100, 8);
  auto c = quick_config(Method::npvi);
  c.order_seed = 5;
  Trainer t(s.train, c, KernelConfig::with_length_scale(0.2), LikelihoodModel::gaussian(0.1));
  const auto& m = t.model();
  for (Index i = 0; i < m.graph.size(); ++i) {
    EXPECT_EQ(m.y[i], s.train.y[m.graph.order[i]]);
    EXPECT_EQ(m.X.row(i), s.train.X.row(m.graph.order[i]));
  }
  EXPECT_NE(m.graph.order, ordering(m.graph.size(), std::nullopt));
}

TEST(Trainer, RejectsInvalidObservations) {
  auto s = gaussian_splits(60, 9);
  EXPECT_THROW(Trainer(s.train, quick_config(Method::npvi), KernelConfig::with_length_scale(0.2),
                       LikelihoodModel::poisson()),
               InputError);
}

TEST(ValidationNll, MoreSamplesAgreeWithinError) {
  const auto s = gaussian_splits(300, 10);
  auto c = quick_config(Method::npvi);
  c.max_steps = 200;
  const auto m = fit(s.train, s.validation, c, KernelConfig::with_length_scale(0.2),
                     LikelihoodModel::gaussian(0.1));
  const double a = validation_nll(m, s.validation, 500, 1);
  const double b = validation_nll(m, s.validation, 1000, 2);
  std::vector<double> reps;
  for (std::uint64_t r = 0; r < 8; ++r) reps.push_back(validation_nll(m, s.validation, 500, 100 + r));
  double mean = 0.0;
  for (double v : reps) mean += v / reps.size();
  double var = 0.0;
  for (double v : reps) var += (v - mean) * (v - mean) / (reps.size() - 1);
  EXPECT_LT(std::abs(a - b), 3.0 * std::sqrt(var) + 1e-12);
}

TEST(ValidationNll, PerfectLognormalModelBeatsConstantBaseline) {
  SynthOptions o;
  o.n = 400;
  o.length_scale = 0.3;
  o.likelihood = LikelihoodModel::lognormal(0.01);
  o.seed = 4;
  const auto data = generate_synthetic(o);
  auto c = TrainConfig::defaults(Method::npvi);
  c.k = 10;
  c.learning_rate = 0.0;
  c.max_steps = 1;
  const auto kernel = KernelConfig::with_length_scale(0.3);
  Trainer t(data, c, kernel, o.likelihood);
  FittedModel m = t.model();
  // Place q on the true latent values with a tight spread.
  for (Index i = 0; i < m.graph.size(); ++i) {
    m.params.mu[i] = data.latent[m.graph.order[i]];
    m.params.log_diag[i] = std::log(1e-3);
    for (double& v : m.params.off_row(i)) v = 0.0;
  }
  const double nll = validation_nll(m, data, 200, 1);
  double a = 0.0;
  for (double y : data.y) a += std::log(y) / data.size();
  double s2 = 0.0;
  for (double y : data.y) s2 += (std::log(y) - a) * (std::log(y) - a) / data.size();
  double baseline = 0.0;
  for (double y : data.y) {
    const double r = std::log(y) - a;
    baseline += std::log(y) + 0.5 * std::log(2.0 * M_PI * s2) + 0.5 * r * r / s2;
  }
  baseline /= data.size();
  EXPECT_LT(nll, baseline);
}

TEST(TrainingLog, JsonLines) {
  std::vector<TrainingRecord> log{{0, 0.0, std::nan(""), 1.5}, {200, 1.25, -10.0, 1.2}};
  const auto path = std::filesystem::temp_directory_path() / "npvi_test_log.jsonl";
  write_training_log(log, path);
  std::ifstream in(path);
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1]["step"], 200);
  EXPECT_EQ(rows[1]["val_nll"], 1.2);
  EXPECT_TRUE(rows[0]["elbo_estimate"].is_null());
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace npvi
