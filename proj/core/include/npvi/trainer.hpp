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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "npvi/adagrad.hpp"
#include "npvi/dataset.hpp"
#include "npvi/elbo.hpp"
#include "npvi/gcn.hpp"
#include "npvi/model.hpp"

namespace npvi {

struct TrainConfig {
  Method method = Method::npvi;
  Index k = 10;
  double learning_rate = 0.2;
  Index batch_size = 50;
  double max_seconds = 3600.0;
  Index eval_every = 200;
  Index patience = 10;
  std::uint64_t seed = 0;
  Index mc_samples = 1;
  /// Monte Carlo samples per validation point when scoring a snapshot.
  Index val_samples = 1000;
  /// 0 means unlimited.
  Index max_steps = 0;
  Index max_epochs = 0;
  /// Seeded permutation of the training points before the graph is built.
  std::optional<std::uint64_t> order_seed;
  std::vector<Index> gcn_widths = GCNWeights::default_widths();

  /// Learning rate 0.2 for npvi and 0.1 for npvi-nn.
  static TrainConfig defaults(Method method);
  void validate() const;
};

/// Stochastic optimization of the batch ELBO with AdaGrad. The working state is a
/// FittedModel whose parameters (or network weights) are updated in place.
class Trainer {
 public:
  /// When `graph` is given it must have been built on the training points arranged
  /// in graph->order; it is reused instead of being rebuilt.
  Trainer(const Dataset& train, const TrainConfig& config, const KernelConfig& kernel,
          const LikelihoodModel& likelihood, const NeighborGraph* graph = nullptr);

  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  /// One minibatch update. Returns the batch ELBO estimate before the update.
  double step();

  /// Mean validation NLL of the current state (common random numbers across calls).
  double validation_nll(const Dataset& validation);

  /// Full loop with periodic validation, best-snapshot selection, patience and time budget.
  FittedModel run(const Dataset& validation);

  const FittedModel& model() const { return model_; }
  Index steps() const { return steps_; }
  Index epochs_completed() const { return epochs_; }
  const TrainConfig& config() const { return config_; }

 private:
  std::vector<Index> next_batch();
  void refresh_params();

  TrainConfig config_;
  FittedModel model_;
  std::mt19937_64 rng_;
  std::vector<Index> perm_;
  Index cursor_ = 0;
  Index steps_ = 0;
  Index epochs_ = 0;

  ParamGradient grad_;
  SupportAccumulator scratch_;
  ParamAdagrad param_opt_;

  std::vector<LocalContext> contexts_;
  std::unique_ptr<AmortizedElbo> amortized_;
  GCNWeights weight_grad_;
  WeightAdagrad weight_opt_;
};

FittedModel fit(const Dataset& train, const Dataset& validation, const TrainConfig& config,
                const KernelConfig& kernel, const LikelihoodModel& likelihood);

/// Mean negative predictive log-likelihood of a fitted model on a labelled set.
double validation_nll(const FittedModel& model, const Dataset& validation, Index n_samples,
                      std::uint64_t seed);

/// One JSON object per line: step, seconds, elbo_estimate, val_nll.
void write_training_log(const std::vector<TrainingRecord>& log, const std::filesystem::path& path);

}  // namespace npvi
