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

#include "npvi/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "npvi/error.hpp"
#include "npvi/predictor.hpp"

namespace npvi {

namespace {
constexpr std::uint64_t kValidationStream = 0x9e3779b97f4a7c15ULL;
}  // namespace

TrainConfig TrainConfig::defaults(Method method) {
  TrainConfig c;
  c.method = method;
  c.learning_rate = method == Method::npvi ? 0.2 : 0.1;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("learning_rate must be non-negative");
  }
  if (k == 0) throw InputError("k must be at least 1");
  if (batch_size == 0) throw InputError("batch_size must be at least 1");
  if (mc_samples == 0) throw InputError("mc_samples must be at least 1");
  if (val_samples == 0) throw InputError("val_samples must be at least 1");
  if (eval_every == 0) throw InputError("eval_every must be at least 1");
  if (!(max_seconds > 0.0)) throw InputError("max_seconds must be positive");
}

Trainer::Trainer(const Dataset& train, const TrainConfig& config, const KernelConfig& kernel,
                 const LikelihoodModel& likelihood, const NeighborGraph* graph)
    : config_(config), rng_(config.seed) {
  config_.validate();
  kernel.validate();
  likelihood.validate();
  if (train.size() == 0) throw InputError("training set is empty");
  for (double v : train.y) likelihood.check_observation(v);

  model_.method = config_.method;
  model_.kernel = kernel;
  model_.likelihood = likelihood;
  model_.prep = train.prep;

  if (graph) {
    if (graph->size() != train.size()) {
      throw InputError("shared graph does not match the training set size");
    }
    model_.graph = *graph;
  }
  const std::vector<Index> order =
      graph ? graph->order : ordering(train.size(), config_.order_seed);
  model_.X = permute_rows(train.X, order);
  model_.y.resize(train.size());
  for (Index i = 0; i < order.size(); ++i) model_.y[i] = train.y[order[i]];
  if (!graph) {
    model_.graph = build_dag(model_.X, config_.k);
    model_.graph.order = order;
  }
  model_.cond = vecchia_conditionals(model_.graph, model_.X, kernel);
  model_.index = std::make_shared<const KdTree>(model_.X);

  const Index n = model_.graph.size();
  perm_ = all_indices(n);
  std::shuffle(perm_.begin(), perm_.end(), rng_);

  if (config_.method == Method::npvi) {
    model_.params = VariationalParams::prior_init(model_.graph, model_.cond);
    grad_ = ParamGradient(n, model_.graph.k);
    param_opt_ = ParamAdagrad(model_.params);
  } else {
    model_.weights = GCNWeights::glorot(config_.gcn_widths, config_.seed);
    contexts_ = build_contexts(model_.graph, model_.X, kernel, model_.y);
    amortized_ = std::make_unique<AmortizedElbo>(model_.graph, model_.cond, likelihood, model_.y,
                                                 contexts_);
    weight_grad_ = model_.weights->zeros_like();
    weight_opt_ = WeightAdagrad(*model_.weights);
    refresh_params();
  }
}

std::vector<Index> Trainer::next_batch() {
  if (cursor_ >= perm_.size()) {
    std::shuffle(perm_.begin(), perm_.end(), rng_);
    cursor_ = 0;
  }
  const Index end = std::min(cursor_ + config_.batch_size, static_cast<Index>(perm_.size()));
  std::vector<Index> batch(perm_.begin() + cursor_, perm_.begin() + end);
  cursor_ = end;
  if (cursor_ >= perm_.size()) ++epochs_;
  return batch;
}

double Trainer::step() {
  const auto batch = next_batch();
  const NoiseDraws noise = draw_noise(batch, model_.graph, config_.mc_samples, rng_);
  double value = 0.0;
  if (config_.method == Method::npvi) {
    grad_.clear();
    value = estimate_elbo(batch, model_.params, model_.graph, model_.cond, model_.likelihood,
                          model_.y, noise, &grad_, &scratch_)
                .total();
    param_opt_.step(model_.params, grad_, config_.learning_rate);
  } else {
    weight_grad_.set_zero();
    value = amortized_->evaluate(*model_.weights, batch, noise, &weight_grad_).total();
    weight_opt_.step(*model_.weights, weight_grad_, config_.learning_rate);
  }
  ++steps_;
  return value;
}

void Trainer::refresh_params() {
  if (config_.method == Method::npvi_nn) {
    model_.params = materialize_params(*model_.weights, contexts_, model_.graph.k);
  }
}

double Trainer::validation_nll(const Dataset& validation) {
  refresh_params();
  return evaluate_nll(model_, validation.X, validation.y, config_.val_samples,
                      config_.seed ^ kValidationStream)
      .mean;
}

FittedModel Trainer::run(const Dataset& validation) {
  if (validation.size() == 0) throw InputError("validation set is empty");
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  std::vector<TrainingRecord> log;
  double best = std::numeric_limits<double>::infinity();
  VariationalParams best_params;
  std::optional<GCNWeights> best_weights;
  Index stale = 0;
  double elbo_sum = 0.0;
  Index elbo_count = 0;

  auto evaluate = [&] {
    const double nll = validation_nll(validation);
    const double elbo = elbo_count ? elbo_sum / static_cast<double>(elbo_count)
                                   : std::numeric_limits<double>::quiet_NaN();
    log.push_back({steps_, elapsed(), elbo, nll});
    elbo_sum = 0.0;
    elbo_count = 0;
    if (nll < best) {
      best = nll;
      best_params = model_.params;
      best_weights = model_.weights;
      stale = 0;
    } else {
      ++stale;
    }
  };

  evaluate();
  while (true) {
    if (config_.max_steps && steps_ >= config_.max_steps) break;
    if (config_.max_epochs && epochs_ >= config_.max_epochs) break;
    if (elapsed() >= config_.max_seconds) break;
    elbo_sum += step();
    ++elbo_count;
    if (steps_ % config_.eval_every == 0) {
      evaluate();
      if (stale >= config_.patience) break;
    }
  }
  if (elbo_count > 0) evaluate();

  FittedModel out = model_;
  out.params = std::move(best_params);
  out.weights = std::move(best_weights);
  out.log = std::move(log);
  return out;
}

FittedModel fit(const Dataset& train, const Dataset& validation, const TrainConfig& config,
                const KernelConfig& kernel, const LikelihoodModel& likelihood) {
  Trainer trainer(train, config, kernel, likelihood);
  return trainer.run(validation);
}

double validation_nll(const FittedModel& model, const Dataset& validation, Index n_samples,
                      std::uint64_t seed) {
  return evaluate_nll(model, validation.X, validation.y, n_samples, seed).mean;
}

void write_training_log(const std::vector<TrainingRecord>& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write training log " + path.string());
  for (const auto& r : log) {
    nlohmann::json j;
    j["step"] = r.step;
    j["seconds"] = r.seconds;
    j["elbo_estimate"] = r.elbo_estimate;
    j["val_nll"] = r.val_nll;
    out << j.dump() << '\n';
  }
}

}  // namespace npvi
