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

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "npvi/checkpoint.hpp"
#include "npvi/dataset.hpp"
#include "npvi/error.hpp"
#include "npvi/grid_search.hpp"
#include "npvi/predictor.hpp"
#include "npvi/trainer.hpp"

namespace {

using nlohmann::json;
using namespace npvi;

constexpr double kDefaultClampFloor = 1e-4;

struct LikelihoodOptions {
  std::string kind = "poisson";
  std::optional<double> sigma2;

  void add_to(CLI::App* app) {
    app->add_option("--likelihood", kind, "poisson | lognormal | gaussian")
        ->check(CLI::IsMember({"poisson", "lognormal", "gaussian"}));
    app->add_option("--sigma2", sigma2,
                    "Observation noise variance (lognormal default 0.01, gaussian default 1)");
  }

  LikelihoodModel model() const {
    switch (likelihood_kind_from_string(kind)) {
      case LikelihoodKind::poisson_softplus: return LikelihoodModel::poisson();
      case LikelihoodKind::lognormal: return LikelihoodModel::lognormal(sigma2.value_or(0.01));
      case LikelihoodKind::gaussian: return LikelihoodModel::gaussian(sigma2.value_or(1.0));
    }
    return LikelihoodModel::poisson();
  }
};

struct DataOptions {
  std::string target = "y";
  bool standardize = false;
  bool scale_target = false;
  std::optional<double> clamp_floor;
  bool clamp = false;

  void add_to(CLI::App* app) {
    app->add_option("--target", target, "Target column name");
    app->add_flag("--standardize", standardize, "Standardize feature columns");
    app->add_flag("--scale-target", scale_target, "Translate and scale the target to [0, 1]");
    app->add_flag("--clamp", clamp, "Raise targets below 1e-4 to 1e-4");
    app->add_option("--clamp-floor", clamp_floor, "Raise targets below this value to it");
  }

  IngestOptions ingest() const {
    IngestOptions o;
    o.standardize_features = standardize;
    o.scale_target_unit = scale_target;
    o.clamp_floor = clamp_floor;
    if (clamp && !clamp_floor) o.clamp_floor = kDefaultClampFloor;
    return o;
  }
};

struct FitOptions {
  std::string method = "npvi";
  Index k = 10;
  double length_scale = 0.1;
  double signal_variance = 1.0;
  LikelihoodOptions likelihood;
  DataOptions data;
  Index batch_size = 50;
  std::optional<double> lr;
  double max_seconds = 3600.0;
  std::uint64_t seed = 7;
  Index eval_every = 200;
  Index patience = 10;
  Index max_steps = 0;
  Index max_epochs = 0;
  Index mc_samples = 1;
  Index val_samples = 1000;
  std::optional<std::uint64_t> order_seed;
  std::string train;
  std::string val;
  std::string out;
  std::string log;

  void add_to(CLI::App* app, bool with_length_scale) {
    app->add_option("--method", method, "npvi | npvi-nn")
        ->check(CLI::IsMember({"npvi", "npvi-nn"}));
    app->add_option("--k", k, "Parents per point in the neighbor DAG");
    if (with_length_scale) app->add_option("--length-scale", length_scale, "RBF length scale");
    app->add_option("--signal-variance", signal_variance, "RBF signal variance");
    likelihood.add_to(app);
    data.add_to(app);
    app->add_option("--batch-size", batch_size, "Minibatch size");
    app->add_option("--lr", lr, "AdaGrad learning rate (default 0.2 npvi, 0.1 npvi-nn)");
    app->add_option("--max-seconds", max_seconds, "Wall-clock training budget");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--eval-every", eval_every, "Steps between validation checks");
    app->add_option("--patience", patience, "Validation checks without improvement before stopping");
    app->add_option("--max-steps", max_steps, "Step cap (0 = none)");
    app->add_option("--max-epochs", max_epochs, "Epoch cap (0 = none)");
    app->add_option("--mc-samples", mc_samples, "Monte Carlo samples per ELBO term");
    app->add_option("--val-samples", val_samples, "Monte Carlo samples per validation point");
    app->add_option("--order-seed", order_seed, "Randomly permute the training order");
    app->add_option("--train", train, "Training CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--val", val, "Validation CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--out", out, "Output model checkpoint")->required();
    app->add_option("--log", log, "Training log (JSON lines)");
  }

  TrainConfig config() const {
    TrainConfig c = TrainConfig::defaults(method_from_string(method));
    c.k = k;
    if (lr) c.learning_rate = *lr;
    c.batch_size = batch_size;
    c.max_seconds = max_seconds;
    c.seed = seed;
    c.eval_every = eval_every;
    c.patience = patience;
    c.max_steps = max_steps;
    c.max_epochs = max_epochs;
    c.mc_samples = mc_samples;
    c.val_samples = val_samples;
    c.order_seed = order_seed;
    return c;
  }

  std::pair<Dataset, Dataset> load() const {
    Dataset tr = ingest_csv(train, data.target, data.ingest());
    Dataset va = ingest_csv(val, data.target);
    apply_preprocessing(va, tr.prep);
    return {std::move(tr), std::move(va)};
  }
};

void report_ingest(const std::string& path, const Dataset& d) {
  json j{{"event", "ingest"},
         {"path", path},
         {"rows", d.size()},
         {"dim", d.dim()},
         {"rows_rejected", d.prep.rows_rejected},
         {"rows_clamped", d.prep.rows_clamped}};
  std::cerr << j.dump() << '\n';
}

double best_val(const FittedModel& m) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : m.log) best = std::min(best, r.val_nll);
  return best;
}

int run_fit(const FitOptions& o) {
  auto [train, val] = o.load();
  report_ingest(o.train, train);
  report_ingest(o.val, val);
  const auto start = std::chrono::steady_clock::now();
  const auto kernel = KernelConfig::with_length_scale(o.length_scale, o.signal_variance);
  FittedModel model = fit(train, val, o.config(), kernel, o.likelihood.model());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_checkpoint(model, o.out);
  if (!o.log.empty()) write_training_log(model.log, o.log);
  json j{{"event", "fit"},
         {"method", to_string(model.method)},
         {"length_scale", model.kernel.length_scale},
         {"steps", model.log.empty() ? 0 : model.log.back().step},
         {"best_val_nll", best_val(model)},
         {"seconds", seconds},
         {"model", o.out}};
  std::cout << j.dump() << '\n';
  return 0;
}

int run_grid(const FitOptions& o, const std::vector<double>& grid) {
  auto [train, val] = o.load();
  report_ingest(o.train, train);
  report_ingest(o.val, val);
  ExperimentConfig cfg;
  cfg.likelihood = o.likelihood.model();
  cfg.train = o.config();
  cfg.length_scale_grid = grid;
  cfg.signal_variance = o.signal_variance;
  cfg.seed = o.seed;
  GridResult result = grid_search(train, val, cfg);
  for (const auto& row : result.table) {
    std::cout << json{{"event", "grid_row"},
                      {"length_scale", row.length_scale},
                      {"val_nll", row.val_nll},
                      {"steps", row.steps}}
                     .dump()
              << '\n';
  }
  std::cout << json{{"event", "grid_best"}, {"length_scale", result.best_length_scale}}.dump()
            << '\n';
  save_checkpoint(result.best_model, o.out);
  if (!o.log.empty()) write_training_log(result.best_model.log, o.log);
  return 0;
}

Dataset load_for_model(const FittedModel& model, const std::string& path, const std::string& target,
                       bool require_target) {
  IngestOptions opt;
  opt.require_target = require_target;
  Dataset d = ingest_csv(path, target, opt);
  if (d.dim() != static_cast<Index>(model.X.cols())) {
    throw InputError(path + ": has " + std::to_string(d.dim()) + " features, model expects " +
                     std::to_string(model.X.cols()));
  }
  const bool has_target = !d.target_name.empty();
  apply_preprocessing(d, model.prep);
  if (!has_target) d.target_name.clear();
  return d;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& target, const std::string& out_path, Index samples,
                std::uint64_t seed) {
  const FittedModel model = load_checkpoint(model_path);
  const Dataset d = load_for_model(model, data_path, target, false);
  std::ofstream out(out_path);
  if (!out) throw InputError("cannot write " + out_path);
  out.precision(17);
  std::mt19937_64 rng(seed);
  const bool labelled = !d.target_name.empty();
  for (Index c = 0; c < d.dim(); ++c) out << d.feature_names[c] << ',';
  if (labelled) out << d.target_name << ',';
  out << "latent_mean,latent_variance,y_mean";
  if (labelled) out << ",log_prob";
  out << '\n';
  for (Index i = 0; i < d.size(); ++i) {
    const auto row = point(d.X, i);
    const auto p = predict_latent(row, model);
    const double y_mean =
        model.prep.target_to_original(predictive_mean(p, model.likelihood, samples, rng));
    for (Index c = 0; c < d.dim(); ++c) {
      const double x = model.prep.standardized
                           ? d.X(i, c) * model.prep.feature_scale[c] + model.prep.feature_mean[c]
                           : d.X(i, c);
      out << x << ',';
    }
    if (labelled) out << model.prep.target_to_original(d.y[i]) << ',';
    out << p.mean << ',' << p.variance << ',' << y_mean;
    if (labelled) out << ',' << predictive_log_prob(p, d.y[i], model.likelihood, samples, rng);
    out << '\n';
  }
  std::cout << json{{"event", "predict"}, {"rows", d.size()}, {"out", out_path}}.dump() << '\n';
  return 0;
}

int run_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& target, Index samples, std::uint64_t seed) {
  const FittedModel model = load_checkpoint(model_path);
  const Dataset d = load_for_model(model, data_path, target, true);
  const NllSummary s = evaluate_nll(model, d.X, d.y, samples, seed);
  std::cout << json{{"event", "evaluate"},
                    {"nll_mean", s.mean},
                    {"nll_std_error", s.std_error},
                    {"count", s.count}}
                   .dump()
            << '\n';
  std::cerr << "test NLL " << s.mean << " ± " << s.std_error << " (n=" << s.count << ")\n";
  return 0;
}

int run_surface(const std::string& model_path, const std::string& out_path, Index resolution,
                std::optional<std::vector<double>> bounds) {
  const FittedModel model = load_checkpoint(model_path);
  if (model.X.cols() != 2) throw InputError("surface requires a 2-dimensional model");
  if (resolution < 2) throw InputError("resolution must be at least 2");
  double lo0 = model.X.col(0).minCoeff(), hi0 = model.X.col(0).maxCoeff();
  double lo1 = model.X.col(1).minCoeff(), hi1 = model.X.col(1).maxCoeff();
  if (bounds) {
    if (bounds->size() != 4) throw InputError("--bounds takes xmin xmax ymin ymax");
    lo0 = (*bounds)[0];
    hi0 = (*bounds)[1];
    lo1 = (*bounds)[2];
    hi1 = (*bounds)[3];
  }
  std::ofstream out(out_path);
  if (!out) throw InputError("cannot write " + out_path);
  out.precision(17);
  out << "x1,x2,latent_mean,latent_variance\n";
  const double step0 = (hi0 - lo0) / static_cast<double>(resolution - 1);
  const double step1 = (hi1 - lo1) / static_cast<double>(resolution - 1);
  std::vector<double> x(2);
  for (Index r = 0; r < resolution; ++r) {
    for (Index c = 0; c < resolution; ++c) {
      x[0] = lo0 + step0 * static_cast<double>(c);
      x[1] = lo1 + step1 * static_cast<double>(r);
      const auto p = predict_latent(x, model);
      out << x[0] << ',' << x[1] << ',' << p.mean << ',' << p.variance << '\n';
    }
  }
  std::cout << json{{"event", "surface"}, {"points", resolution * resolution}, {"out", out_path}}
                   .dump()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearest-neighbor variational inference for Gaussian process models"};
  app.set_config("--config", "", "TOML or INI file; keys mirror the flags, sections the subcommands");
  app.require_subcommand(1);

  SynthOptions synth;
  LikelihoodOptions synth_lik;
  std::string synth_out;
  std::optional<Index> synth_vecchia;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset from the GP prior");
  s->add_option("--n", synth.n, "Number of points");
  s->add_option("--d", synth.d, "Input dimension");
  s->add_option("--length-scale", synth.length_scale, "RBF length scale");
  s->add_option("--signal-variance", synth.signal_variance, "RBF signal variance");
  s->add_option("--seed", synth.seed, "Seed");
  s->add_option("--vecchia-k", synth_vecchia,
                "Sample from the nearest-neighbor prior with this many parents");
  synth_lik.add_to(s);
  s->add_option("--out", synth_out, "Output CSV")->required();

  std::string split_data, split_target = "y", split_prefix;
  SplitFractions fractions;
  std::uint64_t split_seed = 7;
  auto* sp = app.add_subcommand("split", "Split a CSV into train/validation/test files");
  sp->add_option("--data", split_data, "Input CSV")->required()->check(CLI::ExistingFile);
  sp->add_option("--target", split_target, "Target column name");
  sp->add_option("--train-fraction", fractions.train, "Training share")->capture_default_str();
  sp->add_option("--val-fraction", fractions.validation, "Validation share")->capture_default_str();
  sp->add_option("--test-fraction", fractions.test, "Test share")->capture_default_str();
  sp->add_option("--seed", split_seed, "Seed");
  sp->add_option("--out-prefix", split_prefix, "Writes <prefix>train.csv, val.csv, test.csv")
      ->required();

  FitOptions fit_opts;
  auto* f = app.add_subcommand("fit", "Train a model");
  fit_opts.add_to(f, true);

  FitOptions grid_opts;
  std::vector<double> grid = ExperimentConfig::default_grid();
  auto* g = app.add_subcommand("grid", "Select the length scale on the validation set");
  grid_opts.add_to(g, false);
  g->add_option("--grid", grid, "Candidate length scales");

  std::string model_path, data_path, target = "y", out_path;
  Index samples = 1000;
  std::uint64_t eval_seed = 7;
  auto* p = app.add_subcommand("predict", "Predict latent mean and variance for a CSV");
  p->add_option("--model", model_path, "Model checkpoint")->required()->check(CLI::ExistingFile);
  p->add_option("--data", data_path, "Input CSV")->required()->check(CLI::ExistingFile);
  p->add_option("--target", target, "Target column name to ignore if present");
  p->add_option("--samples", samples, "Monte Carlo samples for the predictive mean");
  p->add_option("--seed", eval_seed, "Seed");
  p->add_option("--out", out_path, "Output CSV")->required();

  auto* e = app.add_subcommand("evaluate", "Mean test NLL with standard error");
  e->add_option("--model", model_path, "Model checkpoint")->required()->check(CLI::ExistingFile);
  e->add_option("--data", data_path, "Labelled CSV")->required()->check(CLI::ExistingFile);
  e->add_option("--target", target, "Target column name");
  e->add_option("--samples", samples, "Monte Carlo samples per point");
  e->add_option("--seed", eval_seed, "Seed");

  Index resolution = 100;
  std::optional<std::vector<double>> bounds;
  auto* su = app.add_subcommand("surface", "Dense grid of latent predictions as CSV");
  su->add_option("--model", model_path, "Model checkpoint")->required()->check(CLI::ExistingFile);
  su->add_option("--resolution", resolution, "Points per axis");
  su->add_option("--bounds", bounds, "xmin xmax ymin ymax (default: training extent)")
      ->expected(4);
  su->add_option("--out", out_path, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) {
      synth.likelihood = synth_lik.model();
      synth.vecchia_k = synth_vecchia;
      const Dataset d = generate_synthetic(synth);
      write_csv(d, synth_out);
      std::cout << json{{"event", "synth"}, {"rows", d.size()}, {"out", synth_out}}.dump() << '\n';
    } else if (sp->parsed()) {
      const Dataset d = ingest_csv(split_data, split_target);
      report_ingest(split_data, d);
      const Splits parts = split(d, fractions, split_seed);
      write_csv(parts.train, split_prefix + "train.csv");
      write_csv(parts.validation, split_prefix + "val.csv");
      write_csv(parts.test, split_prefix + "test.csv");
      std::cout << json{{"event", "split"},
                        {"train", parts.train.size()},
                        {"validation", parts.validation.size()},
                        {"test", parts.test.size()}}
                       .dump()
                << '\n';
    } else if (f->parsed()) {
      return run_fit(fit_opts);
    } else if (g->parsed()) {
      return run_grid(grid_opts, grid);
    } else if (p->parsed()) {
      return run_predict(model_path, data_path, target, out_path, samples, eval_seed);
    } else if (e->parsed()) {
      return run_evaluate(model_path, data_path, target, samples, eval_seed);
    } else if (su->parsed()) {
      return run_surface(model_path, out_path, resolution, bounds);
    }
  } catch (const npvi::InputError& err) {
    std::cerr << "input error: " << err.what() << '\n';
    return 2;
  } catch (const npvi::NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << '\n';
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
