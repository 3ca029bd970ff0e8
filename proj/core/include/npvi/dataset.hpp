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
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "npvi/kernel.hpp"
#include "npvi/likelihood.hpp"
#include "npvi/preprocessing.hpp"

namespace npvi {

struct Dataset {
  PointSet X;
  std::vector<double> y;
  /// True latent values when known (synthetic data); written as the "f_true" column.
  std::vector<double> latent;
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  Preprocessing prep;

  Index size() const { return y.size(); }
  Index dim() const { return static_cast<Index>(X.cols()); }
  Dataset subset(std::span<const Index> rows) const;
};

inline constexpr const char* kLatentColumn = "f_true";

struct IngestOptions {
  bool standardize_features = false;
  /// Translate and scale the target to [0, 1].
  bool scale_target_unit = false;
  /// Raise targets below this value to it (for lognormal data containing zeros).
  std::optional<double> clamp_floor;
  /// When false, a file without the target column is accepted for prediction;
  /// y is then all zeros and target_name is empty.
  bool require_target = true;
};

/// Reads a headered numeric CSV. Every column other than the target (and f_true)
/// is a feature. Rows with missing or non-numeric cells are dropped and counted.
Dataset ingest_csv(const std::filesystem::path& path, const std::string& target,
                   const IngestOptions& options = {});

/// Applies transforms fitted on another dataset (typically the training split) to data
/// ingested without preprocessing. data.prep receives the applied constants.
void apply_preprocessing(Dataset& data, const Preprocessing& prep);

/// Writes features, target and (if present) f_true with round-trip precision.
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct SplitFractions {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;

  void validate() const;
};

struct Splits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Seeded permutation followed by contiguous slicing.
Splits split(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed);

struct SynthOptions {
  Index n = 100;
  Index d = 2;
  double length_scale = 0.1;
  double signal_variance = 1.0;
  LikelihoodModel likelihood = LikelihoodModel::gaussian();
  std::uint64_t seed = 0;
  /// Sample f from the nearest-neighbor factorized prior with this many parents
  /// instead of a dense Cholesky (required above kMaxExactSynth points).
  std::optional<Index> vecchia_k;
};

inline constexpr Index kMaxExactSynth = 5000;

/// X uniform on [0,1]^d, f from the GP prior, y from the likelihood; f kept in `latent`.
Dataset generate_synthetic(const SynthOptions& options);

/// Draws one observation from p(y | f).
double sample_observation(const LikelihoodModel& lik, double f, std::mt19937_64& rng);

}  // namespace npvi
