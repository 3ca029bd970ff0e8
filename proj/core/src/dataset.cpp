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

#include "npvi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "npvi/error.hpp"
#include "npvi/neighbor_graph.hpp"

namespace npvi {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.reserve(rows.size());
  for (Index r = 0; r < rows.size(); ++r) {
    out.X.row(r) = X.row(rows[r]);
    out.y.push_back(y[rows[r]]);
    if (!latent.empty()) out.latent.push_back(latent[rows[r]]);
  }
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.prep = prep;
  return out;
}

Dataset ingest_csv(const std::filesystem::path& path, const std::string& target,
                   const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);

  std::optional<Index> target_col;
  std::optional<Index> latent_col;
  std::vector<Index> feature_cols;
  Dataset data;
  data.target_name = target;
  for (Index c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name == target) {
      target_col = c;
    } else if (name == kLatentColumn) {
      latent_col = c;
    } else {
      feature_cols.push_back(c);
      data.feature_names.push_back(name);
    }
  }
  if (!target_col && options.require_target) {
    throw InputError(path.string() + ": no target column '" + target + "'");
  }
  if (!target_col) data.target_name.clear();
  if (feature_cols.empty()) throw InputError(path.string() + ": no feature columns");

  std::vector<double> xs;
  Index row_number = 1;
  std::vector<Index> rejected_rows;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    bool ok = cells.size() == header.size();
    std::vector<double> values;
    if (ok) {
      for (const auto& cell : cells) {
        const auto v = parse_number(cell);
        if (!v) {
          ok = false;
          break;
        }
        values.push_back(*v);
      }
    }
    if (!ok) {
      rejected_rows.push_back(row_number);
      continue;
    }
    for (Index c : feature_cols) xs.push_back(values[c]);
    data.y.push_back(target_col ? values[*target_col] : 0.0);
    if (latent_col) data.latent.push_back(values[*latent_col]);
  }
  data.prep.rows_rejected = rejected_rows.size();
  if (data.y.empty()) {
    throw InputError(path.string() + ": all " + std::to_string(rejected_rows.size()) +
                     " data rows rejected (first bad row " +
                     (rejected_rows.empty() ? std::string("n/a")
                                            : std::to_string(rejected_rows.front())) +
                     ")");
  }
  if (data.y.size() < 3) {
    throw InputError(path.string() + ": at least 3 valid rows required, found " +
                     std::to_string(data.y.size()));
  }

  const Index n = data.y.size();
  const Index d = feature_cols.size();
  data.X = Eigen::Map<PointSet>(xs.data(), static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(d));

  if (options.standardize_features) {
    data.prep.standardized = true;
    for (Index c = 0; c < d; ++c) {
      const double mean = data.X.col(c).mean();
      const double var = (data.X.col(c).array() - mean).square().sum() / static_cast<double>(n);
      const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
      data.X.col(c) = (data.X.col(c).array() - mean) / scale;
      data.prep.feature_mean.push_back(mean);
      data.prep.feature_scale.push_back(scale);
    }
  }
  if (options.scale_target_unit) {
    const auto [lo, hi] = std::minmax_element(data.y.begin(), data.y.end());
    const double offset = *lo;
    const double scale = *hi > *lo ? *hi - *lo : 1.0;
    for (double& v : data.y) v = (v - offset) / scale;
    data.prep.target_offset = offset;
    data.prep.target_scale = scale;
  }
  if (options.clamp_floor) {
    data.prep.clamp_floor = options.clamp_floor;
    for (double& v : data.y) {
      if (v < *options.clamp_floor) {
        v = *options.clamp_floor;
        ++data.prep.rows_clamped;
      }
    }
  }
  return data;
}

void apply_preprocessing(Dataset& data, const Preprocessing& prep) {
  if (prep.standardized && prep.feature_mean.size() != data.dim()) {
    throw InputError("feature count " + std::to_string(data.dim()) +
                     " does not match the preprocessing record (" +
                     std::to_string(prep.feature_mean.size()) + ")");
  }
  prep.transform_features(data.X);
  for (double& v : data.y) v = prep.target_from_original(v);
  Index clamped = 0;
  if (prep.clamp_floor) {
    for (double& v : data.y) {
      if (v < *prep.clamp_floor) {
        v = *prep.clamp_floor;
        ++clamped;
      }
    }
  }
  const Index rejected = data.prep.rows_rejected;
  data.prep = prep;
  data.prep.rows_rejected = rejected;
  data.prep.rows_clamped = clamped;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const Index d = data.dim();
  for (Index c = 0; c < d; ++c) {
    out << (c < data.feature_names.size() ? data.feature_names[c] : "x" + std::to_string(c + 1))
        << ',';
  }
  out << data.target_name;
  const bool with_latent = data.latent.size() == data.size() && !data.latent.empty();
  if (with_latent) out << ',' << kLatentColumn;
  out << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index c = 0; c < d; ++c) out << format_number(data.X(i, c)) << ',';
    out << format_number(data.y[i]);
    if (with_latent) out << ',' << format_number(data.latent[i]);
    out << '\n';
  }
  if (!out) throw InputError("failed while writing " + path.string());
}

void SplitFractions::validate() const {
  if (train < 0.0 || validation < 0.0 || test < 0.0 ||
      std::abs(train + validation + test - 1.0) > 1e-9) {
    throw InputError("split fractions must be non-negative and sum to 1");
  }
}

Splits split(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed) {
  fractions.validate();
  const Index n = data.size();
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const auto n_train = static_cast<Index>(std::llround(fractions.train * static_cast<double>(n)));
  const auto n_val =
      static_cast<Index>(std::llround(fractions.validation * static_cast<double>(n)));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw InputError("split of " + std::to_string(n) + " rows leaves an empty subset");
  }
  const std::span<const Index> all(perm);
  Splits s;
  s.train = data.subset(all.subspan(0, n_train));
  s.validation = data.subset(all.subspan(n_train, n_val));
  s.test = data.subset(all.subspan(n_train + n_val));
  return s;
}

double sample_observation(const LikelihoodModel& lik, double f, std::mt19937_64& rng) {
  switch (lik.kind) {
    case LikelihoodKind::poisson_softplus: {
      std::poisson_distribution<long long> pois(softplus(f));
      return static_cast<double>(pois(rng));
    }
    case LikelihoodKind::lognormal: {
      std::normal_distribution<double> normal(f, std::sqrt(lik.sigma2));
      return std::exp(normal(rng));
    }
    case LikelihoodKind::gaussian: {
      std::normal_distribution<double> normal(f, std::sqrt(lik.sigma2));
      return normal(rng);
    }
  }
  return 0.0;
}

Dataset generate_synthetic(const SynthOptions& options) {
  if (options.n == 0 || options.d == 0) throw InputError("generate_synthetic: n and d must be positive");
  if (!options.vecchia_k && options.n > kMaxExactSynth) {
    throw InputError("generate_synthetic: n = " + std::to_string(options.n) +
                     " is too large for exact prior sampling (max " +
                     std::to_string(kMaxExactSynth) + "); use the Vecchia sampler (--vecchia-k)");
  }
  options.likelihood.validate();
  const KernelConfig cfg =
      KernelConfig::with_length_scale(options.length_scale, options.signal_variance);
  cfg.validate();

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset data;
  data.X.resize(static_cast<Eigen::Index>(options.n), static_cast<Eigen::Index>(options.d));
  for (Index i = 0; i < options.n; ++i) {
    for (Index c = 0; c < options.d; ++c) data.X(i, c) = unif(rng);
  }
  for (Index c = 0; c < options.d; ++c) data.feature_names.push_back("x" + std::to_string(c + 1));

  if (options.vecchia_k) {
    const NeighborGraph g = build_dag(data.X, *options.vecchia_k);
    const VecchiaConditionals cond = vecchia_conditionals(g, data.X, cfg);
    data.latent = sample_vecchia_prior(g, cond, rng);
  } else {
    const Eigen::LLT<Eigen::MatrixXd> llt(kernel_matrix(data.X, cfg));
    if (llt.info() != Eigen::Success) {
      throw NumericalError("generate_synthetic: prior covariance is not positive definite");
    }
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(options.n));
    for (Index i = 0; i < options.n; ++i) z[i] = normal(rng);
    const Eigen::VectorXd f = llt.matrixL() * z;
    data.latent.assign(f.data(), f.data() + f.size());
  }
  data.y.reserve(options.n);
  for (double f : data.latent) data.y.push_back(sample_observation(options.likelihood, f, rng));
  return data;
}

}  // namespace npvi
