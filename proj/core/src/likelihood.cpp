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

#include "npvi/likelihood.hpp"

#include <cmath>

#include "npvi/error.hpp"

namespace npvi {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kTail = -30.0;  // below this softplus(f) == exp(f) to double precision
}  // namespace

std::string to_string(LikelihoodKind kind) {
  switch (kind) {
    case LikelihoodKind::poisson_softplus: return "poisson";
    case LikelihoodKind::lognormal: return "lognormal";
    case LikelihoodKind::gaussian: return "gaussian";
  }
  return "unknown";
}

LikelihoodKind likelihood_kind_from_string(std::string_view name) {
  if (name == "poisson" || name == "poisson_softplus") return LikelihoodKind::poisson_softplus;
  if (name == "lognormal") return LikelihoodKind::lognormal;
  if (name == "gaussian") return LikelihoodKind::gaussian;
  throw InputError("unknown likelihood '" + std::string(name) +
                   "' (expected poisson, lognormal or gaussian)");
}

void LikelihoodModel::validate() const {
  if (kind != LikelihoodKind::poisson_softplus && !(sigma2 > 0.0 && std::isfinite(sigma2))) {
    throw InputError("likelihood sigma2 must be positive, got " + std::to_string(sigma2));
  }
}

void LikelihoodModel::check_observation(double y) const {
  if (!std::isfinite(y)) throw InputError("non-finite observation");
  switch (kind) {
    case LikelihoodKind::poisson_softplus:
      if (y < 0.0 || y != std::floor(y)) {
        throw InputError("poisson observation must be a non-negative integer, got " +
                         std::to_string(y));
      }
      break;
    case LikelihoodKind::lognormal:
      if (!(y > 0.0)) {
        throw InputError("lognormal observation must be positive, got " + std::to_string(y));
      }
      break;
    case LikelihoodKind::gaussian:
      break;
  }
}

double softplus(double f) {
  return f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
}

double log_softplus(double f) {
  return f < kTail ? f : std::log(softplus(f));
}

double sigmoid(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

double dlog_softplus(double f) {
  return f < kTail ? 1.0 : sigmoid(f) / softplus(f);
}

double log_prob(const LikelihoodModel& model, double y, double f) {
  model.check_observation(y);
  switch (model.kind) {
    case LikelihoodKind::poisson_softplus:
      return -softplus(f) + (y > 0.0 ? y * log_softplus(f) : 0.0) - std::lgamma(y + 1.0);
    case LikelihoodKind::lognormal: {
      const double ly = std::log(y);
      const double r = ly - f;
      return -ly - 0.5 * (kLog2Pi + std::log(model.sigma2)) - 0.5 * r * r / model.sigma2;
    }
    case LikelihoodKind::gaussian: {
      const double r = y - f;
      return -0.5 * (kLog2Pi + std::log(model.sigma2)) - 0.5 * r * r / model.sigma2;
    }
  }
  return 0.0;
}

double dlog_prob_df(const LikelihoodModel& model, double y, double f) {
  model.check_observation(y);
  switch (model.kind) {
    case LikelihoodKind::poisson_softplus:
      // (y / lambda - 1) * sigmoid(f), arranged to stay finite as f -> -inf
      return y * dlog_softplus(f) - sigmoid(f);
    case LikelihoodKind::lognormal:
      return (std::log(y) - f) / model.sigma2;
    case LikelihoodKind::gaussian:
      return (y - f) / model.sigma2;
  }
  return 0.0;
}

}  // namespace npvi
