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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "npvi/kernel.hpp"
#include "npvi/neighbor_graph.hpp"
#include "npvi/variational.hpp"

namespace npvi::testing {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline PointSet uniform_points(Index n, Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointSet X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = u(rng);
  }
  return X;
}

/// Dense prior covariance written out from the closed form, with jitter on the diagonal.
inline Eigen::MatrixXd dense_prior(const PointSet& X, double length_scale, double signal_variance,
                                   double jitter) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r2 = (X.row(i) - X.row(j)).squaredNorm();
      K(i, j) = signal_variance * std::exp(-0.5 * r2 / (length_scale * length_scale));
    }
    K(i, i) += jitter;
  }
  return K;
}

inline Eigen::MatrixXd dense_prior(const PointSet& X, const KernelConfig& cfg) {
  return dense_prior(X, cfg.length_scale, cfg.signal_variance, cfg.jitter);
}

inline double mvn_logpdf(const Eigen::VectorXd& f, const Eigen::VectorXd& mean,
                         const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd r = f - mean;
  const Eigen::VectorXd z = llt.matrixL().solve(r);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(f.size()) * kLog2Pi + logdet + z.squaredNorm());
}

struct DensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double log_marginal = 0.0;
};

/// Exact GP regression posterior over the training latents and log p(y).
inline DensePosterior gaussian_posterior(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                         double sigma2) {
  const Eigen::Index n = K.rows();
  Eigen::MatrixXd C = K;
  C.diagonal().array() += sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  DensePosterior out;
  const Eigen::VectorXd alpha = llt.solve(y);
  out.mean = K * alpha;
  out.cov = K - K * llt.solve(K);
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.log_marginal = mvn_logpdf(y, Eigen::VectorXd::Zero(n), C);
  return out;
}

/// Exact GP predictive latent mean and variance at new inputs.
inline std::pair<double, double> gaussian_predict(const PointSet& X, const Eigen::VectorXd& y,
                                                  const KernelConfig& cfg, double sigma2,
                                                  const Eigen::RowVectorXd& x) {
  const Eigen::MatrixXd K = dense_prior(X, cfg);
  Eigen::MatrixXd C = K;
  C.diagonal().array() += sigma2;
  Eigen::VectorXd ks(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    ks[i] = cfg.signal_variance *
            std::exp(-0.5 * (X.row(i) - x).squaredNorm() / (cfg.length_scale * cfg.length_scale));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  const double mean = ks.dot(llt.solve(y));
  const double var = cfg.signal_variance + cfg.jitter - ks.dot(llt.solve(ks));
  return {mean, var};
}

/// Dense lower-triangular factor assembled from the sparse rows.
inline Eigen::MatrixXd dense_factor(const VariationalParams& params, const NeighborGraph& graph) {
  const Eigen::Index n = static_cast<Eigen::Index>(graph.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < graph.size(); ++i) {
    const auto pa = graph.parents_of(i);
    const auto row = params.off_row(i);
    for (Index a = 0; a < pa.size(); ++a) L(i, pa[a]) = row[a];
    L(i, i) = params.diag(i);
  }
  return L;
}

/// Complete DAG: every point has all lower indices as parents.
inline NeighborGraph full_graph(Index n) {
  NeighborGraph g;
  g.k = n > 0 ? n - 1 : 0;
  g.parents.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) g.parents[i].push_back(j);
  }
  g.order.resize(n);
  for (Index i = 0; i < n; ++i) g.order[i] = i;
  return g;
}

/// Random DAG with exactly min(k, i) parents drawn uniformly from lower indices.
inline NeighborGraph random_graph(Index n, Index k, std::mt19937_64& rng) {
  NeighborGraph g;
  g.k = k;
  g.parents.resize(n);
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> lower(i);
    for (Index j = 0; j < i; ++j) lower[j] = j;
    std::shuffle(lower.begin(), lower.end(), rng);
    lower.resize(std::min(k, i));
    std::sort(lower.begin(), lower.end());
    g.parents[i] = lower;
  }
  g.order.resize(n);
  for (Index i = 0; i < n; ++i) g.order[i] = i;
  return g;
}

inline Eigen::MatrixXd random_spd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = normal(rng);
  }
  Eigen::MatrixXd S = A * A.transpose() / static_cast<double>(n);
  S.diagonal().array() += 0.5;
  return S;
}

/// Random variational state with all active entries filled.
inline VariationalParams random_params(const NeighborGraph& graph, std::mt19937_64& rng,
                                       double off_scale = 0.3) {
  std::normal_distribution<double> normal;
  VariationalParams p(graph.size(), graph.k);
  for (Index i = 0; i < graph.size(); ++i) {
    p.mu[i] = normal(rng);
    p.log_diag[i] = 0.3 * normal(rng) - 0.5;
    auto row = p.off_row(i);
    for (Index a = 0; a < graph.parents_of(i).size(); ++a) row[a] = off_scale * normal(rng);
  }
  return p;
}

/// Relative error with an absolute floor for entries near zero.
inline double rel_error(double a, double b, double floor = 1e-6) {
  const double diff = std::abs(a - b);
  if (diff <= floor) return 0.0;
  return diff / std::max(std::abs(a), std::abs(b));
}

}  // namespace npvi::testing
