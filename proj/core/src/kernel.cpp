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

#include "npvi/kernel.hpp"

#include <cmath>
#include <string>

#include "npvi/error.hpp"

namespace npvi {

KernelConfig KernelConfig::with_length_scale(double length_scale, double signal_variance) {
  KernelConfig cfg;
  cfg.length_scale = length_scale;
  cfg.signal_variance = signal_variance;
  cfg.jitter = 1e-6 * signal_variance;
  return cfg;
}

void KernelConfig::validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw InputError("kernel length_scale must be positive, got " + std::to_string(length_scale));
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw InputError("kernel signal_variance must be positive, got " +
                     std::to_string(signal_variance));
  }
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
    throw InputError("kernel jitter must be non-negative, got " + std::to_string(jitter));
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

double rbf(std::span<const double> x, std::span<const double> x2, const KernelConfig& cfg) {
  if (x.size() != x2.size() || x.empty()) {
    throw InputError("rbf: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(x2.size()) + ")");
  }
  const double r2 = squared_distance(x, x2);
  double k = cfg.signal_variance * std::exp(-0.5 * r2 / (cfg.length_scale * cfg.length_scale));
  if (x.data() == x2.data()) k += cfg.jitter;
  return k;
}

Eigen::MatrixXd kernel_matrix(const PointSet& A, const PointSet& B, const KernelConfig& cfg) {
  if (A.cols() != B.cols()) {
    throw InputError("kernel_matrix: dimension mismatch (" + std::to_string(A.cols()) + " vs " +
                     std::to_string(B.cols()) + ")");
  }
  if (&A == &B) return kernel_matrix(A, cfg);
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Index i = 0; i < static_cast<Index>(A.rows()); ++i) {
    for (Index j = 0; j < static_cast<Index>(B.rows()); ++j) {
      K(i, j) = rbf(point(A, i), point(B, j), cfg);
    }
  }
  return K;
}

Eigen::MatrixXd kernel_matrix(const PointSet& A, const KernelConfig& cfg) {
  const auto n = static_cast<Index>(A.rows());
  Eigen::MatrixXd K(n, n);
  for (Index i = 0; i < n; ++i) {
    K(i, i) = rbf(point(A, i), point(A, i), cfg);
    for (Index j = 0; j < i; ++j) {
      K(i, j) = K(j, i) = rbf(point(A, i), point(A, j), cfg);
    }
  }
  return K;
}

Eigen::MatrixXd kernel_submatrix(const PointSet& X, std::span<const Index> idx,
                                 const KernelConfig& cfg) {
  const Index m = idx.size();
  Eigen::MatrixXd K(m, m);
  for (Index a = 0; a < m; ++a) {
    K(a, a) = cfg.prior_variance();
    for (Index b = 0; b < a; ++b) {
      K(a, b) = K(b, a) = rbf(point(X, idx[a]), point(X, idx[b]), cfg);
    }
  }
  return K;
}

}  // namespace npvi
