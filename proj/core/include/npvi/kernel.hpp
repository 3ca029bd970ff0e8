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

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace npvi {

using Index = std::size_t;

/// Points stored one per row so that each point is contiguous in memory.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> point(const PointSet& X, Index i) {
  return {X.data() + i * static_cast<Index>(X.cols()), static_cast<Index>(X.cols())};
}

struct KernelConfig {
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double jitter = 1e-6;

  /// Jitter defaults to 1e-6 of the signal variance.
  static KernelConfig with_length_scale(double length_scale, double signal_variance = 1.0);

  /// Throws InputError unless length_scale > 0, signal_variance > 0, jitter >= 0.
  void validate() const;

  /// kappa(x, x): prior variance of a single latent value, jitter included.
  double prior_variance() const { return signal_variance + jitter; }
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// RBF covariance. Jitter is added only when both arguments refer to the same storage.
double rbf(std::span<const double> x, std::span<const double> x2, const KernelConfig& cfg);

/// Covariance between rows of A and rows of B.
Eigen::MatrixXd kernel_matrix(const PointSet& A, const PointSet& B, const KernelConfig& cfg);

/// Symmetric covariance of A with itself, jitter on the diagonal.
Eigen::MatrixXd kernel_matrix(const PointSet& A, const KernelConfig& cfg);

/// Covariance among the rows of X selected by idx (jittered diagonal).
Eigen::MatrixXd kernel_submatrix(const PointSet& X, std::span<const Index> idx,
                                 const KernelConfig& cfg);

}  // namespace npvi
