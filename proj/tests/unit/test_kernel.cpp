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

#include <Eigen/Eigenvalues>

#include "npvi/error.hpp"
#include "npvi/kernel.hpp"
#include "oracles.hpp"

namespace npvi {
namespace {

KernelConfig cfg(double ls, double sv = 1.0, double jitter = 0.0) {
  KernelConfig c;
  c.length_scale = ls;
  c.signal_variance = sv;
  c.jitter = jitter;
  return c;
}

TEST(Rbf, IdenticalPointsGiveSignalVariance) {
  const std::vector<double> a{0.3, -1.2};
  const std::vector<double> b{0.3, -1.2};
  EXPECT_DOUBLE_EQ(rbf(a, b, cfg(1.0)), 1.0);
}

TEST(Rbf, UnitDistance) {
  const std::vector<double> a{0.0, 0.0};
  const std::vector<double> b{0.6, 0.8};
  EXPECT_NEAR(rbf(a, b, cfg(1.0)), 0.6065306597126334, 1e-15);
}

TEST(Rbf, DecaysMonotonically) {
  const std::vector<double> a{0.0};
  double prev = 2.0;
  for (double r : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
    const std::vector<double> b{r};
    const double v = rbf(a, b, cfg(0.7));
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_EQ(prev, 0.0);
}

TEST(Rbf, JitterOnlyOnSameStorage) {
  const std::vector<double> a{0.5};
  const std::vector<double> b{0.5};
  const auto c = cfg(1.0, 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(rbf(a, a, c), 1.0 + 1e-6);
  EXPECT_DOUBLE_EQ(rbf(a, b, c), 1.0);
}

TEST(Rbf, ScaleLaw) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a{n(rng), n(rng), n(rng)}, b{n(rng), n(rng), n(rng)};
    std::vector<double> ha(3), hb(3);
    for (int j = 0; j < 3; ++j) {
      ha[j] = a[j] / 2.0;
      hb[j] = b[j] / 2.0;
    }
    EXPECT_NEAR(rbf(a, b, cfg(2.0)), rbf(ha, hb, cfg(1.0)), 1e-15);
  }
}

TEST(Rbf, DimensionMismatchThrows) {
  const std::vector<double> a{0.0};
  const std::vector<double> b{0.0, 1.0};
  EXPECT_THROW(rbf(a, b, cfg(1.0)), InputError);
}

TEST(KernelConfig, Validation) {
  EXPECT_THROW(cfg(0.0).validate(), InputError);
  EXPECT_THROW(cfg(1.0, -1.0).validate(), InputError);
  EXPECT_THROW(cfg(1.0, 1.0, -1e-9).validate(), InputError);
  EXPECT_NO_THROW(cfg(1.0).validate());
  const auto c = KernelConfig::with_length_scale(0.3, 2.0);
  EXPECT_DOUBLE_EQ(c.jitter, 2e-6);
  EXPECT_DOUBLE_EQ(c.prior_variance(), 2.0 + 2e-6);
}

TEST(KernelMatrix, SinglePoint) {
  PointSet A(1, 2);
  A << 0.1, 0.2;
  const auto K = kernel_matrix(A, KernelConfig::with_length_scale(1.0));
  ASSERT_EQ(K.rows(), 1);
  EXPECT_DOUBLE_EQ(K(0, 0), 1.000001);
}

TEST(KernelMatrix, ExactlySymmetric) {
  const auto X = testing::uniform_points(40, 3, 1);
  const auto K = kernel_matrix(X, KernelConfig::with_length_scale(0.37));
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) EXPECT_EQ(K(i, j), K(j, i));
  }
}

TEST(KernelMatrix, MatchesClosedForm) {
  const auto X = testing::uniform_points(25, 2, 2);
  const auto c = KernelConfig::with_length_scale(0.4, 1.7);
  const auto K = kernel_matrix(X, c);
  const auto ref = testing::dense_prior(X, c);
  EXPECT_LT((K - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(KernelMatrix, CrossShape) {
  const auto A = testing::uniform_points(4, 2, 3);
  const auto B = testing::uniform_points(7, 2, 4);
  const auto c = KernelConfig::with_length_scale(0.5);
  const auto K = kernel_matrix(A, B, c);
  ASSERT_EQ(K.rows(), 4);
  ASSERT_EQ(K.cols(), 7);
  EXPECT_NEAR(K(2, 5), std::exp(-0.5 * (A.row(2) - B.row(5)).squaredNorm() / 0.25), 1e-15);
}

TEST(KernelMatrix, PositiveDefiniteRandom20) {
  const auto X = testing::uniform_points(20, 2, 5);
  const auto K = kernel_matrix(X, KernelConfig::with_length_scale(0.5));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(KernelMatrix, PositiveDefinite500WithJitter) {
  const auto X = testing::uniform_points(500, 2, 6);
  auto c = KernelConfig::with_length_scale(0.3);
  c.jitter = 1e-8;
  const auto K = kernel_matrix(X, c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(KernelSubmatrix, SelectsRows) {
  const auto X = testing::uniform_points(10, 2, 7);
  const auto c = KernelConfig::with_length_scale(0.5);
  const std::vector<Index> idx{7, 2, 5};
  const auto S = kernel_submatrix(X, idx, c);
  const auto K = kernel_matrix(X, c);
  for (Index a = 0; a < 3; ++a) {
    for (Index b = 0; b < 3; ++b) EXPECT_DOUBLE_EQ(S(a, b), K(idx[a], idx[b]));
  }
}

}  // namespace
}  // namespace npvi
