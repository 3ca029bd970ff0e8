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
#include <limits>
#include <span>
#include <vector>

#include "npvi/kernel.hpp"

namespace npvi {

struct Neighbor {
  Index index;
  double dist2;
};

/// Restricts a k-NN query. Only indices strictly below `below` are returned, and
/// `exclude` (if set) is skipped.
struct KnnFilter {
  static constexpr Index none = std::numeric_limits<Index>::max();
  Index below = none;
  Index exclude = none;

  bool accepts(Index i) const { return i < below && i != exclude; }
};

/// Exact Euclidean k-nearest-neighbor index. Results are ordered by distance,
/// ties resolved toward the smaller index.
class KdTree {
 public:
  explicit KdTree(const PointSet& points, Index leaf_size = 12);

  std::vector<Neighbor> knn(std::span<const double> query, Index k,
                            const KnnFilter& filter = {}) const;

  Index size() const { return n_; }
  Index dim() const { return d_; }

 private:
  struct Node {
    Index begin;
    Index end;
    Index left = 0;   // 0 means leaf
    Index right = 0;
    Index split_dim = 0;
    double split = 0.0;
    Index min_index = 0;
  };

  Index build(Index begin, Index end);
  void search(Index node, std::span<const double> q, Index k, const KnnFilter& filter,
              std::vector<Neighbor>& heap) const;

  Index n_;
  Index d_;
  Index leaf_size_;
  std::vector<double> coords_;  // row-major copy of the points
  std::vector<Index> perm_;
  std::vector<Node> nodes_;
};

}  // namespace npvi
