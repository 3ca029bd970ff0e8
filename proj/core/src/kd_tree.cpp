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

#include "npvi/kd_tree.hpp"

#include <algorithm>
#include <cmath>

#include "npvi/error.hpp"

namespace npvi {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

}  // namespace

KdTree::KdTree(const PointSet& points, Index leaf_size)
    : n_(static_cast<Index>(points.rows())),
      d_(static_cast<Index>(points.cols())),
      leaf_size_(std::max<Index>(leaf_size, 1)) {
  if (n_ == 0 || d_ == 0) throw InputError("KdTree: empty point set");
  coords_.assign(points.data(), points.data() + n_ * d_);
  for (double v : coords_) {
    if (!std::isfinite(v)) throw InputError("KdTree: non-finite coordinate");
  }
  perm_.resize(n_);
  for (Index i = 0; i < n_; ++i) perm_[i] = i;
  nodes_.reserve(2 * n_ / leaf_size_ + 2);
  build(0, n_);
}

Index KdTree::build(Index begin, Index end) {
  const Index id = nodes_.size();
  nodes_.push_back(Node{begin, end});
  Index min_index = perm_[begin];
  for (Index p = begin + 1; p < end; ++p) min_index = std::min(min_index, perm_[p]);
  nodes_[id].min_index = min_index;
  if (end - begin <= leaf_size_) return id;

  // split on the dimension of widest spread
  Index best_dim = 0;
  double best_spread = -1.0;
  for (Index c = 0; c < d_; ++c) {
    double lo = coords_[perm_[begin] * d_ + c];
    double hi = lo;
    for (Index p = begin + 1; p < end; ++p) {
      const double v = coords_[perm_[p] * d_ + c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = c;
    }
  }
  if (best_spread <= 0.0) return id;  // all points coincide

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](Index a, Index b) {
                     return coords_[a * d_ + best_dim] < coords_[b * d_ + best_dim];
                   });
  const double split = coords_[perm_[mid] * d_ + best_dim];
  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].split_dim = best_dim;
  nodes_[id].split = split;
  return id;
}

std::vector<Neighbor> KdTree::knn(std::span<const double> query, Index k,
                                  const KnnFilter& filter) const {
  if (query.size() != d_) {
    throw InputError("KdTree::knn: query dimension " + std::to_string(query.size()) +
                     " does not match index dimension " + std::to_string(d_));
  }
  std::vector<Neighbor> heap;
  if (k == 0) return heap;
  heap.reserve(k + 1);
  search(0, query, k, filter, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree::search(Index id, std::span<const double> q, Index k, const KnnFilter& filter,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[id];
  if (node.min_index >= filter.below) return;

  if (node.left == 0) {
    for (Index p = node.begin; p < node.end; ++p) {
      const Index idx = perm_[p];
      if (!filter.accepts(idx)) continue;
      const Neighbor cand{idx, squared_distance(q, {coords_.data() + idx * d_, d_})};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }

  const double diff = q[node.split_dim] - node.split;
  const Index near = diff < 0.0 ? node.left : node.right;
  const Index far = diff < 0.0 ? node.right : node.left;
  search(near, q, k, filter, heap);
  // equal distances must still be visited so the smaller index wins ties
  if (heap.size() < k || diff * diff <= heap.front().dist2) {
    search(far, q, k, filter, heap);
  }
}

}  // namespace npvi
