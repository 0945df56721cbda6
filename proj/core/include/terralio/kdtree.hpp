#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <vector>

#include "terralio/types.hpp"

namespace terralio {

/// Static 3-D kd-tree for k-nearest-neighbor queries.
class KdTree3 {
 public:
  KdTree3() = default;

  void build(const std::vector<Vec3>& pts) {
    points_ = pts;
    order_.resize(pts.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.clear();
    nodes_.reserve(pts.size());
    if (!pts.empty()) root_ = build_range(0, static_cast<int>(pts.size()), 0);
  }

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::uint32_t id) const { return points_[id]; }

  /// Up to k nearest points to q, closest first. `max_dist` gates results.
  std::vector<std::uint32_t> knn(const Vec3& q, int k,
                                 double max_dist = 1e30) const {
    // max-heap of (dist2, id)
    std::priority_queue<std::pair<double, std::uint32_t>> heap;
    if (root_ >= 0) search(root_, q, k, max_dist * max_dist, heap);
    std::vector<std::uint32_t> out(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
      out[i] = heap.top().second;
      heap.pop();
    }
    return out;
  }

 private:
  struct Node {
    std::uint32_t id;
    std::int32_t left = -1, right = -1;
    std::uint8_t axis;
  };

  int build_range(int b, int e, int depth) {
    if (b >= e) return -1;
    const int axis = depth % 3;
    const int mid = (b + e) / 2;
    std::nth_element(order_.begin() + b, order_.begin() + mid,
                     order_.begin() + e,
                     [&](std::uint32_t a, std::uint32_t c) {
                       if (points_[a][axis] != points_[c][axis])
                         return points_[a][axis] < points_[c][axis];
                       return a < c;  // deterministic tie break
                     });
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back({order_[mid], -1, -1, static_cast<std::uint8_t>(axis)});
    const int l = build_range(b, mid, depth + 1);
    const int r = build_range(mid + 1, e, depth + 1);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  void search(int ni, const Vec3& q, int k, double gate2,
              std::priority_queue<std::pair<double, std::uint32_t>>& heap) const {
    const Node& n = nodes_[ni];
    const Vec3& p = points_[n.id];
    const double d2 = (p - q).squaredNorm();
    if (d2 <= gate2) {
      if (static_cast<int>(heap.size()) < k) {
        heap.push({d2, n.id});
      } else if (d2 < heap.top().first ||
                 (d2 == heap.top().first && n.id < heap.top().second)) {
        heap.pop();
        heap.push({d2, n.id});
      }
    }
    const double delta = q[n.axis] - p[n.axis];
    const int near = delta < 0 ? n.left : n.right;
    const int far = delta < 0 ? n.right : n.left;
    if (near >= 0) search(near, q, k, gate2, heap);
    const double worst = static_cast<int>(heap.size()) < k
                             ? gate2
                             : std::min(gate2, heap.top().first);
    if (far >= 0 && delta * delta <= worst) search(far, q, k, gate2, heap);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace terralio
