#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "terralio/kdtree.hpp"
#include "terralio/types.hpp"

namespace terralio::match {

struct MapConfig {
  double voxel_size = 0.1;   // m; <= 0 disables the filter
  std::size_t window = 20;   // sliding window, frames
};

/// Sliding-window world-frame feature map with per-kind kd-trees.
class LocalMap {
 public:
  explicit LocalMap(MapConfig config = {}) : config_(config) {}

  /// Transforms the scan's features by the pose and appends them; the
  /// oldest frame drops out beyond the window. Ground hits land in the
  /// planar tree: terrain patches carry most of the height information.
  void insert(const FeatureCloud& scan, const Mat3& rotation,
              const Vec3& translation);

  bool empty() const { return edge_tree_.size() + planar_tree_.size() == 0; }
  std::size_t size() const { return edge_tree_.size() + planar_tree_.size(); }

  const KdTree3& edge_tree() const { return edge_tree_; }
  const KdTree3& planar_tree() const { return planar_tree_; }
  std::int32_t edge_label(std::uint32_t id) const { return edge_labels_[id]; }
  std::int32_t planar_label(std::uint32_t id) const {
    return planar_labels_[id];
  }

 private:
  struct Frame {
    std::vector<Vec3> edge, planar;
    std::vector<std::int32_t> edge_labels, planar_labels;
  };

  void rebuild();

  MapConfig config_;
  std::deque<Frame> frames_;
  KdTree3 edge_tree_, planar_tree_;
  std::vector<std::int32_t> edge_labels_, planar_labels_;
};

}  // namespace terralio::match
