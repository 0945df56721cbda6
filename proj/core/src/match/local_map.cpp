#include "terralio/match/local_map.hpp"

#include <cmath>
#include <unordered_set>

namespace terralio::match {

namespace {

std::int64_t voxel_key(const Vec3& p, double size) {
  const auto q = [&](double v) {
    return static_cast<std::int64_t>(std::floor(v / size)) & 0x1fffff;
  };
  return (q(p.x()) << 42) | (q(p.y()) << 21) | q(p.z());
}

}  // namespace

void LocalMap::insert(const FeatureCloud& scan, const Mat3& rotation,
                      const Vec3& translation) {
  Frame frame;
  std::unordered_set<std::int64_t> edge_seen, planar_seen;
  // ground hits are kept as planar map points: terrain patches are the main
  // source of height information for the matcher
  for (const FeaturePoint& f : scan.points) {
    const Vec3 p = rotation * f.p + translation;
    if (f.kind == FeatureKind::Edge) {
      if (config_.voxel_size > 0.0 &&
          !edge_seen.insert(voxel_key(p, config_.voxel_size)).second)
        continue;
      frame.edge.push_back(p);
      frame.edge_labels.push_back(f.label);
    } else {
      if (config_.voxel_size > 0.0 &&
          !planar_seen.insert(voxel_key(p, config_.voxel_size)).second)
        continue;
      frame.planar.push_back(p);
      frame.planar_labels.push_back(f.label);
    }
  }
  frames_.push_back(std::move(frame));
  while (frames_.size() > config_.window) frames_.pop_front();
  rebuild();
}

void LocalMap::rebuild() {
  std::vector<Vec3> edges, planars;
  edge_labels_.clear();
  planar_labels_.clear();
  for (const Frame& f : frames_) {
    edges.insert(edges.end(), f.edge.begin(), f.edge.end());
    planars.insert(planars.end(), f.planar.begin(), f.planar.end());
    edge_labels_.insert(edge_labels_.end(), f.edge_labels.begin(),
                        f.edge_labels.end());
    planar_labels_.insert(planar_labels_.end(), f.planar_labels.begin(),
                          f.planar_labels.end());
  }
  edge_tree_.build(edges);
  planar_tree_.build(planars);
}

}  // namespace terralio::match
