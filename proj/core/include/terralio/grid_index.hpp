#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "terralio/types.hpp"

namespace terralio {

/// Uniform hash grid over 2-D points for radius queries. Returned indices
/// refer to insertion order and come back sorted, so downstream reductions
/// stay deterministic.
class GridIndex2 {
 public:
  explicit GridIndex2(double cell_size) : cell_(cell_size) {}

  std::uint32_t insert(const Vec2& p) {
    const auto id = static_cast<std::uint32_t>(points_.size());
    points_.push_back(p);
    cells_[key(p)].push_back(id);
    return id;
  }

  void build(const std::vector<Vec2>& pts) {
    points_.reserve(points_.size() + pts.size());
    for (const Vec2& p : pts) insert(p);
  }

  std::vector<std::uint32_t> radius_query(const Vec2& q, double radius) const {
    std::vector<std::uint32_t> out;
    const double r2 = radius * radius;
    const int span = static_cast<int>(std::ceil(radius / cell_));
    const int cx = coord(q.x());
    const int cy = coord(q.y());
    for (int ix = cx - span; ix <= cx + span; ++ix) {
      for (int iy = cy - span; iy <= cy + span; ++iy) {
        auto it = cells_.find(pack(ix, iy));
        if (it == cells_.end()) continue;
        for (std::uint32_t id : it->second)
          if ((points_[id] - q).squaredNorm() <= r2) out.push_back(id);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  const Vec2& point(std::uint32_t id) const { return points_[id]; }
  std::size_t size() const { return points_.size(); }

 private:
  int coord(double v) const { return static_cast<int>(std::floor(v / cell_)); }
  std::int64_t key(const Vec2& p) const {
    return pack(coord(p.x()), coord(p.y()));
  }
  static std::int64_t pack(int x, int y) {
    return (static_cast<std::int64_t>(x) << 32) ^
           static_cast<std::int64_t>(static_cast<std::uint32_t>(y));
  }

  double cell_;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> cells_;
  std::vector<Vec2> points_;
};

}  // namespace terralio
