#include "terralio/terrain/center_select.hpp"

#include <cmath>

#include "terralio/grid_index.hpp"

namespace terralio::terrain {

void TerrainObservation::validate() const {
  if (xy.size() != z.size())
    throw std::invalid_argument("observation xy/z length mismatch");
  if (xy.empty()) throw std::invalid_argument("empty observation");
  for (std::size_t i = 0; i < xy.size(); ++i)
    if (!xy[i].allFinite() || !std::isfinite(z[i]))
      throw std::invalid_argument("non-finite observation coordinate");
}

std::vector<Vec2> supported_mesh_nodes(const TerrainObservation& points,
                                       const Rect& roi, double mesh_resolution,
                                       double accept_radius,
                                       int accept_count) {
  if (!(mesh_resolution > 0.0))
    throw std::invalid_argument("mesh_resolution must be > 0");
  if (accept_count < 1) throw std::invalid_argument("accept_count must be >= 1");
  points.validate();

  GridIndex2 index(std::max(accept_radius, mesh_resolution));
  index.build(points.xy);

  // Only mesh nodes near some observation can pass the count test.
  const int nx =
      static_cast<int>(std::floor((roi.max.x() - roi.min.x()) / mesh_resolution + 1e-9));
  const int ny =
      static_cast<int>(std::floor((roi.max.y() - roi.min.y()) / mesh_resolution + 1e-9));

  Rect bbox{points.xy.front(), points.xy.front()};
  for (const Vec2& p : points.xy) {
    bbox.min = bbox.min.cwiseMin(p);
    bbox.max = bbox.max.cwiseMax(p);
  }
  bbox = bbox.dilated(accept_radius);

  auto clamp_idx = [&](double v, double lo, int n) {
    const int i = static_cast<int>(std::floor((v - lo) / mesh_resolution));
    return std::min(std::max(i, 0), n);
  };
  const int i0 = clamp_idx(bbox.min.x(), roi.min.x(), nx);
  const int i1 = clamp_idx(bbox.max.x(), roi.min.x(), nx);
  const int j0 = clamp_idx(bbox.min.y(), roi.min.y(), ny);
  const int j1 = clamp_idx(bbox.max.y(), roi.min.y(), ny);

  std::vector<Vec2> nodes;
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      const Vec2 node(roi.min.x() + i * mesh_resolution,
                      roi.min.y() + j * mesh_resolution);
      const auto hits = index.radius_query(node, accept_radius);
      if (static_cast<int>(hits.size()) >= accept_count) nodes.push_back(node);
    }
  }
  return nodes;
}

CenterSet select_centers(const TerrainObservation& points, const Rect& roi,
                         double mesh_resolution, double accept_radius,
                         int accept_count) {
  CenterSet set;
  set.mesh_resolution = mesh_resolution;
  set.accept_radius = accept_radius;
  set.accept_count = accept_count;
  set.roi = roi;
  set.centers = supported_mesh_nodes(points, roi, mesh_resolution,
                                     accept_radius, accept_count);
  if (set.centers.empty()) throw NoSupportedCenters();
  return set;
}

}  // namespace terralio::terrain
