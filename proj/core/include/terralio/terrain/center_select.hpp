#pragma once

#include <stdexcept>
#include <vector>

#include "terralio/types.hpp"

namespace terralio::terrain {

/// One frame of ground-classified points: planar coordinates and heights.
struct TerrainObservation {
  std::vector<Vec2> xy;
  std::vector<double> z;

  std::size_t size() const { return xy.size(); }
  /// Throws std::invalid_argument on size mismatch, emptiness or non-finite
  /// coordinates.
  void validate() const;
};

/// Selected kernel centers on a regular mesh over the ROI.
struct CenterSet {
  std::vector<Vec2> centers;
  double mesh_resolution = 0.07;
  double accept_radius = 0.07;
  int accept_count = 3;
  Rect roi;
};

struct NoSupportedCenters : std::runtime_error {
  NoSupportedCenters() : std::runtime_error("no supported centers") {}
};

/// Mesh nodes of spacing `mesh_resolution` inside `roi` supported by at
/// least `accept_count` observation points within `accept_radius`.
/// Throws NoSupportedCenters when the result would be empty.
CenterSet select_centers(const TerrainObservation& points, const Rect& roi,
                         double mesh_resolution, double accept_radius,
                         int accept_count);

/// Same selection rule but returns a possibly-empty node list; used for
/// center birth during recursive updates.
std::vector<Vec2> supported_mesh_nodes(const TerrainObservation& points,
                                       const Rect& roi, double mesh_resolution,
                                       double accept_radius, int accept_count);

}  // namespace terralio::terrain
