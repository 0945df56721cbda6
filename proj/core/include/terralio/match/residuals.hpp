#pragma once

#include "terralio/types.hpp"

namespace terralio::match {

struct LineParam {
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();  // unit
};

struct PlaneParam {
  Vec3 normal = Vec3::UnitZ();  // unit
  double offset = 0.0;          // n^T p + offset = 0 on the plane
};

struct EdgeResidual {
  Vec3 value;      // perpendicular displacement (I - d d^T)(p - q)
  Mat3 jacobian;   // d value / d p_world
};

struct PlaneResidual {
  double value;                 // signed distance n^T p + offset
  Eigen::RowVector3d jacobian;  // d value / d p_world
};

EdgeResidual point_to_line_residual(const Vec3& p_world, const LineParam& line);
PlaneResidual point_to_plane_residual(const Vec3& p_world,
                                      const PlaneParam& plane);

}  // namespace terralio::match
