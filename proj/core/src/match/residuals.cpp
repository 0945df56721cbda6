#include "terralio/match/residuals.hpp"

#include <stdexcept>

namespace terralio::match {

EdgeResidual point_to_line_residual(const Vec3& p_world,
                                    const LineParam& line) {
  if (std::abs(line.direction.squaredNorm() - 1.0) > 2e-9)
    throw std::invalid_argument("line direction must be unit length");
  EdgeResidual r;
  r.jacobian = Mat3::Identity() - line.direction * line.direction.transpose();
  r.value = r.jacobian * (p_world - line.point);
  return r;
}

PlaneResidual point_to_plane_residual(const Vec3& p_world,
                                      const PlaneParam& plane) {
  if (std::abs(plane.normal.squaredNorm() - 1.0) > 2e-9)
    throw std::invalid_argument("plane normal must be unit length");
  PlaneResidual r;
  r.value = plane.normal.dot(p_world) + plane.offset;
  r.jacobian = plane.normal.transpose();
  return r;
}

}  // namespace terralio::match
