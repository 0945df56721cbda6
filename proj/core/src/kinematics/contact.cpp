#include "terralio/kinematics/contact.hpp"

#include "terralio/so3.hpp"

namespace terralio::kin {

ManifoldResidual manifold_residual(const RobotState& state,
                                   const JointConfig& joints,
                                   const LegModel& leg, Side side,
                                   const terrain::TerrainModel& terrain) {
  ManifoldResidual r;
  r.wheel_center = wheel_center_world(state, joints, leg, side);
  const terrain::HeightQuery q =
      terrain.predict_height(r.wheel_center.head<2>());
  if (!q.supported) return r;
  r.valid = true;
  r.value = r.wheel_center.z() - leg.wheel_radius - q.z;
  return r;
}

Eigen::Matrix<double, 1, 6> manifold_jacobian(
    const RobotState& state, const JointConfig& joints, const LegModel& leg,
    Side side, const terrain::TerrainModel& terrain) {
  const LegChain& chain = leg.chain(side);
  const int off = leg.joint_offset(side);
  const std::span<const double> q(joints.angles.data() + off,
                                  static_cast<std::size_t>(chain.joint_count()));
  const Vec3 h = chain_end_position(chain, q);
  const Vec3 xi = state.rotation * h + state.translation;

  const Vec2 grad = terrain.predict_gradient(xi.head<2>());
  Eigen::RowVector3d dr_dxi(-grad.x(), -grad.y(), 1.0);

  // xi = R exp(hat(dtheta)) h + t + dt  =>  dxi/ddtheta = -R hat(h)
  Eigen::Matrix<double, 3, 6> dxi;
  dxi.leftCols<3>() = -state.rotation * hat(h);
  dxi.rightCols<3>() = Mat3::Identity();
  return dr_dxi * dxi;
}

}  // namespace terralio::kin
