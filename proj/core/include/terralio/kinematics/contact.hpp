#pragma once

#include "terralio/kinematics/leg_model.hpp"
#include "terralio/terrain/terrain_model.hpp"

namespace terralio::kin {

struct ManifoldResidual {
  double value = 0.0;
  bool valid = false;  // false when the terrain query is unsupported
  Vec3 wheel_center = Vec3::Zero();
};

/// Wheel-terrain residual xi_z - r - f(xi_x, xi_y).
ManifoldResidual manifold_residual(const RobotState& state,
                                   const JointConfig& joints,
                                   const LegModel& leg, Side side,
                                   const terrain::TerrainModel& terrain);

/// Row d r / d [dtheta; dt] under right-multiplicative rotation perturbation
/// R <- R exp(hat(dtheta)) and additive translation.
Eigen::Matrix<double, 1, 6> manifold_jacobian(
    const RobotState& state, const JointConfig& joints, const LegModel& leg,
    Side side, const terrain::TerrainModel& terrain);

}  // namespace terralio::kin
