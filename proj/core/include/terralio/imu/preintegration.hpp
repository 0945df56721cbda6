#pragma once

#include <span>

#include "terralio/types.hpp"

namespace terralio::imu {

struct ImuBiases {
  Vec3 accel = Vec3::Zero();
  Vec3 gyro = Vec3::Zero();
};

/// Accumulates samples covering (t_begin, t_end] into a relative motion
/// delta. Sample i integrates over dt_i measured from the previous sample
/// (or from t_begin for the first one). `gravity` is expressed in the frame
/// of the window start; the odometry pipeline passes zero here and applies
/// world gravity inside predict_pose instead.
/// An empty window yields an identity delta with zero duration.
PreintegratedDelta preintegrate(std::span<const ImuSample> samples,
                                double t_begin, double t_end,
                                const ImuBiases& biases,
                                const Vec3& gravity = Vec3::Zero());

/// Composes two consecutive deltas (gravity-free form).
PreintegratedDelta compose(const PreintegratedDelta& a,
                           const PreintegratedDelta& b);

/// Propagates the previous state through a gravity-free delta, applying
/// world-frame gravity over the delta duration.
RobotState predict_pose(const RobotState& prev, const PreintegratedDelta& delta,
                        const Vec3& gravity = Vec3(0.0, 0.0, -9.81));

}  // namespace terralio::imu
