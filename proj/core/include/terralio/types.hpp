#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace terralio {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Axis-aligned rectangle in the horizontal plane.
struct Rect {
  Vec2 min{0.0, 0.0};
  Vec2 max{0.0, 0.0};

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y();
  }
  Rect dilated(double margin) const {
    return {min.array() - margin, max.array() + margin};
  }
};

/// Full estimator state: base pose, velocity and IMU biases.
struct RobotState {
  Mat3 rotation = Mat3::Identity();   // world orientation of the base
  Vec3 translation = Vec3::Zero();    // m
  Vec3 velocity = Vec3::Zero();       // m/s, world frame
  Vec3 accel_bias = Vec3::Zero();     // m/s^2
  Vec3 gyro_bias = Vec3::Zero();      // rad/s
};

enum class FeatureKind : std::uint8_t { Edge = 0, Planar = 1, Ground = 2 };

struct FeaturePoint {
  Vec3 p;                 // sensor frame
  FeatureKind kind;
  std::int32_t label;     // simulator surface id, -1 when unknown
};

/// Labeled feature points of one scan, expressed in the sensor frame.
struct FeatureCloud {
  double timestamp = 0.0;
  std::vector<FeaturePoint> points;

  std::size_t count(FeatureKind k) const {
    std::size_t n = 0;
    for (const auto& f : points) n += (f.kind == k);
    return n;
  }
};

struct ImuSample {
  double timestamp = 0.0;
  Vec3 accel = Vec3::Zero();  // specific force, sensor frame, m/s^2
  Vec3 gyro = Vec3::Zero();   // rad/s
};

struct JointConfig {
  double timestamp = 0.0;
  std::vector<double> angles;  // rad, left-leg joints then right-leg joints
};

/// Relative motion between two scans accumulated from IMU samples.
struct PreintegratedDelta {
  Mat3 dR = Mat3::Identity();
  Vec3 dV = Vec3::Zero();
  Vec3 dT = Vec3::Zero();
  double duration = 0.0;
};

struct TimedPose {
  double timestamp = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

}  // namespace terralio
