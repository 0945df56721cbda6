#pragma once

#include <string>
#include <vector>

#include "terralio/kinematics/leg_model.hpp"
#include "terralio/sim/terrain_spec.hpp"
#include "terralio/types.hpp"

namespace terralio::sim {

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
  std::int32_t label = 1;
};

struct Pole {
  Vec2 xy = Vec2::Zero();
  double radius = 0.05;
  double height = 2.0;
  std::int32_t label = 1;
};

struct SensorNoise {
  double lidar_sigma = 0.0;       // m, per-axis Gaussian on hit points
  double imu_accel_sigma = 0.0;   // m/s^2
  double imu_gyro_sigma = 0.0;    // rad/s
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
};

struct ScanConfig {
  int azimuth_steps = 180;
  int elevation_steps = 14;
  double fov_up = 0.35;      // rad above horizon
  double fov_down = -0.85;   // rad below horizon
  double max_range = 20.0;   // m
  double min_range = 0.3;    // m
  Vec3 sensor_offset{0.0, 0.0, 0.4};  // base frame
  double edge_sample_step = 0.08;     // m along primitive vertical edges
};

struct TrajectoryProfile {
  std::vector<Vec2> waypoints;
  double speed = 0.8;          // m/s along the polyline
  double ride_height = 0.5;    // base above terrain, m
  double smooth_window = 0.6;  // s, two-pass box smoothing of z and yaw
  double jolt_amplitude = 0.0; // m, impulsive z bump at step edges
  double jolt_decay = 0.15;    // s
  double jolt_freq = 9.0;      // Hz
};

struct Scene {
  std::string name = "custom";
  TerrainSpec terrain;
  std::vector<Box> boxes;
  std::vector<Pole> poles;
  TrajectoryProfile profile;
  SensorNoise noise;
  ScanConfig scan;
  Rect terrain_roi;  // compact ROI for the surface model

  std::string to_json() const;
  static Scene from_json(const std::string& text);
};

/// Desk-scale stock scenes: "flat", "staircase", "staircase_sparse",
/// "hill", "garden". Throws std::invalid_argument for unknown names.
Scene stock_scene(const std::string& name);
std::vector<std::string> stock_scene_names();

/// Two-leg hip/knee/wheel robot used by the stock scenes.
kin::LegModel default_robot();

}  // namespace terralio::sim
