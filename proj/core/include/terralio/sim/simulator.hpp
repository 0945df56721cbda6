#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "terralio/sim/scene.hpp"
#include "terralio/types.hpp"

namespace terralio::sim {

/// Synchronized synthetic streams for one run, with exact ground truth.
struct SequenceBundle {
  Scene scene;
  kin::LegModel robot;
  std::uint64_t seed = 0;
  std::vector<TimedPose> gt_poses;       // scan rate (10 Hz)
  std::vector<FeatureCloud> scans;       // 10 Hz, sensor frame
  std::vector<ImuSample> imu;            // 200 Hz
  std::vector<JointConfig> joints;       // 500 Hz
};

constexpr double kScanRate = 10.0;
constexpr double kImuRate = 200.0;
constexpr double kJointRate = 500.0;
constexpr double kDenseRate = 2000.0;  // internal pose stream

/// Ground-truth base poses along the waypoint polyline at `rate` Hz.
/// z and yaw are double-box smoothed; optional z jolts fire at step edges.
std::vector<TimedPose> generate_trajectory(const Scene& scene, double rate);

/// Ray-cast feature scan at one pose. Terrain hits come back as Ground
/// points, box faces as Planar, box vertical edges and pole axes as Edge.
FeatureCloud render_scan(const Scene& scene, const TimedPose& pose,
                         std::mt19937_64& rng);

/// Inverse IMU kinematics along a dense pose stream: a = R^T(x'' - g),
/// omega = log(R_i^T R_{i+1})/dt, readings taken at interval midpoints.
std::vector<ImuSample> generate_imu(const std::vector<TimedPose>& dense,
                                    double dense_rate, const SensorNoise& noise,
                                    const Vec3& gravity, double out_rate,
                                    std::mt19937_64& rng);

/// Per-sample joint angles (knee slaved at -2x hip) solved by bisection so
/// each wheel contact sits on the terrain; unreachable samples hold the
/// previous value.
std::vector<JointConfig> generate_joints(const std::vector<TimedPose>& dense,
                                         double dense_rate, const Scene& scene,
                                         const kin::LegModel& robot,
                                         double out_rate);

/// Full deterministic bundle for a scene and seed.
SequenceBundle simulate(const Scene& scene, std::uint64_t seed);

void save_bundle(const SequenceBundle& bundle, const std::string& dir);
SequenceBundle load_bundle(const std::string& dir);

}  // namespace terralio::sim
