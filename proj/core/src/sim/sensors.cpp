#include <Eigen/Geometry>
#include <cmath>
#include <limits>
#include <optional>

#include "terralio/kinematics/leg_model.hpp"
#include "terralio/sim/simulator.hpp"
#include "terralio/so3.hpp"

namespace terralio::sim {

namespace {

constexpr std::int32_t kTerrainLabel = 0;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::optional<double> ray_box(const Vec3& o, const Vec3& d, const Box& box) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-12) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double lo = (box.min[a] - o[a]) / d[a];
    double hi = (box.max[a] - o[a]) / d[a];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return std::nullopt;
  }
  return t0 > 1e-9 ? std::optional<double>(t0) : std::nullopt;
}

std::optional<double> ray_terrain(const Vec3& o, const Vec3& d,
                                  const TerrainSpec& terrain, double t_min,
                                  double t_max) {
  const double step = 0.05;
  auto under = [&](double t) -> std::optional<bool> {
    const Vec3 p = o + t * d;
    const Vec2 xy = p.head<2>();
    if (!terrain.extent.contains(xy)) return std::nullopt;
    return p.z() < terrain.height(xy);
  };
  double t_prev = t_min;
  auto u_prev = under(t_prev);
  if (!u_prev) return std::nullopt;
  if (*u_prev) return std::nullopt;  // starting below ground: discard ray
  for (double t = t_min + step; t <= t_max + step; t += step) {
    const double tc = std::min(t, t_max);
    const auto u = under(tc);
    if (!u) return std::nullopt;  // left the modeled world
    if (*u) {
      // bracketed crossing; bisect to machine precision
      double lo = t_prev, hi = tc;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (*under(mid))
          hi = mid;
        else
          lo = mid;
        if (hi - lo < 1e-13) break;
      }
      return 0.5 * (lo + hi);
    }
    t_prev = tc;
    if (tc >= t_max) break;
  }
  return std::nullopt;
}

}  // namespace

FeatureCloud render_scan(const Scene& scene, const TimedPose& pose,
                         std::mt19937_64& rng) {
  const ScanConfig& cfg = scene.scan;
  FeatureCloud cloud;
  cloud.timestamp = pose.timestamp;

  const Vec3 origin = pose.translation + pose.rotation * cfg.sensor_offset;
  const Mat3& R = pose.rotation;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sigma = scene.noise.lidar_sigma;

  // points are expressed in the base frame; the sensor offset only places
  // the ray origin
  auto emit = [&](const Vec3& p_world, FeatureKind kind, std::int32_t label) {
    Vec3 p = R.transpose() * (p_world - pose.translation);
    if (sigma > 0.0)
      p += sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
    cloud.points.push_back({p, kind, label});
  };

  for (int ai = 0; ai < cfg.azimuth_steps; ++ai) {
    const double az = 2.0 * M_PI * ai / cfg.azimuth_steps;
    for (int ei = 0; ei < cfg.elevation_steps; ++ei) {
      const double el =
          cfg.fov_down + (cfg.fov_up - cfg.fov_down) *
                             (cfg.elevation_steps == 1
                                  ? 0.5
                                  : static_cast<double>(ei) /
                                        (cfg.elevation_steps - 1));
      // ray direction in the world frame (sensor shares base orientation)
      const Vec3 dir =
          R * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                   std::sin(el));

      double best_t = std::numeric_limits<double>::infinity();
      FeatureKind kind = FeatureKind::Ground;
      std::int32_t label = kTerrainLabel;

      if (const auto t =
              ray_terrain(origin, dir, scene.terrain, cfg.min_range,
                          cfg.max_range)) {
        best_t = *t;
      }
      for (const Box& box : scene.boxes) {
        const auto t = ray_box(origin, dir, box);
        if (t && *t >= cfg.min_range && *t < best_t && *t <= cfg.max_range) {
          best_t = *t;
          kind = FeatureKind::Planar;
          label = box.label;
        }
      }
      if (std::isfinite(best_t)) emit(origin + best_t * dir, kind, label);
    }
  }

  // edge features sampled along primitive vertical edges and pole axes
  auto emit_edge_column = [&](double x, double y, double z0, double z1,
                              std::int32_t label) {
    for (double z = z0; z <= z1 + 1e-9; z += cfg.edge_sample_step) {
      const Vec3 p(x, y, z);
      const double range = (p - origin).norm();
      if (range < cfg.min_range || range > cfg.max_range) continue;
      const double el = std::asin((p.z() - origin.z()) / range);
      if (el < cfg.fov_down || el > cfg.fov_up) continue;
      emit(p, FeatureKind::Edge, label);
    }
  };
  for (const Box& box : scene.boxes) {
    emit_edge_column(box.min.x(), box.min.y(), box.min.z(), box.max.z(),
                     box.label);
    emit_edge_column(box.min.x(), box.max.y(), box.min.z(), box.max.z(),
                     box.label);
    emit_edge_column(box.max.x(), box.min.y(), box.min.z(), box.max.z(),
                     box.label);
    emit_edge_column(box.max.x(), box.max.y(), box.min.z(), box.max.z(),
                     box.label);
  }
  for (const Pole& pole : scene.poles) {
    const double ground = scene.terrain.height(pole.xy);
    emit_edge_column(pole.xy.x(), pole.xy.y(), ground, ground + pole.height,
                     pole.label);
  }
  return cloud;
}

std::vector<ImuSample> generate_imu(const std::vector<TimedPose>& dense,
                                    double dense_rate, const SensorNoise& noise,
                                    const Vec3& gravity, double out_rate,
                                    std::mt19937_64& rng) {
  std::vector<ImuSample> out;
  const double dt = 1.0 / dense_rate;
  const auto stride = static_cast<std::size_t>(std::llround(dense_rate / out_rate));
  std::normal_distribution<double> gauss(0.0, 1.0);

  // readings at interval midpoints: sample i of the output covers
  // ((i-1)/rate, i/rate] and reads the dense stream at its center
  for (std::size_t i = 1;; ++i) {
    const std::size_t mid = i * stride - stride / 2;
    if (mid + 1 >= dense.size() || i * stride >= dense.size()) break;
    const TimedPose& pm = dense[mid];
    const Vec3 acc_w = (dense[mid + 1].translation -
                        2.0 * pm.translation + dense[mid - 1].translation) /
                       (dt * dt);
    const Vec3 omega =
        so3_log(dense[mid - 1].rotation.transpose() * dense[mid + 1].rotation) /
        (2.0 * dt);

    ImuSample s;
    s.timestamp = static_cast<double>(i) / out_rate;
    s.accel = pm.rotation.transpose() * (acc_w - gravity) + noise.accel_bias;
    s.gyro = omega + noise.gyro_bias;
    if (noise.imu_accel_sigma > 0.0)
      s.accel += noise.imu_accel_sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
    if (noise.imu_gyro_sigma > 0.0)
      s.gyro += noise.imu_gyro_sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
    out.push_back(s);
  }
  return out;
}

std::vector<JointConfig> generate_joints(const std::vector<TimedPose>& dense,
                                         double dense_rate, const Scene& scene,
                                         const kin::LegModel& robot,
                                         double out_rate) {
  std::vector<JointConfig> out;
  const auto stride = static_cast<std::size_t>(std::llround(dense_rate / out_rate));
  const int per_leg = robot.left.joint_count();
  std::vector<double> prev(static_cast<std::size_t>(robot.joint_count()), 0.6);
  for (std::size_t j = 0; j < prev.size(); ++j)
    if (j % per_leg != 0) prev[j] = -1.2;  // knee slaved at -2x hip

  for (std::size_t i = 0; i * stride < dense.size(); ++i) {
    const TimedPose& pose = dense[i * stride];
    JointConfig jc;
    jc.timestamp = static_cast<double>(i) / out_rate;
    jc.angles = prev;

    RobotState st;
    st.rotation = pose.rotation;
    st.translation = pose.translation;
    for (const kin::Side side : {kin::Side::Left, kin::Side::Right}) {
      const int off = robot.joint_offset(side);
      auto contact_err = [&](double hip) {
        JointConfig trial = jc;
        trial.angles[off] = hip;
        trial.angles[off + 1] = -2.0 * hip;
        const Vec3 wc = kin::wheel_center_world(st, trial, robot, side);
        const Vec2 xy = wc.head<2>();
        const double ground = scene.terrain.extent.contains(xy)
                                  ? scene.terrain.height(xy)
                                  : 0.0;
        return wc.z() - robot.wheel_radius - ground;
      };
      double lo = 0.02, hi = 1.35;
      // contact_err increases with hip angle (leg shortens)
      if (contact_err(lo) > 0.0 || contact_err(hi) < 0.0) continue;  // hold
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (contact_err(mid) > 0.0 ? hi : lo) = mid;
      }
      const double hip = 0.5 * (lo + hi);
      jc.angles[off] = hip;
      jc.angles[off + 1] = -2.0 * hip;
    }
    prev = jc.angles;
    out.push_back(jc);
  }
  return out;
}

SequenceBundle simulate(const Scene& scene, std::uint64_t seed) {
  SequenceBundle bundle;
  bundle.scene = scene;
  bundle.robot = default_robot();
  bundle.seed = seed;

  const auto dense = generate_trajectory(scene, kDenseRate);
  const auto scan_stride =
      static_cast<std::size_t>(std::llround(kDenseRate / kScanRate));
  for (std::size_t i = 0; i * scan_stride < dense.size(); ++i) {
    TimedPose p = dense[i * scan_stride];
    p.timestamp = static_cast<double>(i) / kScanRate;
    bundle.gt_poses.push_back(p);
    std::mt19937_64 rng(splitmix(seed ^ (0x5ca0d00dull + i * 2654435761ull)));
    bundle.scans.push_back(render_scan(scene, p, rng));
  }
  std::mt19937_64 imu_rng(splitmix(seed ^ 0x1390ull));
  bundle.imu = generate_imu(dense, kDenseRate, scene.noise,
                            Vec3(0.0, 0.0, -9.81), kImuRate, imu_rng);
  bundle.joints =
      generate_joints(dense, kDenseRate, scene, bundle.robot, kJointRate);
  return bundle;
}

}  // namespace terralio::sim
