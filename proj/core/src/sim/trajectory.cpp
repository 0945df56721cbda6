#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

#include "terralio/sim/simulator.hpp"

namespace terralio::sim {

namespace {

struct PolylineSample {
  Vec2 xy;
  double heading;
};

PolylineSample polyline_at(const std::vector<Vec2>& wps, double s) {
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    const Vec2 d = wps[i + 1] - wps[i];
    const double len = d.norm();
    if (s <= len || i + 2 == wps.size()) {
      const double u = len > 0.0 ? std::min(s, len) / len : 0.0;
      return {wps[i] + u * d, std::atan2(d.y(), d.x())};
    }
    s -= len;
  }
  return {wps.back(), 0.0};
}

double polyline_length(const std::vector<Vec2>& wps) {
  double L = 0.0;
  for (std::size_t i = 0; i + 1 < wps.size(); ++i)
    L += (wps[i + 1] - wps[i]).norm();
  return L;
}

// One centered box pass with clamped boundaries.
std::vector<double> box_smooth(const std::vector<double>& v, int half) {
  if (half <= 0) return v;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
    const std::size_t hi = std::min(v.size() - 1, i + half);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += v[j];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace

std::vector<TimedPose> generate_trajectory(const Scene& scene, double rate) {
  const TrajectoryProfile& prof = scene.profile;
  if (prof.waypoints.size() < 2)
    throw std::invalid_argument("trajectory needs >= 2 waypoints");
  for (const Vec2& w : prof.waypoints)
    if (!scene.terrain.extent.contains(w))
      throw std::invalid_argument("waypoint outside terrain extent");

  const double L = polyline_length(prof.waypoints);
  const double duration = L / prof.speed;
  const auto n = static_cast<std::size_t>(std::floor(duration * rate)) + 1;

  std::vector<Vec2> xy(n);
  std::vector<double> z_raw(n), yaw_raw(n), terrain_h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = prof.speed * static_cast<double>(i) / rate;
    const PolylineSample ps = polyline_at(prof.waypoints, s);
    xy[i] = ps.xy;
    terrain_h[i] = scene.terrain.height(ps.xy);
    z_raw[i] = terrain_h[i] + prof.ride_height;
    yaw_raw[i] = ps.heading;
  }
  // unwrap yaw before smoothing
  for (std::size_t i = 1; i < n; ++i) {
    while (yaw_raw[i] - yaw_raw[i - 1] > M_PI) yaw_raw[i] -= 2.0 * M_PI;
    while (yaw_raw[i] - yaw_raw[i - 1] < -M_PI) yaw_raw[i] += 2.0 * M_PI;
  }

  const int half = static_cast<int>(std::round(0.5 * prof.smooth_window * rate));
  std::vector<double> z = box_smooth(box_smooth(z_raw, half), half);
  std::vector<double> yaw = box_smooth(box_smooth(yaw_raw, half), half);

  // pitch follows the smoothed climb rate
  std::vector<double> pitch(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dz = (z[i + 1] - z[i - 1]) * rate * 0.5;
    pitch[i] = std::atan2(dz, prof.speed);
  }
  if (n > 2) {
    pitch[0] = pitch[1];
    pitch[n - 1] = pitch[n - 2];
  }
  pitch = box_smooth(pitch, half);

  // impulsive heave at step edges
  if (prof.jolt_amplitude > 0.0) {
    std::vector<double> jolt(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      if (terrain_h[i] - terrain_h[i - 1] > 0.02) {
        const double t0 = static_cast<double>(i) / rate;
        for (std::size_t j = i; j < n; ++j) {
          const double dt = static_cast<double>(j) / rate - t0;
          if (dt > 6.0 * prof.jolt_decay) break;
          jolt[j] += prof.jolt_amplitude * std::exp(-dt / prof.jolt_decay) *
                     std::sin(2.0 * M_PI * prof.jolt_freq * dt);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) z[i] += jolt[i];
  }

  std::vector<TimedPose> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].timestamp = static_cast<double>(i) / rate;
    out[i].rotation =
        (Eigen::AngleAxisd(yaw[i], Vec3::UnitZ()) *
         Eigen::AngleAxisd(-pitch[i], Vec3::UnitY()))
            .toRotationMatrix();
    out[i].translation = Vec3(xy[i].x(), xy[i].y(), z[i]);
  }
  return out;
}

}  // namespace terralio::sim
