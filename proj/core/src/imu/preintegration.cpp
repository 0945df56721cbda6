#include "terralio/imu/preintegration.hpp"

#include "terralio/so3.hpp"

namespace terralio::imu {

PreintegratedDelta preintegrate(std::span<const ImuSample> samples,
                                double t_begin, double t_end,
                                const ImuBiases& biases, const Vec3& gravity) {
  PreintegratedDelta d;
  if (samples.empty()) return d;

  auto step = [&](const ImuSample& s, double dt) {
    if (dt <= 0.0) return;
    const Vec3 a = s.accel - biases.accel;
    const Vec3 w = s.gyro - biases.gyro;
    const Vec3 acc = d.dR * a + gravity;
    d.dT += d.dV * dt + 0.5 * acc * dt * dt;
    d.dV += acc * dt;
    d.dR = d.dR * so3_exp(w * dt);
    d.duration += dt;
  };

  // Each sample covers the interval ending at its timestamp; the first dt is
  // measured from t_begin and the last sample is held until t_end.
  double t_prev = t_begin;
  for (const ImuSample& s : samples) {
    step(s, std::min(s.timestamp, t_end) - t_prev);
    t_prev = std::max(t_prev, std::min(s.timestamp, t_end));
  }
  if (t_end > t_prev) step(samples.back(), t_end - t_prev);
  reorthonormalize(d.dR);
  return d;
}

PreintegratedDelta compose(const PreintegratedDelta& a,
                           const PreintegratedDelta& b) {
  PreintegratedDelta c;
  c.dT = a.dT + a.dV * b.duration + a.dR * b.dT;
  c.dV = a.dV + a.dR * b.dV;
  c.dR = a.dR * b.dR;
  c.duration = a.duration + b.duration;
  reorthonormalize(c.dR);
  return c;
}

RobotState predict_pose(const RobotState& prev, const PreintegratedDelta& delta,
                        const Vec3& gravity) {
  RobotState next = prev;
  const double dt = delta.duration;
  next.rotation = prev.rotation * delta.dR;
  reorthonormalize(next.rotation);
  next.translation = prev.translation + prev.velocity * dt +
                     prev.rotation * delta.dT + 0.5 * gravity * dt * dt;
  next.velocity = prev.velocity + prev.rotation * delta.dV + gravity * dt;
  return next;
}

}  // namespace terralio::imu
