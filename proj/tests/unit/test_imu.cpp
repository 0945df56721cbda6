#include <doctest.h>

#include <random>
#include <vector>

#include "terralio/imu/preintegration.hpp"
#include "terralio/so3.hpp"

using namespace terralio;
using namespace terralio::imu;

namespace {

std::vector<ImuSample> constant_stream(const Vec3& accel, const Vec3& gyro,
                                       double t0, double t1, double rate) {
  std::vector<ImuSample> out;
  const double dt = 1.0 / rate;
  for (double t = t0 + dt; t <= t1 + 1e-12; t += dt)
    out.push_back({t, accel, gyro});
  return out;
}

}  // namespace

TEST_CASE("constant angular rate integrates to the exponential map") {
  const Vec3 omega(0.2, -0.4, 0.7);
  const auto samples = constant_stream(Vec3::Zero(), omega, 0.0, 0.5, 200.0);
  const auto delta = preintegrate(samples, 0.0, 0.5, {});
  CHECK(delta.duration == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((delta.dR - so3_exp(0.5 * omega)).norm() < 1e-9);
}

TEST_CASE("constant acceleration without rotation is kinematic") {
  const Vec3 a(1.0, -2.0, 0.5);
  const auto samples = constant_stream(a, Vec3::Zero(), 0.0, 0.4, 200.0);
  const auto delta = preintegrate(samples, 0.0, 0.4, {});
  CHECK((delta.dV - 0.4 * a).norm() < 1e-9);
  CHECK((delta.dT - 0.5 * 0.4 * 0.4 * a).norm() < 5e-3);  // first-order hold
}

TEST_CASE("bias subtraction removes a constant bias exactly") {
  const Vec3 a(0.3, 0.1, -0.2), w(0.05, -0.02, 0.1);
  const Vec3 ba(0.02, -0.01, 0.005), bw(0.001, 0.002, -0.001);
  const auto clean = constant_stream(a, w, 0.0, 0.3, 200.0);
  const auto biased = constant_stream(a + ba, w + bw, 0.0, 0.3, 200.0);
  const auto d0 = preintegrate(clean, 0.0, 0.3, {});
  const auto d1 = preintegrate(biased, 0.0, 0.3, {ba, bw});
  CHECK((d0.dR - d1.dR).norm() < 1e-12);
  CHECK((d0.dV - d1.dV).norm() < 1e-12);
  CHECK((d0.dT - d1.dT).norm() < 1e-12);
}

TEST_CASE("composition of half windows equals the full window") {
  const Vec3 a(0.5, 0.2, -0.1), w(0.3, -0.1, 0.2);
  const auto samples = constant_stream(a, w, 0.0, 0.4, 200.0);
  const auto full = preintegrate(samples, 0.0, 0.4, {});
  std::vector<ImuSample> first(samples.begin(), samples.begin() + 40);
  std::vector<ImuSample> second(samples.begin() + 40, samples.end());
  const auto d1 = preintegrate(first, 0.0, 0.2, {});
  const auto d2 = preintegrate(second, 0.2, 0.4, {});
  const auto composed = compose(d1, d2);
  CHECK((composed.dR - full.dR).norm() < 1e-10);
  CHECK((composed.dV - full.dV).norm() < 1e-10);
  CHECK((composed.dT - full.dT).norm() < 1e-10);
  CHECK(composed.duration == doctest::Approx(full.duration));
}

TEST_CASE("predict_pose applies gravity in closed form") {
  // free fall: identity delta of duration T under gravity only
  PreintegratedDelta delta;
  delta.duration = 0.7;
  RobotState prev;
  prev.translation = Vec3(0.0, 0.0, 10.0);
  prev.velocity = Vec3(1.0, 0.0, 2.0);
  const RobotState next = predict_pose(prev, delta);
  const double t = 0.7, g = 9.81;
  CHECK(next.translation.x() == doctest::Approx(1.0 * t).epsilon(1e-12));
  CHECK(next.translation.z() ==
        doctest::Approx(10.0 + 2.0 * t - 0.5 * g * t * t).epsilon(1e-12));
  CHECK(next.velocity.z() == doctest::Approx(2.0 - g * t).epsilon(1e-12));
}

TEST_CASE("an empty window is the identity") {
  const auto delta = preintegrate({}, 1.0, 1.0, {});
  CHECK((delta.dR - Mat3::Identity()).norm() == 0.0);
  CHECK(delta.dV.norm() == 0.0);
  CHECK(delta.dT.norm() == 0.0);
  CHECK(delta.duration == 0.0);
}
