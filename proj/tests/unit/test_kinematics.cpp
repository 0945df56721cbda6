#include <doctest.h>

#include <cmath>
#include <random>

#include "terralio/kinematics/contact.hpp"
#include "terralio/sim/scene.hpp"
#include "terralio/so3.hpp"

using namespace terralio;
using namespace terralio::kin;

namespace {

// planar hip/knee chain for hand-checkable trigonometry
LegModel planar_robot() {
  LegModel m;
  m.wheel_radius = 0.08;
  for (Side s : {Side::Left, Side::Right}) {
    LegChain& c = (s == Side::Left) ? m.left : m.right;
    Link hip;
    hip.name = "hip";
    hip.offset = Vec3(0.0, (s == Side::Left) ? 0.15 : -0.15, -0.1);
    hip.axis = Vec3::UnitY();
    Link knee;
    knee.name = "knee";
    knee.parent = "hip";
    knee.offset = Vec3(0.0, 0.0, -0.25);
    knee.axis = Vec3::UnitY();
    Link wheel;
    wheel.name = "wheel";
    wheel.parent = "knee";
    wheel.offset = Vec3(0.0, 0.0, -0.25);
    wheel.revolute = false;
    c.links = {hip, knee, wheel};
  }
  return m;
}

terrain::TerrainModel flat_terrain(double height) {
  terrain::KernelParams kernel;
  kernel.sigma = 0.08;
  kernel.sigma_eps = 0.02;
  kernel.finalize();
  terrain::TerrainObservation obs;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 900; ++i) {
    obs.xy.push_back({u(rng), u(rng)});
    obs.z.push_back(height);
  }
  const Rect roi{{-1.5, -1.5}, {1.5, 1.5}};
  const auto centers = terrain::select_centers(obs, roi, 0.1, 0.12, 3);
  return terrain::fit_batch_ridge(kernel, centers, obs);
}

}  // namespace

TEST_CASE("chain end position matches planar trigonometry") {
  const LegModel m = planar_robot();
  const double q1 = 0.4, q2 = -0.8;  // hip, knee (rotation about +y)
  const double l1 = 0.25, l2 = 0.25;
  const std::vector<double> q = {q1, q2, 0.0, 0.0};
  const Vec3 end = chain_end_position(m.left, {q.data(), 2});
  // R_y(q) maps (0,0,-l) to (-l sin q, 0, -l cos q)
  const double x = -l1 * std::sin(q1) - l2 * std::sin(q1 + q2);
  const double z = -0.1 - l1 * std::cos(q1) - l2 * std::cos(q1 + q2);
  CHECK(end.x() == doctest::Approx(x).epsilon(1e-12));
  CHECK(end.y() == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(end.z() == doctest::Approx(z).epsilon(1e-12));
}

TEST_CASE("wheel center applies the base pose") {
  const LegModel m = planar_robot();
  JointConfig joints;
  joints.angles = {0.3, -0.6, 0.2, -0.4};
  RobotState state;
  state.rotation = so3_exp(Vec3(0.1, -0.2, 0.5));
  state.translation = Vec3(1.0, 2.0, 3.0);
  const Vec3 local = chain_end_position(m.right, {joints.angles.data() + 2, 2});
  const Vec3 world = wheel_center_world(state, joints, m, Side::Right);
  CHECK((world - (state.rotation * local + state.translation)).norm() < 1e-14);
}

TEST_CASE("manifold residual is the contact height above the surface") {
  const LegModel m = planar_robot();
  const terrain::TerrainModel terrain = flat_terrain(0.2);
  JointConfig joints;
  joints.angles = {0.2, -0.4, 0.2, -0.4};
  RobotState state;
  state.translation = Vec3(0.0, 0.0, 0.9);
  const auto res = manifold_residual(state, joints, m, Side::Left, terrain);
  REQUIRE(res.valid);
  const Vec3 wc = wheel_center_world(state, joints, m, Side::Left);
  const double f =
      terrain.predict_height({wc.x(), wc.y()}).z;
  CHECK(res.value ==
        doctest::Approx(wc.z() - m.wheel_radius - f).epsilon(1e-12));
  CHECK((res.wheel_center - wc).norm() < 1e-14);
}

TEST_CASE("unsupported terrain invalidates the residual") {
  const LegModel m = planar_robot();
  const terrain::TerrainModel terrain = flat_terrain(0.0);
  JointConfig joints;
  joints.angles = {0.0, 0.0, 0.0, 0.0};
  RobotState state;
  state.translation = Vec3(100.0, 0.0, 0.6);
  const auto res = manifold_residual(state, joints, m, Side::Left, terrain);
  CHECK(!res.valid);
}

TEST_CASE("manifold jacobian passes a central difference check") {
  const LegModel m = planar_robot();
  const terrain::TerrainModel terrain = flat_terrain(0.1);
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 30; ++trial) {
    JointConfig joints;
    joints.angles = {u(rng), u(rng), u(rng), u(rng)};
    RobotState state;
    state.rotation = so3_exp(Vec3(0.3 * u(rng), 0.3 * u(rng), u(rng)));
    state.translation = Vec3(u(rng), u(rng), 0.7 + 0.1 * u(rng));
    const auto base = manifold_residual(state, joints, m, Side::Left, terrain);
    if (!base.valid) continue;
    const auto jac = manifold_jacobian(state, joints, m, Side::Left, terrain);
    const double h = 1e-6;
    for (int d = 0; d < 6; ++d) {
      auto shift = [&](double eps) {
        RobotState s = state;
        Vec3 delta = Vec3::Zero();
        delta(d % 3) = eps;
        if (d < 3)
          s.rotation = state.rotation * so3_exp(delta);
        else
          s.translation += delta;
        return manifold_residual(s, joints, m, Side::Left, terrain).value;
      };
      const double fd = (shift(h) - shift(-h)) / (2.0 * h);
      CHECK(std::abs(fd - jac(d)) <
            1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("leg model text round trip") {
  const LegModel m = sim::default_robot();
  const LegModel back = LegModel::parse(m.serialize());
  CHECK(back.wheel_radius == m.wheel_radius);
  CHECK(back.joint_count() == m.joint_count());
  std::vector<double> q(m.left.joint_count(), 0.21);
  CHECK((chain_end_position(back.left, q) - chain_end_position(m.left, q))
            .norm() < 1e-12);
}
