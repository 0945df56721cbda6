#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "terralio/imu/preintegration.hpp"
#include "terralio/kinematics/contact.hpp"
#include "terralio/sim/simulator.hpp"
#include "terralio/so3.hpp"

using namespace terralio;
using namespace terralio::sim;

namespace {

// short noiseless corridor for fast checks
Scene mini_scene() {
  Scene s;
  s.name = "mini";
  s.terrain = TerrainSpec::flat({{-2.0, -4.0}, {6.0, 4.0}});
  s.profile.waypoints = {{0.0, 0.0}, {3.0, 0.0}};
  s.terrain_roi = {{-0.5, -0.5}, {3.5, 0.5}};
  Box b;
  b.min = Vec3(1.0, 1.0, -0.05);
  b.max = Vec3(1.5, 1.4, 0.55);
  s.boxes.push_back(b);
  Pole p;
  p.xy = Vec2(2.0, -1.2);
  s.poles.push_back(p);
  return s;
}

}  // namespace

TEST_CASE("terrain spec heights and gradients are analytic") {
  const auto stairs = TerrainSpec::staircase(0.1, 0.4, 5, 1.0,
                                             {{-5.0, -5.0}, {10.0, 5.0}});
  CHECK(stairs.height({0.5, 0.0}) == 0.0);
  // the first rise sits one depth past x0
  CHECK(stairs.height({1.1, 0.0}) == doctest::Approx(0.0));
  CHECK(stairs.height({1.5, 0.0}) == doctest::Approx(0.1));
  CHECK(stairs.height({1.9, 0.3}) == doctest::Approx(0.2));
  CHECK(stairs.height({9.0, 0.0}) == doctest::Approx(0.5));  // past the top
  CHECK_THROWS_AS(stairs.height({100.0, 0.0}), std::domain_error);

  const auto ramp = TerrainSpec::ramp(0.2, 1.0, {{-5.0, -5.0}, {10.0, 5.0}});
  CHECK(ramp.height({3.0, 0.0}) == doctest::Approx(0.4));
  CHECK(ramp.gradient({3.0, 0.0}).x() == doctest::Approx(0.2));

  // composite adds parts; hill gradient agrees with finite differences
  const auto hill = TerrainSpec::hill(0.3, 4.0, 0.0, {{-5.0, -5.0}, {10.0, 5.0}});
  const Vec2 x(1.3, 0.7);
  const double h = 1e-6;
  const double fdx =
      (hill.height({x.x() + h, x.y()}) - hill.height({x.x() - h, x.y()})) /
      (2.0 * h);
  CHECK(hill.gradient(x).x() == doctest::Approx(fdx).epsilon(1e-6));
}

TEST_CASE("trajectory holds ride height over flat ground") {
  const Scene s = mini_scene();
  const auto poses = generate_trajectory(s, kScanRate);
  REQUIRE(poses.size() > 10);
  for (const auto& p : poses) {
    CHECK(p.translation.z() ==
          doctest::Approx(s.profile.ride_height).epsilon(1e-9));
    CHECK((p.rotation * p.rotation.transpose() - Mat3::Identity()).norm() <
          1e-12);
  }
  // strictly increasing stamps at the scan rate
  for (std::size_t i = 1; i < poses.size(); ++i)
    CHECK(poses[i].timestamp - poses[i - 1].timestamp ==
          doctest::Approx(1.0 / kScanRate).epsilon(1e-9));
}

TEST_CASE("noiseless ground returns lie exactly on the surface") {
  const Scene s = mini_scene();
  const auto poses = generate_trajectory(s, kScanRate);
  std::mt19937_64 rng(61);
  const TimedPose& pose = poses[poses.size() / 2];
  const FeatureCloud scan = render_scan(s, pose, rng);
  REQUIRE(scan.count(FeatureKind::Ground) > 100);
  for (const auto& f : scan.points) {
    const Vec3 w = pose.rotation * f.p + pose.translation;
    if (f.kind == FeatureKind::Ground) {
      CHECK(std::abs(w.z() - s.terrain.height({w.x(), w.y()})) < 1e-9);
    }
  }
}

TEST_CASE("box faces and edges are labeled and placed consistently") {
  const Scene s = mini_scene();
  const auto poses = generate_trajectory(s, kScanRate);
  std::mt19937_64 rng(62);
  const FeatureCloud scan = render_scan(s, poses[2], rng);
  const Box& b = s.boxes[0];
  std::size_t planar_on_box = 0, edges_on_box = 0;
  for (const auto& f : scan.points) {
    const Vec3 w = poses[2].rotation * f.p + poses[2].translation;
    if (f.kind == FeatureKind::Planar) {
      // every planar hit sits on one of the box faces
      const bool on_face =
          (std::abs(w.x() - b.min.x()) < 1e-9 || std::abs(w.x() - b.max.x()) < 1e-9 ||
           std::abs(w.y() - b.min.y()) < 1e-9 || std::abs(w.y() - b.max.y()) < 1e-9 ||
           std::abs(w.z() - b.max.z()) < 1e-9);
      const bool inside =
          w.x() >= b.min.x() - 1e-9 && w.x() <= b.max.x() + 1e-9 &&
          w.y() >= b.min.y() - 1e-9 && w.y() <= b.max.y() + 1e-9 &&
          w.z() >= b.min.z() - 1e-9 && w.z() <= b.max.z() + 1e-9;
      if (inside) {
        CHECK(on_face);
        ++planar_on_box;
      }
    } else if (f.kind == FeatureKind::Edge && std::abs(w.x() - b.min.x()) < 0.6) {
      // vertical box edges: xy snapped to a corner
      const bool x_corner = std::abs(w.x() - b.min.x()) < 1e-9 ||
                            std::abs(w.x() - b.max.x()) < 1e-9;
      const bool y_corner = std::abs(w.y() - b.min.y()) < 1e-9 ||
                            std::abs(w.y() - b.max.y()) < 1e-9;
      if (x_corner && y_corner) ++edges_on_box;
    }
  }
  CHECK(planar_on_box > 20);
  CHECK(edges_on_box > 3);
}

TEST_CASE("noiseless imu re-integrates to the ground truth poses") {
  const Scene s = mini_scene();
  const auto bundle = simulate(s, 5);
  RobotState state;
  state.rotation = bundle.gt_poses.front().rotation;
  state.translation = bundle.gt_poses.front().translation;
  // seed the velocity from the first pose gap
  state.velocity = (bundle.gt_poses[1].translation -
                    bundle.gt_poses[0].translation) /
                   (bundle.gt_poses[1].timestamp - bundle.gt_poses[0].timestamp);

  double worst = 0.0;
  for (std::size_t k = 1; k < bundle.gt_poses.size(); ++k) {
    const double t0 = bundle.gt_poses[k - 1].timestamp;
    const double t1 = bundle.gt_poses[k].timestamp;
    std::vector<ImuSample> window;
    for (const auto& smp : bundle.imu)
      if (smp.timestamp > t0 + 1e-12 && smp.timestamp <= t1 + 1e-12)
        window.push_back(smp);
    const auto delta = imu::preintegrate(window, t0, t1, {});
    state = imu::predict_pose(state, delta);
    // re-anchor velocity to ground truth to isolate per-frame pose error
    worst = std::max(
        worst, (state.translation - bundle.gt_poses[k].translation).norm());
    state.rotation = bundle.gt_poses[k].rotation;
    state.translation = bundle.gt_poses[k].translation;
    if (k + 1 < bundle.gt_poses.size())
      state.velocity = (bundle.gt_poses[k + 1].translation -
                        bundle.gt_poses[k].translation) /
                       (bundle.gt_poses[k + 1].timestamp - t1);
  }
  CHECK(worst < 2e-3);
}

TEST_CASE("joint streams put the wheels on the terrain") {
  const Scene s = mini_scene();
  const auto bundle = simulate(s, 6);
  REQUIRE(!bundle.joints.empty());
  // sample a few synchronized instants
  for (std::size_t k = 2; k < bundle.gt_poses.size(); k += 7) {
    const TimedPose& pose = bundle.gt_poses[k];
    const JointConfig* best = &bundle.joints.front();
    for (const auto& j : bundle.joints)
      if (std::abs(j.timestamp - pose.timestamp) <
          std::abs(best->timestamp - pose.timestamp))
        best = &j;
    RobotState state;
    state.rotation = pose.rotation;
    state.translation = pose.translation;
    for (kin::Side side : {kin::Side::Left, kin::Side::Right}) {
      const Vec3 wc = kin::wheel_center_world(state, *best, bundle.robot, side);
      const Vec3 contact = kin::contact_point(wc, bundle.robot.wheel_radius);
      const double ground = s.terrain.height({contact.x(), contact.y()});
      CHECK(std::abs(contact.z() - ground) < 5e-3);
    }
  }
}

TEST_CASE("bundle save/load round trip") {
  const Scene s = mini_scene();
  const auto bundle = simulate(s, 7);
  const std::string dir = "/tmp/terralio_test_bundle";
  save_bundle(bundle, dir);
  const auto loaded = load_bundle(dir);
  std::filesystem::remove_all(dir);
  REQUIRE(loaded.gt_poses.size() == bundle.gt_poses.size());
  REQUIRE(loaded.scans.size() == bundle.scans.size());
  CHECK(loaded.imu.size() == bundle.imu.size());
  CHECK(loaded.joints.size() == bundle.joints.size());
  CHECK(loaded.seed == bundle.seed);
  for (std::size_t k = 0; k < bundle.gt_poses.size(); k += 5) {
    CHECK((loaded.gt_poses[k].translation - bundle.gt_poses[k].translation)
              .norm() < 1e-9);
    CHECK((loaded.gt_poses[k].rotation - bundle.gt_poses[k].rotation).norm() <
          1e-9);
  }
  const auto& a = bundle.scans[1];
  const auto& b = loaded.scans[1];
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); i += 50) {
    CHECK((a.points[i].p - b.points[i].p).norm() < 1e-9);
    CHECK(a.points[i].kind == b.points[i].kind);
  }
}

TEST_CASE("stock scenes are available and deterministic") {
  for (const auto& name : stock_scene_names()) CHECK_NOTHROW(stock_scene(name));
  CHECK_THROWS_AS(stock_scene("volcano"), std::invalid_argument);
  const Scene s = mini_scene();
  const auto b1 = simulate(s, 42), b2 = simulate(s, 42);
  REQUIRE(b1.scans.size() == b2.scans.size());
  CHECK(b1.scans[3].points.size() == b2.scans[3].points.size());
  for (std::size_t i = 0; i < b1.scans[3].points.size(); i += 20)
    CHECK((b1.scans[3].points[i].p - b2.scans[3].points[i].p).norm() == 0.0);
}
