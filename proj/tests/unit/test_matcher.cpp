#include <doctest.h>

#include <random>

#include "terralio/match/scan_matcher.hpp"
#include "terralio/sim/scene.hpp"
#include "terralio/so3.hpp"

using namespace terralio;
using namespace terralio::match;

namespace {

// box-corner scene: three orthogonal dense planes plus one vertical edge,
// enough geometry to pin all six pose degrees of freedom
FeatureCloud corner_scan(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.95);
  FeatureCloud scan;
  for (int i = 0; i < 300; ++i) {
    scan.points.push_back({{u(rng), u(rng), 0.0}, FeatureKind::Planar, 1});
    scan.points.push_back({{u(rng), 0.0, 0.5 * u(rng)}, FeatureKind::Planar, 2});
    scan.points.push_back({{0.0, u(rng), 0.5 * u(rng)}, FeatureKind::Planar, 3});
  }
  for (int i = 0; i < 20; ++i)
    scan.points.push_back(
        {{1.0, 1.0, 0.05 * i}, FeatureKind::Edge, 4});
  return scan;
}

FeatureCloud transform(const FeatureCloud& scan, const Mat3& r, const Vec3& t) {
  FeatureCloud out = scan;
  for (auto& p : out.points) p.p = r.transpose() * (p.p - t);
  return out;
}

}  // namespace

TEST_CASE("point residual closed forms") {
  LineParam line;
  line.point = Vec3(1.0, 2.0, 3.0);
  line.direction = Vec3::UnitZ();
  const EdgeResidual er = point_to_line_residual({2.0, 2.0, 7.0}, line);
  CHECK((er.value - Vec3(1.0, 0.0, 0.0)).norm() < 1e-14);
  CHECK(er.value.dot(line.direction) == doctest::Approx(0.0));

  PlaneParam plane;
  plane.normal = Vec3(0.0, 0.0, 1.0);
  plane.offset = -2.0;  // plane z = 2
  const PlaneResidual pr = point_to_plane_residual({5.0, -1.0, 3.5}, plane);
  CHECK(pr.value == doctest::Approx(1.5).epsilon(1e-14));
  CHECK((pr.jacobian.transpose() - plane.normal).norm() < 1e-14);
}

TEST_CASE("residual jacobians pass central differences") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 p(n(rng), n(rng), n(rng));
    LineParam line;
    line.point = Vec3(n(rng), n(rng), n(rng));
    line.direction = Vec3(n(rng), n(rng), n(rng)).normalized();
    PlaneParam plane;
    plane.normal = Vec3(n(rng), n(rng), n(rng)).normalized();
    plane.offset = n(rng);
    const double h = 1e-6;
    const EdgeResidual er = point_to_line_residual(p, line);
    const PlaneResidual pr = point_to_plane_residual(p, plane);
    for (int d = 0; d < 3; ++d) {
      Vec3 dp = Vec3::Zero();
      dp(d) = h;
      const Vec3 fd_e = (point_to_line_residual(p + dp, line).value -
                         point_to_line_residual(p - dp, line).value) /
                        (2.0 * h);
      CHECK((fd_e - er.jacobian.col(d)).norm() < 1e-8);
      const double fd_p = (point_to_plane_residual(p + dp, plane).value -
                           point_to_plane_residual(p - dp, plane).value) /
                          (2.0 * h);
      CHECK(std::abs(fd_p - pr.jacobian(d)) < 1e-8);
    }
  }
}

TEST_CASE("stacked cost jacobian passes central differences") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n;
  SolverConfig config;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Correspondence> corr;
    for (int i = 0; i < 12; ++i) {
      Correspondence c;
      c.p_sensor = Vec3(n(rng), n(rng), n(rng));
      if (i % 3 == 0) {
        c.kind = FeatureKind::Edge;
        c.line.point = Vec3(n(rng), n(rng), n(rng));
        c.line.direction = Vec3(n(rng), n(rng), n(rng)).normalized();
      } else {
        c.kind = FeatureKind::Planar;
        c.plane.normal = Vec3(n(rng), n(rng), n(rng)).normalized();
        c.plane.offset = n(rng);
      }
      corr.push_back(c);
    }
    RobotState state;
    state.rotation = so3_exp(Vec3(n(rng), n(rng), n(rng)).normalized() * 0.4);
    state.translation = Vec3(n(rng), n(rng), n(rng));
    const CostEval eval = total_cost(state, corr, {}, config);
    const double h = 1e-6;
    for (int d = 0; d < 6; ++d) {
      auto perturbed = [&](double eps) {
        RobotState s = state;
        Vec3 delta = Vec3::Zero();
        delta(d % 3) = eps;
        if (d < 3)
          s.rotation = state.rotation * so3_exp(delta);
        else
          s.translation += delta;
        return total_cost(s, corr, {}, config).residual;
      };
      const Eigen::VectorXd fd = (perturbed(h) - perturbed(-h)) / (2.0 * h);
      const double scale = std::max(1.0, fd.norm());
      CHECK((fd - eval.jacobian.col(d)).norm() / scale < 1e-6);
    }
  }
}

TEST_CASE("lm_solve recovers a perturbed pose in a structured scene") {
  const FeatureCloud world_scan = corner_scan(43);
  LocalMap map;
  map.insert(world_scan, Mat3::Identity(), Vec3::Zero());

  RobotState truth;
  truth.rotation = so3_exp(Vec3(0.02, -0.015, 0.04));
  truth.translation = Vec3(0.1, -0.05, 0.08);
  const FeatureCloud scan = transform(corner_scan(44), truth.rotation,
                                      truth.translation);

  RobotState guess = truth;
  guess.rotation = truth.rotation * so3_exp(Vec3(0.01, 0.01, -0.02));
  guess.translation += Vec3(0.04, -0.03, 0.05);

  SolveReport report;
  const RobotState solved = lm_solve(guess, scan, map, {}, {}, &report);
  CHECK(report.converged);
  CHECK(!report.failed);
  CHECK((solved.translation - truth.translation).norm() < 1e-6);
  CHECK(so3_log(truth.rotation.transpose() * solved.rotation).norm() < 1e-6);
}

TEST_CASE("absent manifold inputs and zero weight are bit-identical") {
  const FeatureCloud world_scan = corner_scan(45);
  LocalMap map;
  map.insert(world_scan, Mat3::Identity(), Vec3::Zero());
  const FeatureCloud scan = transform(corner_scan(46), Mat3::Identity(),
                                      Vec3(0.02, 0.01, -0.03));
  RobotState guess;

  const kin::LegModel robot = sim::default_robot();
  terrain::KernelParams kernel;
  kernel.finalize();
  terrain::TerrainObservation obs;
  for (int i = 0; i < 200; ++i) {
    obs.xy.push_back({0.01 * i, 0.005 * i});
    obs.z.push_back(0.0);
  }
  const auto centers =
      terrain::select_centers(obs, {{-1.0, -1.0}, {3.0, 3.0}}, 0.07, 0.1, 3);
  const terrain::TerrainModel terrain =
      terrain::fit_batch_ridge(kernel, centers, obs);
  JointConfig joints;
  joints.angles.assign(robot.joint_count(), 0.3);
  ManifoldInputs inputs;
  inputs.joints = &joints;
  inputs.leg = &robot;
  inputs.terrain = &terrain;
  REQUIRE(inputs.enabled());

  SolverConfig zero_weight;
  zero_weight.lambda_manifold = 0.0;
  const RobotState a = lm_solve(guess, scan, map, {}, SolverConfig{});
  const RobotState b = lm_solve(guess, scan, map, inputs, zero_weight);
  CHECK((a.rotation - b.rotation).norm() == 0.0);
  CHECK((a.translation - b.translation).norm() == 0.0);
}

TEST_CASE("a single plane is reported degenerate") {
  FeatureCloud plane_only;
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 400; ++i)
    plane_only.points.push_back({{u(rng), u(rng), 0.0}, FeatureKind::Planar, 1});
  LocalMap map;
  map.insert(plane_only, Mat3::Identity(), Vec3::Zero());
  SolveReport report;
  RobotState guess;
  lm_solve(guess, plane_only, map, {}, {}, &report);
  CHECK(report.degenerate);
}

TEST_CASE("too few correspondences fail gracefully") {
  FeatureCloud tiny;
  tiny.points.push_back({{0.0, 0.0, 0.0}, FeatureKind::Planar, 1});
  LocalMap map;
  map.insert(tiny, Mat3::Identity(), Vec3::Zero());
  SolveReport report;
  RobotState guess;
  const RobotState out = lm_solve(guess, tiny, map, {}, {}, &report);
  CHECK(report.degenerate);
  CHECK((out.translation - guess.translation).norm() == 0.0);
}
