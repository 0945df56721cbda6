#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <random>

#include "terralio/terrain/terrain_model.hpp"

using namespace terralio;
using namespace terralio::terrain;

namespace {

struct RandomField {
  KernelParams kernel;
  CenterSet centers;
  TerrainObservation obs;
};

// random smooth surface observed on [0,1]^2
RandomField make_field(std::uint64_t seed, int n_points = 300,
                       double mesh = 0.12, double cutoff = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomField f;
  f.kernel.sigma = 0.08;
  f.kernel.sigma_eps = 0.05;
  f.kernel.cutoff_radius = cutoff;
  f.kernel.finalize();
  for (int i = 0; i < n_points; ++i) {
    const Vec2 p(u(rng), u(rng));
    f.obs.xy.push_back(p);
    f.obs.z.push_back(0.1 * std::sin(4.0 * p.x()) + 0.05 * p.y() * p.y());
  }
  const Rect roi{{0.0, 0.0}, {1.0, 1.0}};
  f.centers = select_centers(f.obs, roi, mesh, 0.15, 3);
  return f;
}

// dense ridge solve with explicit moment features; the oracle shares no
// code path with the recursive updater
Eigen::VectorXd dense_ridge(const TerrainModel& model,
                            const TerrainObservation& obs) {
  const std::size_t n = model.num_centers();
  Eigen::MatrixXd h =
      model.kernel().lambda * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    for (const auto& [j, v] : model.moment_feature(obs.xy[i]).entries)
      m(j) = v;
    h += m * m.transpose();
    b += m * obs.z[i];
  }
  return h.ldlt().solve(b);
}

}  // namespace

TEST_CASE("moment features follow the widened-bandwidth formula") {
  const RandomField f = make_field(21);
  TerrainModel model(f.kernel, f.centers);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Vec2 x(u(rng), u(rng));
    const SparseVec m = model.moment_feature(x);
    for (const auto& [j, v] : m.entries) {
      const double d2 = (x - f.centers.centers[j]).squaredNorm();
      const double bt = f.kernel.sigma_tilde();
      const double expected =
          f.kernel.moment_scale() * std::exp(-d2 / (2.0 * bt * bt));
      CHECK(v == doctest::Approx(expected).epsilon(1e-14));
      CHECK(std::sqrt(d2) <= f.kernel.cutoff_radius + 1e-12);
    }
  }
}

TEST_CASE("predict_height is the plain kernel expansion of the weights") {
  const RandomField f = make_field(23);
  const TerrainModel model = fit_batch_ridge(f.kernel, f.centers, f.obs);
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int i = 0; i < 50; ++i) {
    const Vec2 x(u(rng), u(rng));
    double manual = 0.0;
    for (std::size_t j = 0; j < model.num_centers(); ++j) {
      const double d = (x - f.centers.centers[j]).norm();
      if (d <= f.kernel.cutoff_radius)
        manual += model.weights()(j) *
                  std::exp(-d * d / (2.0 * f.kernel.sigma * f.kernel.sigma));
    }
    const HeightQuery q = model.predict_height(x);
    CHECK(q.supported);
    CHECK(q.z == doctest::Approx(manual).epsilon(1e-12));
  }
  const HeightQuery far = model.predict_height({50.0, 50.0});
  CHECK(!far.supported);
  CHECK(far.z == 0.0);
}

TEST_CASE("batch fit matches the dense normal-equation oracle") {
  const RandomField f = make_field(25, 200, 0.15, 10.0);  // no truncation
  const TerrainModel model = fit_batch_ridge(f.kernel, f.centers, f.obs);
  const Eigen::VectorXd oracle = dense_ridge(model, f.obs);
  CHECK((model.weights() - oracle).norm() / oracle.norm() < 1e-10);
}

TEST_CASE("recursive updates reproduce the batch solution") {
  const RandomField f = make_field(26, 400, 0.15, 10.0);  // single block
  TerrainModel model(f.kernel, f.centers);
  const int splits = 8;
  const std::size_t chunk = f.obs.size() / splits;
  for (int s = 0; s < splits; ++s) {
    TerrainObservation part;
    const std::size_t b = s * chunk;
    const std::size_t e = (s == splits - 1) ? f.obs.size() : b + chunk;
    part.xy.assign(f.obs.xy.begin() + b, f.obs.xy.begin() + e);
    part.z.assign(f.obs.z.begin() + b, f.obs.z.begin() + e);
    const UpdateReport rep = model.recursive_update(part, false);
    CHECK(!rep.rejected);
  }
  const TerrainModel batch = fit_batch_ridge(f.kernel, f.centers, f.obs);
  CHECK((model.weights() - batch.weights()).norm() / batch.weights().norm() <
        1e-10);
}

TEST_CASE("block info inverses track the dense inverse through updates") {
  const RandomField f = make_field(27, 150, 0.2, 10.0);
  TerrainModel model(f.kernel, f.centers);
  REQUIRE(model.num_blocks() == 1);  // huge cutoff: one tile
  TerrainObservation part;
  part.xy.assign(f.obs.xy.begin(), f.obs.xy.begin() + 60);
  part.z.assign(f.obs.z.begin(), f.obs.z.begin() + 60);
  model.recursive_update(part, false);

  const std::size_t n = model.num_centers();
  Eigen::MatrixXd h = f.kernel.lambda * Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < part.size(); ++i) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    for (const auto& [j, v] : model.moment_feature(part.xy[i]).entries)
      m(j) = v;
    h += m * m.transpose();
  }
  const Eigen::MatrixXd expected = h.inverse();
  const Eigen::MatrixXd& got = model.block_info_inverse(0);
  CHECK((got - expected).norm() / expected.norm() < 1e-9);
}

TEST_CASE("updates touch only the blocks their points can reach") {
  // two clusters far apart under a small cutoff live in separate tiles
  KernelParams kernel;
  kernel.sigma = 0.08;
  kernel.sigma_eps = 0.05;
  kernel.finalize();

  TerrainObservation all;
  for (int i = 0; i < 40; ++i) {
    all.xy.push_back({0.02 * i, 0.0});
    all.z.push_back(0.1);
    all.xy.push_back({30.0 + 0.02 * i, 0.0});
    all.z.push_back(0.5);
  }
  const Rect roi{{-1.0, -1.0}, {32.0, 1.0}};
  const CenterSet centers = select_centers(all, roi, 0.1, 0.15, 3);
  TerrainModel model(kernel, centers);
  REQUIRE(model.num_blocks() >= 2);

  TerrainObservation near;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all.xy[i].x() < 5.0) {
      near.xy.push_back(all.xy[i]);
      near.z.push_back(all.z[i]);
    }
  std::vector<Eigen::MatrixXd> before;
  for (std::size_t b = 0; b < model.num_blocks(); ++b)
    before.push_back(model.block_info_inverse(b));

  model.recursive_update(near, false);

  bool any_far_center_moved = false;
  for (std::size_t b = 0; b < model.num_blocks(); ++b) {
    const bool far_block =
        centers.centers[model.block_members(static_cast<std::uint32_t>(b))
                            .front()]
            .x() > 10.0;
    const bool changed =
        (model.block_info_inverse(static_cast<std::uint32_t>(b)) - before[b])
            .norm() > 0.0;
    if (far_block && changed) any_far_center_moved = true;
  }
  CHECK(!any_far_center_moved);
  for (std::size_t j = 0; j < model.num_centers(); ++j)
    if (centers.centers[j].x() > 10.0) CHECK(model.weights()(j) == 0.0);
}

TEST_CASE("center birth extends the model where new support appears") {
  KernelParams kernel;
  kernel.sigma = 0.08;
  kernel.sigma_eps = 0.05;
  kernel.finalize();
  TerrainObservation first;
  for (int i = 0; i < 50; ++i) {
    first.xy.push_back({0.3 + 0.01 * i, 0.5});
    first.z.push_back(0.2);
  }
  const Rect roi{{0.0, 0.0}, {3.0, 1.0}};
  const CenterSet centers = select_centers(first, roi, 0.1, 0.15, 3);
  TerrainModel model(kernel, centers);
  model.recursive_update(first);
  const std::size_t before = model.num_centers();

  TerrainObservation second;
  for (int i = 0; i < 50; ++i) {
    second.xy.push_back({2.0 + 0.01 * i, 0.5});
    second.z.push_back(0.4);
  }
  const UpdateReport rep = model.recursive_update(second);
  CHECK(rep.born_centers > 0);
  CHECK(model.num_centers() > before);
  const HeightQuery q = model.predict_height({2.25, 0.5});
  CHECK(q.supported);
  CHECK(q.z == doctest::Approx(0.4).epsilon(0.1));
}

TEST_CASE("save/load round trip preserves predictions") {
  const RandomField f = make_field(28);
  const TerrainModel model = fit_batch_ridge(f.kernel, f.centers, f.obs);
  const std::string path = "/tmp/terralio_test_model.bin";
  model.save(path);
  const TerrainModel loaded = TerrainModel::load(path);
  std::remove(path.c_str());
  CHECK(loaded.num_centers() == model.num_centers());
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x(u(rng), u(rng));
    CHECK(loaded.predict_height(x).z ==
          doctest::Approx(model.predict_height(x).z).epsilon(1e-14));
  }
}
