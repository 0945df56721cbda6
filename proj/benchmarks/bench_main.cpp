#include <benchmark/benchmark.h>

#include <random>

#include "terralio/match/scan_matcher.hpp"
#include "terralio/sim/scene.hpp"
#include "terralio/so3.hpp"
#include "terralio/terrain/terrain_model.hpp"

using namespace terralio;

namespace {

// random noisy observations over a fixed region, reused by several fixtures
terrain::TerrainObservation sample_obs(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 6.0), uy(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  terrain::TerrainObservation obs;
  for (int i = 0; i < n; ++i) {
    const Vec2 clean(ux(rng), uy(rng));
    obs.xy.push_back(clean + Vec2(noise(rng), noise(rng)));
    obs.z.push_back(0.1 * std::floor(clean.x()));
  }
  return obs;
}

terrain::TerrainModel fitted_model(int n_obs) {
  terrain::KernelParams kernel;
  kernel.finalize();
  const auto obs = sample_obs(n_obs, 11);
  const auto centers =
      terrain::select_centers(obs, {{0.0, -1.0}, {6.0, 1.0}}, 0.07, 0.12, 3);
  return terrain::fit_batch_ridge(kernel, centers, obs);
}

// three orthogonal planes plus a vertical edge column
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
    scan.points.push_back({{1.0, 1.0, 0.05 * i}, FeatureKind::Edge, 4});
  return scan;
}

void bm_kernel_eval(benchmark::State& state) {
  terrain::KernelParams p;
  p.finalize();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<Vec2> xs, cs;
  for (int i = 0; i < 1024; ++i) {
    xs.emplace_back(u(rng), u(rng));
    cs.emplace_back(u(rng), u(rng));
  }
  std::size_t k = 0;
  for (auto _ : state) {
    const double v = terrain::kernel_eval(p, xs[k & 1023], cs[k & 1023], p.sigma);
    benchmark::DoNotOptimize(v);
    ++k;
  }
}
BENCHMARK(bm_kernel_eval);

void bm_moment_feature(benchmark::State& state) {
  const auto model = fitted_model(4000);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0.2, 5.8), uy(-0.8, 0.8);
  for (auto _ : state) {
    const auto f = model.moment_feature({ux(rng), uy(rng)});
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(bm_moment_feature);

void bm_predict_height(benchmark::State& state) {
  const auto model = fitted_model(4000);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.2, 5.8), uy(-0.8, 0.8);
  for (auto _ : state) {
    const auto q = model.predict_height({ux(rng), uy(rng)});
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(bm_predict_height);

void bm_recursive_update(benchmark::State& state) {
  const int chunk_size = static_cast<int>(state.range(0));
  terrain::KernelParams kernel;
  kernel.finalize();
  const auto seed_obs = sample_obs(2000, 13);
  const auto centers = terrain::select_centers(
      seed_obs, {{0.0, -1.0}, {6.0, 1.0}}, 0.07, 0.12, 3);
  const terrain::TerrainModel base(kernel, centers);
  const auto chunk = sample_obs(chunk_size, 17);
  for (auto _ : state) {
    terrain::TerrainModel model = base;
    const auto report = model.recursive_update(chunk);
    benchmark::DoNotOptimize(report);
  }
  state.SetItemsProcessed(state.iterations() * chunk_size);
}
BENCHMARK(bm_recursive_update)->Arg(100)->Arg(400)->Arg(1600);

void bm_lm_solve(benchmark::State& state) {
  const FeatureCloud world_scan = corner_scan(43);
  match::LocalMap map;
  map.insert(world_scan, Mat3::Identity(), Vec3::Zero());
  RobotState truth;
  truth.rotation = so3_exp(Vec3(0.02, -0.015, 0.04));
  truth.translation = Vec3(0.1, -0.05, 0.08);
  FeatureCloud scan = corner_scan(44);
  for (auto& p : scan.points)
    p.p = truth.rotation.transpose() * (p.p - truth.translation);
  RobotState guess = truth;
  guess.rotation = truth.rotation * so3_exp(Vec3(0.01, 0.01, -0.02));
  guess.translation += Vec3(0.04, -0.03, 0.05);
  const match::SolverConfig config;
  for (auto _ : state) {
    const RobotState solved = match::lm_solve(guess, scan, map, {}, config);
    benchmark::DoNotOptimize(solved);
  }
}
BENCHMARK(bm_lm_solve);

}  // namespace

BENCHMARK_MAIN();
