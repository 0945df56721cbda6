// terralio command line: simulate / run / eval / fit-terrain / export-terrain.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 threshold violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "terralio/eval/metrics.hpp"
#include "terralio/pipeline.hpp"
#include "terralio/sim/simulator.hpp"
#include "terralio/terrain/terrain_model.hpp"

namespace fs = std::filesystem;
using namespace terralio;

namespace {

int cmd_simulate(const std::string& scene_name, std::uint64_t seed,
                 const std::string& out) {
  const sim::Scene scene = sim::stock_scene(scene_name);
  const sim::SequenceBundle bundle = sim::simulate(scene, seed);
  sim::save_bundle(bundle, out);
  std::cout << "wrote " << bundle.scans.size() << " frames to " << out << "\n";
  return 0;
}

int cmd_run(pipeline::RunConfig config) {
  const sim::SequenceBundle bundle = sim::load_bundle(config.sequence_dir);
  const pipeline::RunResult result = pipeline::run_odometry(bundle, config);

  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);
  pipeline::write_trajectory_csv(result.trajectory,
                                 (out / "traj_est.csv").string());
  result.terrain.save((out / "terrain.bin").string());
  std::ofstream((out / "diagnostics.txt").string())
      << result.diagnostics_text();
  std::ofstream((out / "config.json").string()) << config.to_json();
  std::cout << "frames " << result.frames.size() << "  median ms "
            << result.median_frame_ms() << "\n";
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& gt_path,
             double rte_window, double max_dt, const std::string& out_prefix,
             double max_ate, double max_z_ate) {
  auto to_traj = [](const std::vector<TimedPose>& poses) {
    eval::TrajectoryEstimate t;
    for (const TimedPose& p : poses) {
      t.timestamps.push_back(p.timestamp);
      t.positions.push_back(p.translation);
    }
    return t;
  };
  const auto est = to_traj(pipeline::read_trajectory_csv(est_path));
  const auto gt = to_traj(pipeline::read_trajectory_csv(gt_path));
  const auto pairs = eval::associate(est, gt, max_dt);
  const eval::ErrorReport report = eval::score(pairs, rte_window);
  std::cout << report.table();
  if (!out_prefix.empty()) {
    eval::write_per_frame_errors(pairs, out_prefix + "_errors.csv");
    std::ofstream(out_prefix + "_report.txt") << report.table();
  }
  if (max_ate > 0.0 && report.ate_aligned.rmse > max_ate) return 3;
  if (max_z_ate > 0.0 && report.z_ate_aligned.rmse > max_z_ate) return 3;
  return 0;
}

// One-shot batch ridge fit from ground points under ground-truth poses.
int cmd_fit_terrain(const std::string& sequence_dir, const std::string& out,
                    double sigma, double sigma_eps, double mesh) {
  const sim::SequenceBundle bundle = sim::load_bundle(sequence_dir);
  terrain::KernelParams kernel;
  kernel.sigma = sigma;
  kernel.sigma_eps = sigma_eps;
  kernel.finalize();

  terrain::TerrainObservation obs;
  for (std::size_t k = 0; k < bundle.scans.size(); ++k) {
    const TimedPose& pose = bundle.gt_poses[k];
    for (const FeaturePoint& f : bundle.scans[k].points) {
      if (f.kind != FeatureKind::Ground) continue;
      const Vec3 p = pose.rotation * f.p + pose.translation;
      if (!bundle.scene.terrain_roi.contains(p.head<2>())) continue;
      obs.xy.push_back(p.head<2>());
      obs.z.push_back(p.z());
    }
  }
  const terrain::CenterSet centers = terrain::select_centers(
      obs, bundle.scene.terrain_roi, mesh, /*accept_radius=*/0.12,
      /*accept_count=*/3);
  const terrain::TerrainModel model = terrain::fit_batch_ridge(kernel, centers, obs);
  model.save(out);
  std::cout << "fit " << model.num_centers() << " centers from "
            << obs.xy.size() << " points\n";
  return 0;
}

int cmd_export_terrain(const std::string& model_path, const std::string& out,
                       double step) {
  const terrain::TerrainModel model = terrain::TerrainModel::load(model_path);
  model.export_csv(out, step);
  std::cout << "exported " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"terrain-aware lidar-inertial odometry toolkit"};
  app.require_subcommand(1);

  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic bundle");
  std::string scene = "staircase", out_dir = "bundle";
  std::uint64_t seed = 1;
  bool list_scenes = false;
  sim_cmd->add_option("--scene", scene, "stock scene name");
  sim_cmd->add_option("--seed", seed, "rng seed");
  sim_cmd->add_option("--out", out_dir, "output directory");
  sim_cmd->add_flag("--list", list_scenes, "list stock scenes and exit");

  auto* run_cmd = app.add_subcommand("run", "run odometry over a bundle");
  std::string config_path, run_sequence, run_out;
  bool no_manifold = false, no_imu = false;
  double lambda_manifold = -1.0;
  int workers = -1;
  run_cmd->add_option("--config", config_path, "json config file");
  run_cmd->add_option("--sequence", run_sequence, "bundle directory");
  run_cmd->add_option("--out", run_out, "output directory");
  run_cmd->add_flag("--no-manifold", no_manifold, "disable the terrain term");
  run_cmd->add_flag("--no-imu", no_imu, "constant-velocity prediction");
  run_cmd->add_option("--lambda-manifold", lambda_manifold, "penalty weight");
  run_cmd->add_option("--workers", workers, "worker thread count");

  auto* eval_cmd = app.add_subcommand("eval", "score a trajectory");
  std::string est_path, gt_path, out_prefix;
  double rte_window = 1.0, max_dt = 0.05, max_ate = 0.0, max_z_ate = 0.0;
  eval_cmd->add_option("--est", est_path, "estimated trajectory csv")->required();
  eval_cmd->add_option("--gt", gt_path, "ground-truth trajectory csv")->required();
  eval_cmd->add_option("--rte-window", rte_window, "seconds");
  eval_cmd->add_option("--max-dt", max_dt, "pairing tolerance, s");
  eval_cmd->add_option("--out-prefix", out_prefix, "csv/report prefix");
  eval_cmd->add_option("--max-ate", max_ate, "fail (exit 3) above this rmse");
  eval_cmd->add_option("--max-z-ate", max_z_ate, "fail (exit 3) above this");

  auto* fit_cmd = app.add_subcommand("fit-terrain", "batch ridge terrain fit");
  std::string fit_sequence, fit_out = "terrain.bin";
  double sigma = 0.04, sigma_eps = 0.1, mesh = 0.07;
  fit_cmd->add_option("--sequence", fit_sequence, "bundle directory")->required();
  fit_cmd->add_option("--out", fit_out, "model file");
  fit_cmd->add_option("--sigma", sigma, "kernel bandwidth, m");
  fit_cmd->add_option("--sigma-eps", sigma_eps, "point noise std, m");
  fit_cmd->add_option("--mesh", mesh, "center mesh resolution, m");

  auto* export_cmd = app.add_subcommand("export-terrain", "grid csv export");
  std::string model_path, export_out = "terrain.csv";
  double step = 0.05;
  export_cmd->add_option("--model", model_path, "model file")->required();
  export_cmd->add_option("--out", export_out, "csv path");
  export_cmd->add_option("--step", step, "grid step, m");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) {
      if (list_scenes) {
        for (const auto& name : sim::stock_scene_names())
          std::cout << name << "\n";
        return 0;
      }
      return cmd_simulate(scene, seed, out_dir);
    }
    if (run_cmd->parsed()) {
      pipeline::RunConfig config;
      if (!config_path.empty())
        config = pipeline::RunConfig::from_json_file(config_path);
      if (!run_sequence.empty()) config.sequence_dir = run_sequence;
      if (!run_out.empty()) config.out_dir = run_out;
      if (no_manifold) config.use_manifold = false;
      if (no_imu) config.use_imu = false;
      if (lambda_manifold >= 0.0)
        config.solver.lambda_manifold = lambda_manifold;
      if (workers > 0) config.workers = workers;
      if (config.sequence_dir.empty() || config.out_dir.empty()) {
        std::cerr << "run: --sequence and --out (or a config) required\n";
        return 1;
      }
      return cmd_run(config);
    }
    if (eval_cmd->parsed())
      return cmd_eval(est_path, gt_path, rte_window, max_dt, out_prefix,
                      max_ate, max_z_ate);
    if (fit_cmd->parsed())
      return cmd_fit_terrain(fit_sequence, fit_out, sigma, sigma_eps, mesh);
    if (export_cmd->parsed())
      return cmd_export_terrain(model_path, export_out, step);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
