#include "terralio/pipeline.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <chrono>
#include <deque>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "terralio/io/csv.hpp"
#include "terralio/parallel.hpp"

namespace terralio::pipeline {

using nlohmann::json;

RunConfig RunConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  RunConfig c;
  c.sequence_dir = j.value("sequence_dir", std::string());
  c.out_dir = j.value("out_dir", std::string());

  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    c.kernel.sigma = k.value("sigma", c.kernel.sigma);
    c.kernel.sigma_eps = k.value("sigma_eps", c.kernel.sigma_eps);
    c.kernel.lambda = k.value("lambda", c.kernel.lambda);
    c.kernel.cutoff_radius = k.value("cutoff_radius", c.kernel.cutoff_radius);
  }
  c.mesh_resolution = j.value("mesh_resolution", c.mesh_resolution);
  c.accept_radius = j.value("accept_radius", c.accept_radius);
  c.accept_count = j.value("accept_count", c.accept_count);

  if (j.contains("solver")) {
    const json& s = j["solver"];
    c.solver.lambda_manifold = s.value("lambda_manifold", c.solver.lambda_manifold);
    c.solver.lm_init_damping = s.value("lm_init_damping", c.solver.lm_init_damping);
    c.solver.lm_max_iters = s.value("lm_max_iters", c.solver.lm_max_iters);
    c.solver.lm_max_inner = s.value("lm_max_inner", c.solver.lm_max_inner);
    c.solver.lm_max_rejects = s.value("lm_max_rejects", c.solver.lm_max_rejects);
    c.solver.tol_dcost = s.value("tol_dcost", c.solver.tol_dcost);
    c.solver.tol_dstate = s.value("tol_dstate", c.solver.tol_dstate);
    c.solver.corr_gate = s.value("corr_gate", c.solver.corr_gate);
    c.solver.min_correspondences =
        s.value("min_correspondences", c.solver.min_correspondences);
    c.solver.huber_delta = s.value("huber_delta", c.solver.huber_delta);
    c.solver.manifold_huber_delta =
        s.value("manifold_huber_delta", c.solver.manifold_huber_delta);
    c.solver.plane_fit_tol = s.value("plane_fit_tol", c.solver.plane_fit_tol);
    c.solver.edge_eig_ratio = s.value("edge_eig_ratio", c.solver.edge_eig_ratio);
    c.solver.edge_fit_tol = s.value("edge_fit_tol", c.solver.edge_fit_tol);
    c.solver.edge_min_extent =
        s.value("edge_min_extent", c.solver.edge_min_extent);
    c.solver.plane_eig_ratio = s.value("plane_eig_ratio", c.solver.plane_eig_ratio);
    c.solver.degeneracy_eig_min =
        s.value("degeneracy_eig_min", c.solver.degeneracy_eig_min);
    c.solver.trim_ratio = s.value("trim_ratio", c.solver.trim_ratio);
    c.solver.trim_floor = s.value("trim_floor", c.solver.trim_floor);
    c.solver.ground_corr_voxel =
        s.value("ground_corr_voxel", c.solver.ground_corr_voxel);
    c.solver.ground_corr_radius =
        s.value("ground_corr_radius", c.solver.ground_corr_radius);
  }
  if (j.contains("map")) {
    c.map.voxel_size = j["map"].value("voxel_size", c.map.voxel_size);
    c.map.window = j["map"].value("window", c.map.window);
  }
  c.use_manifold = j.value("use_manifold", c.use_manifold);
  c.use_imu = j.value("use_imu", c.use_imu);
  if (j.contains("imu_biases")) {
    const json& b = j["imu_biases"];
    auto vec = [](const json& a) {
      return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    };
    if (b.contains("accel")) c.imu_biases.accel = vec(b["accel"]);
    if (b.contains("gyro")) c.imu_biases.gyro = vec(b["gyro"]);
  }
  c.ground_voxel = j.value("ground_voxel", c.ground_voxel);
  c.ground_radius = j.value("ground_radius", c.ground_radius);
  c.ground_max_points = j.value("ground_max_points", c.ground_max_points);
  c.workers = j.value("workers", c.workers);
  c.seed = j.value("seed", c.seed);
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return from_json(os.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["sequence_dir"] = sequence_dir;
  j["out_dir"] = out_dir;
  j["kernel"] = {{"sigma", kernel.sigma},
                 {"sigma_eps", kernel.sigma_eps},
                 {"lambda", kernel.lambda},
                 {"cutoff_radius", kernel.cutoff_radius}};
  j["mesh_resolution"] = mesh_resolution;
  j["accept_radius"] = accept_radius;
  j["accept_count"] = accept_count;
  j["solver"] = {{"lambda_manifold", solver.lambda_manifold},
                 {"lm_init_damping", solver.lm_init_damping},
                 {"lm_max_iters", solver.lm_max_iters},
                 {"lm_max_inner", solver.lm_max_inner},
                 {"lm_max_rejects", solver.lm_max_rejects},
                 {"tol_dcost", solver.tol_dcost},
                 {"tol_dstate", solver.tol_dstate},
                 {"corr_gate", solver.corr_gate},
                 {"min_correspondences", solver.min_correspondences},
                 {"huber_delta", solver.huber_delta},
                 {"manifold_huber_delta", solver.manifold_huber_delta},
                 {"plane_fit_tol", solver.plane_fit_tol},
                 {"edge_eig_ratio", solver.edge_eig_ratio},
                 {"edge_fit_tol", solver.edge_fit_tol},
                 {"edge_min_extent", solver.edge_min_extent},
                 {"plane_eig_ratio", solver.plane_eig_ratio},
                 {"degeneracy_eig_min", solver.degeneracy_eig_min},
                 {"trim_ratio", solver.trim_ratio},
                 {"trim_floor", solver.trim_floor},
                 {"ground_corr_voxel", solver.ground_corr_voxel},
                 {"ground_corr_radius", solver.ground_corr_radius}};
  j["map"] = {{"voxel_size", map.voxel_size}, {"window", map.window}};
  j["use_manifold"] = use_manifold;
  j["use_imu"] = use_imu;
  j["imu_biases"] = {
      {"accel",
       {imu_biases.accel.x(), imu_biases.accel.y(), imu_biases.accel.z()}},
      {"gyro", {imu_biases.gyro.x(), imu_biases.gyro.y(), imu_biases.gyro.z()}}};
  j["ground_voxel"] = ground_voxel;
  j["ground_radius"] = ground_radius;
  j["ground_max_points"] = ground_max_points;
  j["workers"] = workers;
  j["seed"] = seed;
  return j.dump(2);
}

namespace {

// Ground-labeled points in the world frame, voxel-thinned in xy and kept
// near the base and inside the modeled ROI.
terrain::TerrainObservation select_ground_points(const FeatureCloud& scan,
                                                 const Mat3& R, const Vec3& t,
                                                 const Rect& roi,
                                                 const RunConfig& cfg) {
  terrain::TerrainObservation obs;
  std::unordered_set<std::int64_t> voxels;
  for (const FeaturePoint& f : scan.points) {
    if (f.kind != FeatureKind::Ground) continue;
    const Vec3 p = R * f.p + t;
    const Vec2 xy = p.head<2>();
    if (!roi.contains(xy)) continue;
    if ((xy - t.head<2>()).norm() > cfg.ground_radius) continue;
    const auto vx = static_cast<std::int64_t>(std::floor(xy.x() / cfg.ground_voxel));
    const auto vy = static_cast<std::int64_t>(std::floor(xy.y() / cfg.ground_voxel));
    if (!voxels.insert((vx << 21) ^ (vy & ((1 << 21) - 1))).second) continue;
    obs.xy.push_back(xy);
    obs.z.push_back(p.z());
    if (obs.xy.size() >= cfg.ground_max_points) break;
  }
  return obs;
}

std::span<const ImuSample> imu_window(const std::vector<ImuSample>& imu,
                                      double t0, double t1) {
  const auto begin = std::lower_bound(
      imu.begin(), imu.end(), t0,
      [](const ImuSample& s, double t) { return s.timestamp <= t; });
  const auto end = std::upper_bound(
      begin, imu.end(), t1,
      [](double t, const ImuSample& s) { return t < s.timestamp - 1e-9; });
  return {&*begin, static_cast<std::size_t>(end - begin)};
}

const JointConfig* nearest_joints(const std::vector<JointConfig>& joints,
                                  double t) {
  if (joints.empty()) return nullptr;
  const auto it = std::lower_bound(
      joints.begin(), joints.end(), t,
      [](const JointConfig& j, double v) { return j.timestamp < v; });
  if (it == joints.begin()) return &*it;
  if (it == joints.end()) return &joints.back();
  return (it->timestamp - t < t - std::prev(it)->timestamp) ? &*it
                                                            : &*std::prev(it);
}

}  // namespace

RunResult run_odometry(const sim::SequenceBundle& bundle,
                       const RunConfig& config) {
  if (bundle.scans.empty()) throw std::runtime_error("empty bundle");
  set_worker_count(config.workers);

  terrain::KernelParams kernel = config.kernel;
  kernel.finalize();

  terrain::CenterSet centers;
  centers.mesh_resolution = config.mesh_resolution;
  centers.accept_radius = config.accept_radius;
  centers.accept_count = config.accept_count;
  centers.roi = bundle.scene.terrain_roi;

  RunResult result;
  result.terrain = terrain::TerrainModel(kernel, centers);
  match::LocalMap map(config.map);

  RobotState state;
  state.rotation = bundle.gt_poses.front().rotation;
  state.translation = bundle.gt_poses.front().translation;
  state.accel_bias = config.imu_biases.accel;
  state.gyro_bias = config.imu_biases.gyro;

  // per-row cost history of accepted frames; a frame whose normalized cost
  // jumps far above the recent median got a bad pose, and inserting it would
  // write a displaced copy of every surface into the map
  std::deque<double> cost_history;

  for (std::size_t k = 0; k < bundle.scans.size(); ++k) {
    const auto t_start = std::chrono::steady_clock::now();
    const FeatureCloud& scan = bundle.scans[k];
    const double t_k = bundle.gt_poses[k].timestamp;
    FrameDiagnostics diag;
    diag.index = k;
    diag.timestamp = t_k;

    if (k > 0) {
      const double t_prev = bundle.gt_poses[k - 1].timestamp;
      const double dt = t_k - t_prev;
      RobotState pred = state;
      if (config.use_imu) {
        const auto window = imu_window(bundle.imu, t_prev, t_k);
        const auto delta = imu::preintegrate(
            window, t_prev, t_k, {state.accel_bias, state.gyro_bias});
        pred = imu::predict_pose(state, delta);
      } else {
        pred.translation += state.velocity * dt;
      }

      match::ManifoldInputs manifold;
      const JointConfig* joints = nearest_joints(bundle.joints, t_k);
      if (config.use_manifold && joints) {
        manifold.joints = joints;
        manifold.leg = &bundle.robot;
        manifold.terrain = &result.terrain;
      }

      RobotState solved = match::lm_solve(pred, scan, map, manifold,
                                          config.solver, &diag.solve);
      if (diag.solve.failed) {
        solved = pred;  // hold the prediction, keep moving
        diag.held = true;
      }
      solved.velocity = (solved.translation - state.translation) / dt;
      solved.accel_bias = state.accel_bias;
      solved.gyro_bias = state.gyro_bias;
      state = solved;
    }

    bool accept = !diag.held;
    if (k > 0 && accept) {
      const double rows =
          std::max<std::size_t>(diag.solve.correspondence_count, 1);
      const double per_row = diag.solve.final_cost / rows;
      if (cost_history.size() >= 5) {
        std::vector<double> sorted(cost_history.begin(), cost_history.end());
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                         sorted.end());
        const double med = sorted[sorted.size() / 2];
        if (per_row > std::max(10.0 * med, 1e-6)) accept = false;
      }
      if (accept) {
        cost_history.push_back(per_row);
        if (cost_history.size() > 20) cost_history.pop_front();
      }
    }
    diag.inserted = accept;

    if (accept) {
      map.insert(scan, state.rotation, state.translation);
      const auto obs = select_ground_points(scan, state.rotation,
                                            state.translation,
                                            bundle.scene.terrain_roi, config);
      if (!obs.xy.empty()) diag.terrain = result.terrain.recursive_update(obs);
    }

    TimedPose pose;
    pose.timestamp = t_k;
    pose.rotation = state.rotation;
    pose.translation = state.translation;
    result.trajectory.push_back(pose);

    diag.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
    result.frames.push_back(std::move(diag));
  }
  return result;
}

double RunResult::median_frame_ms() const {
  if (frames.empty()) return 0.0;
  std::vector<double> ms;
  ms.reserve(frames.size());
  for (const auto& f : frames) ms.push_back(f.wall_ms);
  std::sort(ms.begin(), ms.end());
  return ms[ms.size() / 2];
}

std::string RunResult::diagnostics_text() const {
  std::ostringstream os;
  for (const auto& f : frames) {
    os << "frame " << f.index << " t=" << f.timestamp << " ms=" << f.wall_ms
       << " corr=" << f.solve.correspondence_count
       << " iters=" << f.solve.outer_iterations
       << " cost=" << f.solve.final_cost;
    if (f.solve.manifold_left) os << " rM_L=" << *f.solve.manifold_left;
    if (f.solve.manifold_right) os << " rM_R=" << *f.solve.manifold_right;
    os << " active_blocks=" << f.terrain.active_blocks
       << " born=" << f.terrain.born_centers;
    if (f.solve.degenerate) os << " DEGENERATE";
    if (f.held) os << " HELD";
    if (!f.inserted) os << " NOINSERT";
    os << "\n";
  }
  os << "median_frame_ms " << median_frame_ms() << "\n";
  return os.str();
}

void write_trajectory_csv(const std::vector<TimedPose>& trajectory,
                          const std::string& path) {
  std::vector<std::vector<double>> rows;
  for (const TimedPose& p : trajectory) {
    const Eigen::Quaterniond q(p.rotation);
    rows.push_back({p.timestamp, p.translation.x(), p.translation.y(),
                    p.translation.z(), q.w(), q.x(), q.y(), q.z()});
  }
  io::write_csv(path, {"t", "x", "y", "z", "qw", "qx", "qy", "qz"}, rows);
}

std::vector<TimedPose> read_trajectory_csv(const std::string& path) {
  const io::CsvTable table = io::read_csv(path);
  std::vector<TimedPose> out;
  for (const auto& r : table.rows) {
    TimedPose p;
    p.timestamp = r[0];
    p.translation = Vec3(r[1], r[2], r[3]);
    if (r.size() >= 8)
      p.rotation = Eigen::Quaterniond(r[4], r[5], r[6], r[7])
                       .normalized()
                       .toRotationMatrix();
    out.push_back(p);
  }
  return out;
}

}  // namespace terralio::pipeline
