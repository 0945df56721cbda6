#pragma once

#include <string>
#include <vector>

#include "terralio/imu/preintegration.hpp"
#include "terralio/match/scan_matcher.hpp"
#include "terralio/sim/simulator.hpp"
#include "terralio/terrain/terrain_model.hpp"

namespace terralio::pipeline {

/// Full odometry configuration. Every kernel parameter defaults to the
/// recommended values (sigma 0.04 m, mesh 0.07 m, sigma_eps 0.1 m).
struct RunConfig {
  std::string sequence_dir;
  std::string out_dir;

  terrain::KernelParams kernel;
  double mesh_resolution = 0.07;   // m
  double accept_radius = 0.12;     // m, center support search
  int accept_count = 3;

  match::SolverConfig solver;
  match::MapConfig map;

  bool use_manifold = true;
  bool use_imu = true;
  imu::ImuBiases imu_biases;       // fixed estimates, not optimized

  // ground-point selection for terrain updates
  double ground_voxel = 0.12;      // m, xy downsampling
  double ground_radius = 2.5;      // m around the base
  std::size_t ground_max_points = 400;

  int workers = 1;
  std::uint64_t seed = 0;

  static RunConfig from_json(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

struct FrameDiagnostics {
  std::size_t index = 0;
  double timestamp = 0.0;
  double wall_ms = 0.0;
  bool held = false;      // solver failed; pose held at the prediction
  bool inserted = true;   // scan accepted into the map / terrain model
  match::SolveReport solve;
  terrain::UpdateReport terrain;
};

struct RunResult {
  std::vector<TimedPose> trajectory;
  std::vector<FrameDiagnostics> frames;
  terrain::TerrainModel terrain;

  double median_frame_ms() const;
  std::string diagnostics_text() const;
};

/// Runs odometry over a bundle. The first pose is taken from ground truth
/// (anchor only; later poses never see it).
RunResult run_odometry(const sim::SequenceBundle& bundle,
                       const RunConfig& config);

void write_trajectory_csv(const std::vector<TimedPose>& trajectory,
                          const std::string& path);
std::vector<TimedPose> read_trajectory_csv(const std::string& path);

}  // namespace terralio::pipeline
