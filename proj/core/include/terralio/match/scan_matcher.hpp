#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "terralio/kinematics/contact.hpp"
#include "terralio/match/local_map.hpp"
#include "terralio/match/residuals.hpp"
#include "terralio/terrain/terrain_model.hpp"
#include "terralio/types.hpp"

namespace terralio::match {

struct SolverConfig {
  double lambda_manifold = 1.0;    // penalty weight on wheel residuals
  double lm_init_damping = 1e-4;
  int lm_max_iters = 10;           // outer iterations (re-association)
  int lm_max_inner = 8;            // damped steps per association
  int lm_max_rejects = 12;
  double tol_dcost = 1e-10;
  double tol_dstate = 1e-10;
  double corr_gate = 1.0;          // correspondence distance gate, m
  int min_correspondences = 10;
  double huber_delta = 0.1;        // m; <= 0 disables robustification
  // separate Huber width for the wheel-contact rows: near steps the smoothed
  // terrain can be decimeters off, and an unbounded pull there costs more
  // accuracy than the constraint adds
  double manifold_huber_delta = 0.05;  // m; <= 0 disables
  double plane_fit_tol = 0.025;    // m, max neighbor-to-plane residual
  double plane_eig_ratio = 5.0;    // middle/smallest eigenvalue planarity gate
  double edge_eig_ratio = 3.0;     // dominant/second eigenvalue acceptance
  double edge_fit_tol = 0.05;      // m, max neighbor-to-line residual
  // minimum axial extent of the neighbor set; near-duplicate clusters (the
  // same column sample seen by several frames) have no line direction
  double edge_min_extent = 0.05;   // m
  double degeneracy_eig_min = 10.0;
  // adaptive trim: drop matches with association distance above
  // max(trim_ratio * median distance, trim_floor); cross-surface matches
  // survive every per-fit gate but stand out against the consensus
  double trim_ratio = 5.0;
  double trim_floor = 0.003;       // m
  // xy voxel thinning applied to ground hits before association (0 = use all);
  // ground patches carry most of the height information but arrive dense
  double ground_corr_voxel = 0.25;
  // ground hits beyond this horizontal radius are skipped: grazing rays
  // sample the surface too sparsely for trustworthy local plane fits
  double ground_corr_radius = 4.0;
};

struct Correspondence {
  FeatureKind kind = FeatureKind::Edge;
  Vec3 p_sensor = Vec3::Zero();
  LineParam line;
  PlaneParam plane;
  double weight = 1.0;          // validity/robust weight in [0, 1]
  std::int32_t map_label = -1;  // majority neighbor label
};

std::vector<Correspondence> build_correspondences(const FeatureCloud& features,
                                                  const RobotState& guess,
                                                  const LocalMap& map,
                                                  const SolverConfig& config);

/// Optional wheel-contact inputs for the manifold term.
struct ManifoldInputs {
  const JointConfig* joints = nullptr;
  const kin::LegModel* leg = nullptr;
  const terrain::TerrainModel* terrain = nullptr;
  bool enabled() const { return joints && leg && terrain; }
};

struct CostEval {
  double cost = 0.0;
  Eigen::MatrixXd jacobian;  // rows x 6, columns [dtheta, dt]
  Eigen::VectorXd residual;
  int feature_rows = 0;
  int manifold_rows = 0;
  std::optional<double> manifold_left, manifold_right;  // unscaled residuals
};

/// Stacked residual system for J_scan + lambda_M (r_L^2 + r_R^2).
/// Throws std::runtime_error when there is nothing to optimize.
CostEval total_cost(const RobotState& state,
                    const std::vector<Correspondence>& correspondences,
                    const ManifoldInputs& manifold, const SolverConfig& config);

struct SolveReport {
  bool converged = false;
  bool failed = false;      // divergence; returned state equals the initial
  bool degenerate = false;  // too few correspondences or near-singular Hessian
  int outer_iterations = 0;
  int accepted_steps = 0;
  double final_cost = 0.0;
  std::size_t correspondence_count = 0;
  std::vector<double> cost_trace;
  std::optional<double> manifold_left, manifold_right;
  double smallest_feature_eigenvalue = 0.0;
};

/// Levenberg-Marquardt pose refinement with re-association every outer
/// iteration. Only rotation and translation are optimized.
RobotState lm_solve(const RobotState& initial, const FeatureCloud& features,
                    const LocalMap& map, const ManifoldInputs& manifold,
                    const SolverConfig& config, SolveReport* report = nullptr);

}  // namespace terralio::match
