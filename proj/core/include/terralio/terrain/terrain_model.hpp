#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "terralio/grid_index.hpp"
#include "terralio/terrain/center_select.hpp"
#include "terralio/terrain/kernel.hpp"

namespace terralio::terrain {

struct HeightQuery {
  double z = 0.0;
  bool supported = false;  // false when no center lies within cutoff of x
};

struct UpdateReport {
  std::size_t active_blocks = 0;
  std::size_t active_centers = 0;
  std::size_t born_centers = 0;
  bool rejected = false;  // inner solve failed; model left unchanged
};

/// Terrain height field as a weighted sum of truncated Gaussian kernels,
/// with the regularized information matrix inverse kept in block-diagonal
/// form over spatial tiles of side 2 * cutoff_radius.
class TerrainModel {
 public:
  TerrainModel() = default;
  TerrainModel(KernelParams kernel, CenterSet centers);

  const KernelParams& kernel() const { return kernel_; }
  const CenterSet& centers() const { return centers_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t num_centers() const { return centers_.centers.size(); }
  std::size_t num_blocks() const { return blocks_.size(); }
  std::uint32_t block_of(std::uint32_t center) const {
    return block_index_[center];
  }
  const std::vector<std::uint32_t>& block_members(std::uint32_t b) const {
    return blocks_[b].members;
  }
  const Eigen::MatrixXd& block_info_inverse(std::uint32_t b) const {
    return blocks_[b].info_inv;
  }

  /// Moment-corrected feature vector m(x): entry j is
  /// (sigma^2/sigma_tilde^2) * kappa_{sigma_tilde}(x; c_j), truncated.
  SparseVec moment_feature(const Vec2& x) const;

  /// Predicted height sum_i w_i kappa_sigma(x; c_i); 0 + unsupported flag
  /// when x is beyond cutoff of every center.
  HeightQuery predict_height(const Vec2& x) const;

  /// Analytic gradient of predict_height.
  Vec2 predict_gradient(const Vec2& x) const;

  /// Kalman-style weight update over active blocks, with center birth for
  /// newly supported mesh nodes. `allow_birth` exists for algebraic
  /// equivalence tests; pipeline use keeps it on.
  UpdateReport recursive_update(const TerrainObservation& obs,
                                bool allow_birth = true);

  /// Grid export "x,y,z_pred" (unsupported cells skipped).
  void export_csv(const std::string& path, double grid_step) const;

  void save(const std::string& path) const;
  static TerrainModel load(const std::string& path);

 private:
  friend TerrainModel fit_batch_ridge(const KernelParams&, const CenterSet&,
                                      const TerrainObservation&);

  struct Block {
    std::vector<std::uint32_t> members;  // ascending center ids
    Eigen::MatrixXd info_inv;            // symmetric positive definite
  };

  std::int64_t tile_key(const Vec2& c) const;
  std::uint32_t block_for_tile(std::int64_t key);  // creates on demand
  std::uint32_t add_center(const Vec2& c);         // weight 0, prior 1/lambda
  std::vector<std::uint32_t> centers_near(const Vec2& x, double radius) const;
  void rebuild_indexes();

  KernelParams kernel_;
  CenterSet centers_;
  Eigen::VectorXd weights_;
  std::vector<std::uint32_t> block_index_;  // per center
  std::vector<Block> blocks_;
  std::unordered_map<std::int64_t, std::uint32_t> tile_blocks_;
  std::unique_ptr<GridIndex2> center_index_;
  std::unordered_map<std::int64_t, std::uint32_t> mesh_occupancy_;  // node -> 1
};

/// Ridge fit over one observation set: w = (sum m m^T + lambda I)^-1 sum m z.
/// Throws std::runtime_error (with a condition estimate) on solver failure.
TerrainModel fit_batch_ridge(const KernelParams& params,
                             const CenterSet& centers,
                             const TerrainObservation& obs);

}  // namespace terralio::terrain
