#include "terralio/terrain/terrain_model.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "terralio/parallel.hpp"

namespace terralio::terrain {

namespace {

std::int64_t pack2(std::int64_t x, std::int64_t y) {
  return (x << 32) ^ (y & 0xffffffffll);
}

std::int64_t mesh_node_key(const Vec2& node, const Rect& roi, double res) {
  return pack2(std::llround((node.x() - roi.min.x()) / res),
               std::llround((node.y() - roi.min.y()) / res));
}

}  // namespace

TerrainModel::TerrainModel(KernelParams kernel, CenterSet centers)
    : kernel_(kernel), centers_(std::move(centers)) {
  kernel_.finalize();
  // n == 0 is allowed: the pipeline starts empty and grows through birth
  const auto n = centers_.centers.size();
  weights_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  block_index_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t b = block_for_tile(tile_key(centers_.centers[i]));
    block_index_[i] = b;
    blocks_[b].members.push_back(i);
  }
  for (auto& blk : blocks_) {
    const auto bn = static_cast<Eigen::Index>(blk.members.size());
    blk.info_inv =
        Eigen::MatrixXd::Identity(bn, bn) * (1.0 / kernel_.lambda);
  }
  rebuild_indexes();
}

std::int64_t TerrainModel::tile_key(const Vec2& c) const {
  const double side = 2.0 * kernel_.cutoff_radius;
  if (!(side < 1e12)) return 0;  // effectively untruncated: one tile
  return pack2(static_cast<std::int64_t>(std::floor(c.x() / side)),
               static_cast<std::int64_t>(std::floor(c.y() / side)));
}

std::uint32_t TerrainModel::block_for_tile(std::int64_t key) {
  auto it = tile_blocks_.find(key);
  if (it != tile_blocks_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(blocks_.size());
  tile_blocks_.emplace(key, id);
  blocks_.emplace_back();
  return id;
}

void TerrainModel::rebuild_indexes() {
  const double cell = std::min(kernel_.cutoff_radius, 1e6);
  center_index_ = std::make_unique<GridIndex2>(cell);
  center_index_->build(centers_.centers);
  mesh_occupancy_.clear();
  for (const Vec2& c : centers_.centers)
    mesh_occupancy_.emplace(
        mesh_node_key(c, centers_.roi, centers_.mesh_resolution), 1u);
}

std::vector<std::uint32_t> TerrainModel::centers_near(const Vec2& x,
                                                      double radius) const {
  return center_index_->radius_query(x, radius);
}

std::uint32_t TerrainModel::add_center(const Vec2& c) {
  const auto id = static_cast<std::uint32_t>(centers_.centers.size());
  centers_.centers.push_back(c);
  const std::uint32_t b = block_for_tile(tile_key(c));
  block_index_.push_back(b);
  Block& blk = blocks_[b];
  blk.members.push_back(id);
  const auto bn = static_cast<Eigen::Index>(blk.members.size());
  blk.info_inv.conservativeResize(bn, bn);
  blk.info_inv.row(bn - 1).setZero();
  blk.info_inv.col(bn - 1).setZero();
  blk.info_inv(bn - 1, bn - 1) = 1.0 / kernel_.lambda;
  weights_.conservativeResize(weights_.size() + 1);
  weights_(weights_.size() - 1) = 0.0;
  center_index_->insert(c);
  mesh_occupancy_.emplace(
      mesh_node_key(c, centers_.roi, centers_.mesh_resolution), 1u);
  return id;
}

SparseVec TerrainModel::moment_feature(const Vec2& x) const {
  if (!x.allFinite()) throw std::domain_error("non-finite query");
  SparseVec m;
  const double scale = kernel_.moment_scale();
  const double st = kernel_.sigma_tilde();
  for (std::uint32_t id : centers_near(x, kernel_.cutoff_radius)) {
    const double k = kernel_eval(kernel_, x, centers_.centers[id], st);
    if (k != 0.0) m.entries.emplace_back(id, scale * k);
  }
  return m;
}

HeightQuery TerrainModel::predict_height(const Vec2& x) const {
  const auto ids = centers_near(x, kernel_.cutoff_radius);
  if (ids.empty()) return {0.0, false};
  const double z = parallel_reduce_det<double>(
      ids.size(), 0.0,
      [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          const std::uint32_t id = ids[i];
          s += weights_(id) *
               kernel_eval(kernel_, x, centers_.centers[id], kernel_.sigma);
        }
        return s;
      },
      [](double& acc, const double& p) { acc += p; });
  return {z, true};
}

Vec2 TerrainModel::predict_gradient(const Vec2& x) const {
  const auto ids = centers_near(x, kernel_.cutoff_radius);
  const double inv_s2 = 1.0 / (kernel_.sigma * kernel_.sigma);
  return parallel_reduce_det<Vec2>(
      ids.size(), Vec2::Zero(),
      [&](std::size_t b, std::size_t e) {
        Vec2 s = Vec2::Zero();
        for (std::size_t i = b; i < e; ++i) {
          const std::uint32_t id = ids[i];
          const Vec2& c = centers_.centers[id];
          const double k = kernel_eval(kernel_, x, c, kernel_.sigma);
          s += weights_(id) * (-(x - c) * inv_s2) * k;
        }
        return s;
      },
      [](Vec2& acc, const Vec2& p) { acc += p; });
}

UpdateReport TerrainModel::recursive_update(const TerrainObservation& obs,
                                            bool allow_birth) {
  obs.validate();
  UpdateReport report;

  if (allow_birth) {
    const auto nodes = supported_mesh_nodes(
        obs, centers_.roi, centers_.mesh_resolution, centers_.accept_radius,
        centers_.accept_count);
    for (const Vec2& node : nodes) {
      const auto key =
          mesh_node_key(node, centers_.roi, centers_.mesh_resolution);
      if (mesh_occupancy_.count(key)) continue;
      add_center(node);
      ++report.born_centers;
    }
  }

  // Active blocks: those owning a center within cutoff of some observation.
  std::vector<char> center_active(centers_.centers.size(), 0);
  for (const Vec2& x : obs.xy)
    for (std::uint32_t id : centers_near(x, kernel_.cutoff_radius))
      center_active[id] = 1;
  std::set<std::uint32_t> active_blocks;
  for (std::uint32_t i = 0; i < center_active.size(); ++i)
    if (center_active[i]) active_blocks.insert(block_index_[i]);
  report.active_blocks = active_blocks.size();
  if (active_blocks.empty()) return report;

  // Merge active blocks into one working system (cross-block info stays 0).
  std::vector<std::uint32_t> merged;
  for (std::uint32_t b : active_blocks)
    merged.insert(merged.end(), blocks_[b].members.begin(),
                  blocks_[b].members.end());
  report.active_centers = merged.size();
  const auto n = static_cast<Eigen::Index>(merged.size());
  const auto m_total = static_cast<Eigen::Index>(obs.size());

  std::vector<std::int32_t> row_of(centers_.centers.size(), -1);
  for (Eigen::Index r = 0; r < n; ++r) row_of[merged[r]] = static_cast<std::int32_t>(r);

  Eigen::MatrixXd Mt = Eigen::MatrixXd::Zero(n, m_total);
  const double scale = kernel_.moment_scale();
  const double st = kernel_.sigma_tilde();
  for (Eigen::Index j = 0; j < m_total; ++j) {
    const Vec2& x = obs.xy[j];
    for (std::uint32_t id : centers_near(x, kernel_.cutoff_radius)) {
      const double k = kernel_eval(kernel_, x, centers_.centers[id], st);
      if (k != 0.0) Mt(row_of[id], j) = scale * k;
    }
  }

  Eigen::MatrixXd Hinv(n, n);
  Hinv.setZero();
  Eigen::VectorXd w(n);
  {
    Eigen::Index off = 0;
    for (std::uint32_t b : active_blocks) {
      const auto bn = static_cast<Eigen::Index>(blocks_[b].members.size());
      Hinv.block(off, off, bn, bn) = blocks_[b].info_inv;
      for (Eigen::Index i = 0; i < bn; ++i)
        w(off + i) = weights_(blocks_[b].members[i]);
      off += bn;
    }
  }

  // Woodbury rank update, chunked over observation columns; each chunk is an
  // exact recursive step, so the composition equals the one-shot update.
  constexpr Eigen::Index kChunk = 64;
  for (Eigen::Index o = 0; o < m_total; o += kChunk) {
    const Eigen::Index m = std::min(kChunk, m_total - o);
    const auto Mc = Mt.middleCols(o, m);
    const Eigen::MatrixXd K = Hinv * Mc;
    Eigen::MatrixXd S = Mc.transpose() * K;
    S.diagonal().array() += 1.0;
    S = 0.5 * (S + S.transpose());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      report.rejected = true;
      return report;
    }
    const Eigen::MatrixXd KS = ldlt.solve(K.transpose());
    if (!KS.allFinite()) {
      report.rejected = true;
      return report;
    }
    Hinv.noalias() -= K * KS;
    Hinv = 0.5 * (Hinv + Hinv.transpose()).eval();
    Eigen::VectorXd resid =
        Eigen::Map<const Eigen::VectorXd>(obs.z.data() + o, m) -
        Mc.transpose() * w;
    w.noalias() += Hinv * (Mc * resid);
  }

  // Re-split: keep per-tile diagonal blocks, drop transient cross couplings.
  {
    Eigen::Index off = 0;
    for (std::uint32_t b : active_blocks) {
      const auto bn = static_cast<Eigen::Index>(blocks_[b].members.size());
      blocks_[b].info_inv = Hinv.block(off, off, bn, bn);
      blocks_[b].info_inv =
          0.5 * (blocks_[b].info_inv + blocks_[b].info_inv.transpose()).eval();
      for (Eigen::Index i = 0; i < bn; ++i)
        weights_(blocks_[b].members[i]) = w(off + i);
      off += bn;
    }
  }
  return report;
}

void TerrainModel::export_csv(const std::string& path, double grid_step) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "x,y,z_pred\n";
  const Rect& roi = centers_.roi;
  for (double x = roi.min.x(); x <= roi.max.x() + 1e-12; x += grid_step) {
    for (double y = roi.min.y(); y <= roi.max.y() + 1e-12; y += grid_step) {
      const HeightQuery q = predict_height({x, y});
      if (!q.supported) continue;
      out << x << ',' << y << ',' << q.z << '\n';
    }
  }
}

TerrainModel fit_batch_ridge(const KernelParams& params,
                             const CenterSet& centers,
                             const TerrainObservation& obs) {
  obs.validate();
  TerrainModel model(params, centers);
  const auto n = static_cast<Eigen::Index>(model.num_centers());

  Eigen::MatrixXd H =
      Eigen::MatrixXd::Identity(n, n) * model.kernel().lambda;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::size_t j = 0; j < obs.size(); ++j) {
    const SparseVec m = model.moment_feature(obs.xy[j]);
    for (const auto& [i1, v1] : m.entries) {
      b(i1) += v1 * obs.z[j];
      for (const auto& [i2, v2] : m.entries) H(i1, i2) += v1 * v2;
    }
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  Eigen::VectorXd w = ldlt.solve(b);
  if (ldlt.info() != Eigen::Success || !w.allFinite()) {
    const auto d = ldlt.vectorD();
    throw std::runtime_error(
        "ridge solve failed; condition estimate " +
        std::to_string(d.cwiseAbs().maxCoeff() /
                       std::max(d.cwiseAbs().minCoeff(), 1e-300)));
  }
  model.weights_ = w;

  for (auto& blk : model.blocks_) {
    const auto bn = static_cast<Eigen::Index>(blk.members.size());
    Eigen::MatrixXd Hb(bn, bn);
    for (Eigen::Index r = 0; r < bn; ++r)
      for (Eigen::Index c = 0; c < bn; ++c)
        Hb(r, c) = H(blk.members[r], blk.members[c]);
    blk.info_inv = Hb.ldlt().solve(Eigen::MatrixXd::Identity(bn, bn));
    blk.info_inv = 0.5 * (blk.info_inv + blk.info_inv.transpose()).eval();
  }
  return model;
}

}  // namespace terralio::terrain
