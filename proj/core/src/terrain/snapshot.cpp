#include <cstring>
#include <fstream>
#include <stdexcept>

#include "terralio/terrain/terrain_model.hpp"

// Terrain snapshot, little-endian binary:
//   magic "RBFT", version u32, N u32, block count u32
//   centers: N pairs of f64
//   weights: N f64
//   block index: N u32
//   per block (ascending id): lower triangle of info_inverse, row-major f64
//   trailer (version >= 1): kernel sigma, sigma_eps, lambda, cutoff (f64),
//   mesh_resolution, accept_radius (f64), accept_count u32, roi min/max (4 f64)

namespace terralio::terrain {

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated terrain snapshot");
  return v;
}

constexpr char kMagic[4] = {'R', 'B', 'F', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void TerrainModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(num_centers()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(blocks_.size()));
  for (const Vec2& c : centers_.centers) {
    put<double>(out, c.x());
    put<double>(out, c.y());
  }
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    put<double>(out, weights_(i));
  for (std::uint32_t b : block_index_) put<std::uint32_t>(out, b);
  for (const Block& blk : blocks_)
    for (Eigen::Index r = 0; r < blk.info_inv.rows(); ++r)
      for (Eigen::Index c = 0; c <= r; ++c) put<double>(out, blk.info_inv(r, c));
  put<double>(out, kernel_.sigma);
  put<double>(out, kernel_.sigma_eps);
  put<double>(out, kernel_.lambda);
  put<double>(out, kernel_.cutoff_radius);
  put<double>(out, centers_.mesh_resolution);
  put<double>(out, centers_.accept_radius);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(centers_.accept_count));
  put<double>(out, centers_.roi.min.x());
  put<double>(out, centers_.roi.min.y());
  put<double>(out, centers_.roi.max.x());
  put<double>(out, centers_.roi.max.y());
}

TerrainModel TerrainModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a terrain snapshot: " + path);
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported snapshot version");
  const auto n = get<std::uint32_t>(in);
  const auto nb = get<std::uint32_t>(in);

  TerrainModel model;
  model.centers_.centers.resize(n);
  for (auto& c : model.centers_.centers) {
    c.x() = get<double>(in);
    c.y() = get<double>(in);
  }
  model.weights_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) model.weights_(i) = get<double>(in);
  model.block_index_.resize(n);
  model.blocks_.resize(nb);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto b = get<std::uint32_t>(in);
    if (b >= nb) throw std::runtime_error("corrupt block index");
    model.block_index_[i] = b;
    model.blocks_[b].members.push_back(i);
  }
  for (auto& blk : model.blocks_) {
    const auto bn = static_cast<Eigen::Index>(blk.members.size());
    blk.info_inv.resize(bn, bn);
    for (Eigen::Index r = 0; r < bn; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) {
        const double v = get<double>(in);
        blk.info_inv(r, c) = v;
        blk.info_inv(c, r) = v;
      }
  }
  model.kernel_.sigma = get<double>(in);
  model.kernel_.sigma_eps = get<double>(in);
  model.kernel_.lambda = get<double>(in);
  model.kernel_.cutoff_radius = get<double>(in);
  model.centers_.mesh_resolution = get<double>(in);
  model.centers_.accept_radius = get<double>(in);
  model.centers_.accept_count = static_cast<int>(get<std::uint32_t>(in));
  model.centers_.roi.min.x() = get<double>(in);
  model.centers_.roi.min.y() = get<double>(in);
  model.centers_.roi.max.x() = get<double>(in);
  model.centers_.roi.max.y() = get<double>(in);
  model.kernel_.finalize();

  // Rebuild the tile map from the stored block index.
  for (std::uint32_t i = 0; i < n; ++i)
    model.tile_blocks_.emplace(model.tile_key(model.centers_.centers[i]),
                               model.block_index_[i]);
  model.rebuild_indexes();
  return model;
}

}  // namespace terralio::terrain
