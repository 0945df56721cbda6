#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "terralio/types.hpp"

namespace terralio::terrain {

/// Gaussian kernel and regression parameters for the terrain surface.
struct KernelParams {
  double sigma = 0.04;          // kernel bandwidth, m
  double sigma_eps = 0.1;       // point-noise std, m
  double lambda = 1e-3;         // ridge weight
  double cutoff_radius = 0.0;   // kernel support truncation, m; 0 = auto

  double sigma_tilde() const;   // sqrt(sigma^2 + sigma_eps^2)
  double moment_scale() const;  // sigma^2 / sigma_tilde^2

  /// Fills cutoff_radius with max(3*sigma_tilde, cutoff_radius) and checks
  /// the parameter invariants. Throws std::invalid_argument on violation.
  void finalize();
};

/// exp(-||x-c||^2 / (2 b^2)), exactly 0 beyond params.cutoff_radius.
/// Throws std::domain_error on non-finite input.
double kernel_eval(const KernelParams& params, const Vec2& x, const Vec2& c,
                   double bandwidth);

/// Sparse vector indexed by center id.
struct SparseVec {
  std::vector<std::pair<std::uint32_t, double>> entries;  // ascending index
};

}  // namespace terralio::terrain
