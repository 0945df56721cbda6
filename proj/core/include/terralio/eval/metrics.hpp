#pragma once

#include <string>
#include <vector>

#include "terralio/terrain/terrain_model.hpp"
#include "terralio/types.hpp"

namespace terralio::eval {

struct TrajectoryEstimate {
  std::vector<double> timestamps;  // strictly increasing
  std::vector<Vec3> positions;

  void validate() const;  // throws std::invalid_argument
};

struct PairedSamples {
  std::vector<double> timestamps;  // from est
  std::vector<Vec3> est;
  std::vector<Vec3> gt;
  std::size_t dropped_est = 0;
  std::size_t dropped_gt = 0;

  std::size_t size() const { return est.size(); }
};

enum class Align { None, Rigid };

struct AteResult {
  double rmse = 0.0;
  double max = 0.0;
  bool alignment_degenerate = false;  // collinear: fell back to translation
};

struct RteResult {
  double rmse = 0.0;
  double max = 0.0;
  std::size_t windows = 0;
};

struct Histogram {
  std::vector<double> edges;       // bins+1, over [0, 0.25] m
  std::vector<std::size_t> counts;
  std::size_t trimmed = 0;         // samples discarded as top outliers
  std::size_t overflow = 0;        // kept samples beyond the last edge

  std::size_t total() const;
  /// Fraction of kept samples with error below `threshold`.
  double fraction_below(double threshold) const;
};

struct ErrorReport {
  AteResult ate_raw;      // align = none
  AteResult ate_aligned;  // align = rigid
  RteResult rte;
  AteResult z_ate_raw;
  AteResult z_ate_aligned;
  RteResult z_rte;
  std::size_t pair_count = 0;

  std::string table() const;  // human-readable summary
};

/// Nearest-timestamp pairing within max_dt; throws when no pair survives.
PairedSamples associate(const TrajectoryEstimate& est,
                        const TrajectoryEstimate& gt, double max_dt);

/// Rigid alignment is rotation+translation (no scale); needs >= 3 pairs.
/// Collinear geometry degrades to translation-only with the flag set.
AteResult ate(const PairedSamples& pairs, Align align);
/// `delta` in seconds; throws when no complete window fits.
RteResult rte(const PairedSamples& pairs, double delta);

struct ZMetrics {
  AteResult ate_raw;
  AteResult ate_aligned;  // full 3-D alignment, errors projected to z
  RteResult rte;
};
ZMetrics z_metrics(const PairedSamples& pairs, double rte_delta);

ErrorReport score(const PairedSamples& pairs, double rte_delta = 1.0);

/// |p_z - f(x,y)| histogram over fixed-width bins on [0, 0.25] m after
/// dropping the largest trim_fraction of errors. Unsupported queries count
/// as 0.25 m errors so holes are visible.
Histogram terrain_error_histogram(const terrain::TerrainModel& model,
                                  const std::vector<Vec2>& xy,
                                  const std::vector<double>& z,
                                  double trim_fraction, int bins = 25);

void write_per_frame_errors(const PairedSamples& pairs,
                            const std::string& path);
void write_histogram(const Histogram& hist, const std::string& path);

}  // namespace terralio::eval
