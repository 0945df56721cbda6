#include "terralio/eval/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "terralio/io/csv.hpp"

namespace terralio::eval {

void TrajectoryEstimate::validate() const {
  if (timestamps.size() != positions.size())
    throw std::invalid_argument("timestamp/position count mismatch");
  if (timestamps.empty()) throw std::invalid_argument("empty trajectory");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] <= timestamps[i - 1])
      throw std::invalid_argument("timestamps must be strictly increasing");
}

PairedSamples associate(const TrajectoryEstimate& est,
                        const TrajectoryEstimate& gt, double max_dt) {
  est.validate();
  gt.validate();
  PairedSamples out;
  std::vector<bool> gt_used(gt.timestamps.size(), false);
  std::size_t j = 0;
  for (std::size_t i = 0; i < est.timestamps.size(); ++i) {
    const double t = est.timestamps[i];
    while (j + 1 < gt.timestamps.size() &&
           std::abs(gt.timestamps[j + 1] - t) <= std::abs(gt.timestamps[j] - t))
      ++j;
    if (std::abs(gt.timestamps[j] - t) <= max_dt) {
      out.timestamps.push_back(t);
      out.est.push_back(est.positions[i]);
      out.gt.push_back(gt.positions[j]);
      gt_used[j] = true;
    } else {
      ++out.dropped_est;
    }
  }
  for (const bool used : gt_used) out.dropped_gt += !used;
  if (out.est.empty())
    throw std::runtime_error("no trajectory pairs within max_dt");
  return out;
}

namespace {

struct RigidFit {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  bool degenerate = false;
};

// Least-squares rotation+translation (no scale) mapping est onto gt.
RigidFit fit_rigid(const std::vector<Vec3>& est, const std::vector<Vec3>& gt) {
  RigidFit fit;
  const auto n = static_cast<double>(est.size());
  Vec3 mu_e = Vec3::Zero(), mu_g = Vec3::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) {
    mu_e += est[i];
    mu_g += gt[i];
  }
  mu_e /= n;
  mu_g /= n;
  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < est.size(); ++i)
    cov += (gt[i] - mu_g) * (est[i] - mu_e).transpose();
  cov /= n;

  const Eigen::JacobiSVD<Mat3> svd(cov,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // collinear (or coincident) clouds leave the rotation underdetermined
  if (est.size() < 3 || sv(1) < 1e-12 * std::max(sv(0), 1e-300)) {
    fit.degenerate = true;
    fit.t = mu_g - mu_e;
    return fit;
  }
  Mat3 S = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
    S(2, 2) = -1.0;
  fit.R = svd.matrixU() * S * svd.matrixV().transpose();
  fit.t = mu_g - fit.R * mu_e;
  return fit;
}

AteResult ate_impl(const PairedSamples& pairs, Align align, bool z_only) {
  if (pairs.size() == 0) throw std::invalid_argument("no pairs");
  AteResult res;
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  if (align == Align::Rigid) {
    if (pairs.size() < 3)
      throw std::invalid_argument("rigid alignment needs >= 3 pairs");
    const RigidFit fit = fit_rigid(pairs.est, pairs.gt);
    R = fit.R;
    t = fit.t;
    res.alignment_degenerate = fit.degenerate;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vec3 d = R * pairs.est[i] + t - pairs.gt[i];
    const double e = z_only ? std::abs(d.z()) : d.norm();
    sq += e * e;
    res.max = std::max(res.max, e);
  }
  res.rmse = std::sqrt(sq / static_cast<double>(pairs.size()));
  return res;
}

RteResult rte_impl(const PairedSamples& pairs, double delta, bool z_only) {
  if (delta <= 0.0) throw std::invalid_argument("rte delta must be positive");
  RteResult res;
  double sq = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    while (j < pairs.size() &&
           pairs.timestamps[j] < pairs.timestamps[i] + delta - 1e-9)
      ++j;
    if (j >= pairs.size()) break;
    const Vec3 d = (pairs.est[j] - pairs.est[i]) - (pairs.gt[j] - pairs.gt[i]);
    const double e = z_only ? std::abs(d.z()) : d.norm();
    sq += e * e;
    res.max = std::max(res.max, e);
    ++res.windows;
  }
  if (res.windows == 0)
    throw std::runtime_error("trajectory shorter than the rte window");
  res.rmse = std::sqrt(sq / static_cast<double>(res.windows));
  return res;
}

}  // namespace

AteResult ate(const PairedSamples& pairs, Align align) {
  return ate_impl(pairs, align, false);
}

RteResult rte(const PairedSamples& pairs, double delta) {
  return rte_impl(pairs, delta, false);
}

ZMetrics z_metrics(const PairedSamples& pairs, double rte_delta) {
  ZMetrics z;
  z.ate_raw = ate_impl(pairs, Align::None, true);
  z.ate_aligned = ate_impl(pairs, Align::Rigid, true);
  z.rte = rte_impl(pairs, rte_delta, true);
  return z;
}

ErrorReport score(const PairedSamples& pairs, double rte_delta) {
  ErrorReport r;
  r.pair_count = pairs.size();
  r.ate_raw = ate(pairs, Align::None);
  r.ate_aligned = ate(pairs, Align::Rigid);
  r.rte = rte(pairs, rte_delta);
  const ZMetrics z = z_metrics(pairs, rte_delta);
  r.z_ate_raw = z.ate_raw;
  r.z_ate_aligned = z.ate_aligned;
  r.z_rte = z.rte;
  return r;
}

std::string ErrorReport::table() const {
  std::ostringstream os;
  auto row = [&](const char* name, double rmse, double max) {
    os << name << "  rmse " << rmse << "  max " << max << "\n";
  };
  os << "pairs: " << pair_count << "\n";
  row("ate (raw)     ", ate_raw.rmse, ate_raw.max);
  row("ate (aligned) ", ate_aligned.rmse, ate_aligned.max);
  row("rte           ", rte.rmse, rte.max);
  row("z ate (raw)   ", z_ate_raw.rmse, z_ate_raw.max);
  row("z ate (align) ", z_ate_aligned.rmse, z_ate_aligned.max);
  row("z rte         ", z_rte.rmse, z_rte.max);
  if (ate_aligned.alignment_degenerate)
    os << "warning: collinear trajectory, translation-only alignment\n";
  return os.str();
}

std::size_t Histogram::total() const {
  std::size_t n = overflow;
  for (const std::size_t c : counts) n += c;
  return n;
}

double Histogram::fraction_below(double threshold) const {
  const std::size_t n = total();
  if (n == 0) return 0.0;
  std::size_t below = 0;
  for (std::size_t b = 0; b < counts.size(); ++b)
    if (edges[b + 1] <= threshold + 1e-12) below += counts[b];
  return static_cast<double>(below) / static_cast<double>(n);
}

Histogram terrain_error_histogram(const terrain::TerrainModel& model,
                                  const std::vector<Vec2>& xy,
                                  const std::vector<double>& z,
                                  double trim_fraction, int bins) {
  if (xy.empty() || xy.size() != z.size())
    throw std::invalid_argument("histogram needs matched non-empty samples");
  if (trim_fraction < 0.0 || trim_fraction >= 1.0)
    throw std::invalid_argument("trim_fraction must be in [0, 1)");

  constexpr double kRange = 0.25;
  std::vector<double> errors(xy.size());
  for (std::size_t i = 0; i < xy.size(); ++i) {
    const auto q = model.predict_height(xy[i]);
    errors[i] = q.supported ? std::abs(z[i] - q.z) : kRange;
  }
  std::sort(errors.begin(), errors.end());
  const auto keep = xy.size() -
                    static_cast<std::size_t>(
                        std::floor(trim_fraction * static_cast<double>(xy.size())));

  Histogram h;
  h.trimmed = xy.size() - keep;
  h.edges.resize(bins + 1);
  h.counts.assign(bins, 0);
  for (int b = 0; b <= bins; ++b) h.edges[b] = kRange * b / bins;
  for (std::size_t i = 0; i < keep; ++i) {
    const auto b = static_cast<int>(std::floor(errors[i] / kRange * bins));
    if (b >= bins)
      ++h.overflow;
    else
      ++h.counts[b];
  }
  return h;
}

void write_per_frame_errors(const PairedSamples& pairs,
                            const std::string& path) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vec3 d = pairs.est[i] - pairs.gt[i];
    rows.push_back({pairs.timestamps[i], d.norm(), std::abs(d.z())});
  }
  io::write_csv(path, {"t", "err", "err_z"}, rows);
}

void write_histogram(const Histogram& hist, const std::string& path) {
  std::vector<std::vector<double>> rows;
  for (std::size_t b = 0; b < hist.counts.size(); ++b)
    rows.push_back({hist.edges[b], hist.edges[b + 1],
                    static_cast<double>(hist.counts[b])});
  io::write_csv(path, {"bin_lo", "bin_hi", "count"}, rows);
}

}  // namespace terralio::eval
