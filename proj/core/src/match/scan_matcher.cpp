#include "terralio/match/scan_matcher.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <set>
#include <stdexcept>

#include "terralio/so3.hpp"

namespace terralio::match {

namespace {

constexpr int kNeighbors = 5;        // edge line fits
constexpr int kPlaneNeighbors = 8;   // plane fits need spread across scan rings

std::int32_t majority_label(const std::vector<std::int32_t>& labels) {
  std::map<std::int32_t, int> counts;
  for (auto l : labels) ++counts[l];
  std::int32_t best = -1;
  int best_n = 0;
  for (const auto& [l, n] : counts)
    if (n > best_n) {
      best = l;
      best_n = n;
    }
  return best;
}

RobotState retract(const RobotState& s, const Eigen::Matrix<double, 6, 1>& d) {
  RobotState out = s;
  out.rotation = s.rotation * so3_exp(d.head<3>());
  reorthonormalize(out.rotation);
  out.translation = s.translation + d.tail<3>();
  return out;
}

}  // namespace

std::vector<Correspondence> build_correspondences(const FeatureCloud& features,
                                                  const RobotState& guess,
                                                  const LocalMap& map,
                                                  const SolverConfig& config) {
  std::vector<Correspondence> out;
  if (map.empty()) return out;
  std::vector<double> dists;
  std::vector<double> fitq;  // out-of-plane eigenvalue; 0 for edges
  std::set<std::pair<std::int64_t, std::int64_t>> ground_cells;

  for (const FeaturePoint& f : features.points) {
    const Vec3 p_world = guess.rotation * f.p + guess.translation;
    if (f.kind == FeatureKind::Ground) {
      if (config.ground_corr_radius > 0.0 &&
          (p_world.head<2>() - guess.translation.head<2>()).norm() >
              config.ground_corr_radius)
        continue;
      if (config.ground_corr_voxel > 0.0) {
        const double v = config.ground_corr_voxel;
        const auto cell = std::make_pair(
            static_cast<std::int64_t>(std::floor(p_world.x() / v)),
            static_cast<std::int64_t>(std::floor(p_world.y() / v)));
        if (!ground_cells.insert(cell).second) continue;
      }
    }

    if (f.kind == FeatureKind::Edge) {
      const auto nn = map.edge_tree().knn(p_world, kNeighbors, config.corr_gate);
      if (nn.size() < kNeighbors) continue;
      Vec3 centroid = Vec3::Zero();
      for (auto id : nn) centroid += map.edge_tree().point(id);
      centroid /= static_cast<double>(nn.size());
      Mat3 scatter = Mat3::Zero();
      std::vector<std::int32_t> labels;
      for (auto id : nn) {
        const Vec3 d = map.edge_tree().point(id) - centroid;
        scatter += d * d.transpose();
        labels.push_back(map.edge_label(id));
      }
      Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
      const Vec3 ev = eig.eigenvalues();  // ascending
      if (ev(2) < config.edge_eig_ratio * std::max(ev(1), 1e-12)) continue;
      if (ev(2) < config.edge_min_extent * config.edge_min_extent) continue;
      Correspondence c;
      c.kind = FeatureKind::Edge;
      c.p_sensor = f.p;
      c.line.point = centroid;
      c.line.direction = eig.eigenvectors().col(2).normalized();
      c.map_label = majority_label(labels);
      // mixed neighbor sets (two nearby columns) still pass the eigenvalue
      // ratio; require every neighbor to actually sit on the fitted line
      bool on_line = true;
      for (auto id : nn)
        if (point_to_line_residual(map.edge_tree().point(id), c.line)
                .value.norm() > config.edge_fit_tol) {
          on_line = false;
          break;
        }
      if (!on_line) continue;
      const double dist = point_to_line_residual(p_world, c.line).value.norm();
      if (dist > config.corr_gate) continue;
      if (config.huber_delta > 0.0 && dist > config.huber_delta)
        c.weight = config.huber_delta / dist;
      dists.push_back(dist);
      fitq.push_back(0.0);
      out.push_back(c);
    } else {
      const auto nn =
          map.planar_tree().knn(p_world, kPlaneNeighbors, config.corr_gate);
      if (nn.size() < kPlaneNeighbors) continue;
      Vec3 centroid = Vec3::Zero();
      for (auto id : nn) centroid += map.planar_tree().point(id);
      centroid /= static_cast<double>(nn.size());
      Mat3 scatter = Mat3::Zero();
      std::vector<std::int32_t> labels;
      for (auto id : nn) {
        const Vec3 d = map.planar_tree().point(id) - centroid;
        scatter += d * d.transpose();
        labels.push_back(map.planar_label(id));
      }
      Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
      // reject corner-spanning or degenerate neighbor sets: a clean plane has
      // one near-zero eigenvalue and decent in-plane spread
      const Vec3 pev = eig.eigenvalues();
      if (pev(1) < config.plane_eig_ratio * pev(0) || pev(1) < 1e-3) continue;
      // near-collinear sets (a single scan ring, or points strung along a
      // box corner) leave the normal direction unconstrained
      if (pev(2) > 50.0 * pev(1)) continue;
      Correspondence c;
      c.kind = FeatureKind::Planar;
      c.p_sensor = f.p;
      c.plane.normal = eig.eigenvectors().col(0).normalized();
      c.plane.offset = -c.plane.normal.dot(centroid);
      c.map_label = majority_label(labels);
      bool flat = true;
      for (auto id : nn)
        if (std::abs(point_to_plane_residual(map.planar_tree().point(id),
                                             c.plane)
                         .value) > config.plane_fit_tol) {
          flat = false;
          break;
        }
      if (!flat) continue;
      const double dist =
          std::abs(point_to_plane_residual(p_world, c.plane).value);
      if (dist > config.corr_gate) continue;
      if (config.huber_delta > 0.0 && dist > config.huber_delta)
        c.weight = config.huber_delta / dist;
      dists.push_back(dist);
      fitq.push_back(pev(0));
      out.push_back(c);
    }
  }

  if (config.trim_ratio > 0.0 && !out.empty()) {
    // adaptive trims against the frame consensus: association distance, and
    // for planes the out-of-plane spread of the neighbor fit. Cross-surface
    // fits pass every absolute gate but stand out on both statistics.
    std::vector<double> sorted = dists;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double cut = std::max(config.trim_ratio * sorted[sorted.size() / 2],
                                config.trim_floor);
    double qcut = std::numeric_limits<double>::infinity();
    std::vector<double> plane_q;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i].kind == FeatureKind::Planar) plane_q.push_back(fitq[i]);
    if (!plane_q.empty()) {
      std::nth_element(plane_q.begin(), plane_q.begin() + plane_q.size() / 2,
                       plane_q.end());
      qcut = std::max(10.0 * plane_q[plane_q.size() / 2], 1e-7);
    }
    std::vector<Correspondence> kept;
    kept.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      if (dists[i] <= cut && fitq[i] <= qcut) kept.push_back(out[i]);
    out = std::move(kept);
  }
  return out;
}

CostEval total_cost(const RobotState& state,
                    const std::vector<Correspondence>& correspondences,
                    const ManifoldInputs& manifold,
                    const SolverConfig& config) {
  Eigen::Index rows = 0;
  for (const auto& c : correspondences)
    rows += (c.kind == FeatureKind::Edge) ? 3 : 1;
  const bool use_manifold = manifold.enabled() && config.lambda_manifold > 0.0;

  CostEval eval;
  eval.jacobian.resize(rows + (use_manifold ? 2 : 0), 6);
  eval.residual.resize(eval.jacobian.rows());
  Eigen::Index r = 0;

  for (const auto& c : correspondences) {
    const Vec3 p_world = state.rotation * c.p_sensor + state.translation;
    // p = R exp(hat(dtheta)) p_s + t + dt
    Eigen::Matrix<double, 3, 6> dp;
    dp.leftCols<3>() = -state.rotation * hat(c.p_sensor);
    dp.rightCols<3>() = Mat3::Identity();
    const double sw = std::sqrt(c.weight);
    if (c.kind == FeatureKind::Edge) {
      const EdgeResidual er = point_to_line_residual(p_world, c.line);
      eval.residual.segment<3>(r) = sw * er.value;
      eval.jacobian.middleRows<3>(r) = sw * er.jacobian * dp;
      r += 3;
      eval.feature_rows += 3;
    } else {
      const PlaneResidual pr = point_to_plane_residual(p_world, c.plane);
      eval.residual(r) = sw * pr.value;
      eval.jacobian.row(r) = sw * pr.jacobian * dp;
      ++r;
      ++eval.feature_rows;
    }
  }

  if (use_manifold) {
    const double sl = std::sqrt(config.lambda_manifold);
    for (const kin::Side side : {kin::Side::Left, kin::Side::Right}) {
      const auto res = kin::manifold_residual(state, *manifold.joints,
                                              *manifold.leg, side,
                                              *manifold.terrain);
      auto& slot = (side == kin::Side::Left) ? eval.manifold_left
                                             : eval.manifold_right;
      if (!res.valid) {
        // unsupported terrain query: residual excluded from the cost
        eval.residual(r) = 0.0;
        eval.jacobian.row(r).setZero();
      } else {
        slot = res.value;
        double w = 1.0;
        if (config.manifold_huber_delta > 0.0 &&
            std::abs(res.value) > config.manifold_huber_delta)
          w = std::sqrt(config.manifold_huber_delta / std::abs(res.value));
        eval.residual(r) = sl * w * res.value;
        eval.jacobian.row(r) =
            sl * w *
            kin::manifold_jacobian(state, *manifold.joints, *manifold.leg,
                                   side, *manifold.terrain);
        ++eval.manifold_rows;
      }
      ++r;
    }
  }

  if (eval.residual.size() == 0 ||
      (eval.feature_rows == 0 && eval.manifold_rows == 0))
    throw std::runtime_error("nothing to optimize");
  eval.cost = eval.residual.squaredNorm();
  return eval;
}

RobotState lm_solve(const RobotState& initial, const FeatureCloud& features,
                    const LocalMap& map, const ManifoldInputs& manifold,
                    const SolverConfig& config, SolveReport* report) {
  SolveReport local;
  SolveReport& rep = report ? *report : local;
  rep = SolveReport{};

  RobotState state = initial;
  double mu = config.lm_init_damping;
  int rejects = 0;

  for (int outer = 0; outer < config.lm_max_iters; ++outer) {
    ++rep.outer_iterations;
    const auto corr = build_correspondences(features, state, map, config);
    rep.correspondence_count = corr.size();
    if (static_cast<int>(corr.size()) < config.min_correspondences) {
      rep.degenerate = true;
      break;
    }
    CostEval eval = total_cost(state, corr, manifold, config);
    rep.cost_trace.push_back(eval.cost);
    rep.final_cost = eval.cost;
    rep.manifold_left = eval.manifold_left;
    rep.manifold_right = eval.manifold_right;

    {
      // degeneracy probe on the feature-only normal matrix
      const auto Jf = eval.jacobian.topRows(eval.feature_rows);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(
          Jf.transpose() * Jf);
      rep.smallest_feature_eigenvalue = eig.eigenvalues()(0);
      if (rep.smallest_feature_eigenvalue < config.degeneracy_eig_min)
        rep.degenerate = true;
    }

    bool improved = false;
    bool local_converged = false;
    double moved = 0.0;  // accumulated step size since this association
    for (int inner = 0; inner < config.lm_max_inner; ++inner) {
      const Eigen::Matrix<double, 6, 6> A =
          eval.jacobian.transpose() * eval.jacobian;
      const Eigen::Matrix<double, 6, 1> g =
          eval.jacobian.transpose() * eval.residual;
      Eigen::Matrix<double, 6, 6> damped = A;
      damped.diagonal() += mu * A.diagonal().cwiseMax(1e-12);
      // absolute floor: pins near-null directions to the prediction instead
      // of letting relative damping amplify numerical noise along them
      damped.diagonal().array() += 1e-3;
      const Eigen::Matrix<double, 6, 1> delta = -damped.ldlt().solve(g);
      if (!delta.allFinite()) {
        rep.failed = true;
        return initial;
      }
      if (delta.norm() < config.tol_dstate) {
        local_converged = true;
        break;
      }
      const RobotState candidate = retract(state, delta);
      CostEval cand_eval = total_cost(candidate, corr, manifold, config);
      if (cand_eval.cost < eval.cost) {
        const double dcost = eval.cost - cand_eval.cost;
        state = candidate;
        eval = std::move(cand_eval);
        rep.cost_trace.push_back(eval.cost);
        rep.final_cost = eval.cost;
        rep.manifold_left = eval.manifold_left;
        rep.manifold_right = eval.manifold_right;
        mu = std::max(mu * 0.1, 1e-12);
        ++rep.accepted_steps;
        improved = true;
        rejects = 0;
        moved += delta.norm();
        if (dcost < config.tol_dcost || delta.norm() < config.tol_dstate) {
          local_converged = true;
          break;
        }
      } else {
        mu *= 10.0;
        if (++rejects > config.lm_max_rejects) {
          if (rep.accepted_steps == 0) {
            rep.failed = true;
            return initial;
          }
          local_converged = true;
          break;
        }
      }
    }
    // converged without moving since association: re-associating at this
    // state would reproduce the same correspondences, so we are done
    if (local_converged && moved < 1e-9) {
      rep.converged = true;
      break;
    }
    if (!improved && !local_converged && rep.accepted_steps > 0) {
      rep.converged = true;
      break;
    }
    if (rep.degenerate && !improved) break;
  }
  return state;
}

}  // namespace terralio::match
