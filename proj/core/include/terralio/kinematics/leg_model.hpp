#pragma once

#include <span>
#include <string>
#include <vector>

#include "terralio/types.hpp"

namespace terralio::kin {

enum class Side { Left, Right };

struct Link {
  std::string name;
  std::string parent;
  Vec3 offset = Vec3::Zero();  // translation from parent frame, m
  Vec3 axis = Vec3::UnitY();   // joint axis in the link frame
  bool revolute = true;
};

struct LegChain {
  std::vector<Link> links;
  int joint_count() const {
    int n = 0;
    for (const auto& l : links) n += l.revolute;
    return n;
  }
};

/// Two-leg kinematic description plus wheel radius. Joint angle vectors are
/// ordered left-leg revolute joints first, then right-leg.
struct LegModel {
  LegChain left;
  LegChain right;
  double wheel_radius = 0.1;

  int joint_count() const { return left.joint_count() + right.joint_count(); }
  const LegChain& chain(Side s) const { return s == Side::Left ? left : right; }
  /// First joint index of the side within a JointConfig angle vector.
  int joint_offset(Side s) const {
    return s == Side::Left ? 0 : left.joint_count();
  }

  static LegModel parse(const std::string& text);
  static LegModel from_file(const std::string& path);
  std::string serialize() const;
};

/// Chain end position in the base frame: each link translates by its offset,
/// then a revolute link rotates the remainder of the chain about its axis.
Vec3 chain_end_position(const LegChain& chain, std::span<const double> q);

/// Wheel center in the world frame: R * h(q) + t.
Vec3 wheel_center_world(const RobotState& state, const JointConfig& joints,
                        const LegModel& leg, Side side);

/// Contact approximated directly below the wheel center.
inline Vec3 contact_point(const Vec3& wheel_center, double wheel_radius) {
  return wheel_center - Vec3(0.0, 0.0, wheel_radius);
}

}  // namespace terralio::kin
