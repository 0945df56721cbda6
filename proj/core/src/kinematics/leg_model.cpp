#include "terralio/kinematics/leg_model.hpp"

#include <Eigen/Geometry>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace terralio::kin {

Vec3 chain_end_position(const LegChain& chain, std::span<const double> q) {
  if (static_cast<int>(q.size()) < chain.joint_count())
    throw std::invalid_argument("too few joint angles for chain");
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  std::size_t qi = 0;
  for (const Link& link : chain.links) {
    T.translate(link.offset);
    if (link.revolute)
      T.rotate(Eigen::AngleAxisd(q[qi++], link.axis.normalized()));
  }
  return T.translation();
}

Vec3 wheel_center_world(const RobotState& state, const JointConfig& joints,
                        const LegModel& leg, Side side) {
  const LegChain& chain = leg.chain(side);
  const int off = leg.joint_offset(side);
  if (static_cast<int>(joints.angles.size()) < leg.joint_count())
    throw std::invalid_argument("joint config does not match leg model");
  const std::span<const double> q(joints.angles.data() + off,
                                  static_cast<std::size_t>(chain.joint_count()));
  return state.rotation * chain_end_position(chain, q) + state.translation;
}

LegModel LegModel::parse(const std::string& text) {
  LegModel model;
  LegChain* chain = nullptr;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    auto fail = [&](const std::string& msg) {
      throw std::runtime_error("robot description line " +
                               std::to_string(lineno) + ": " + msg);
    };
    if (tok == "wheel_radius") {
      if (!(ls >> model.wheel_radius) || model.wheel_radius <= 0.0)
        fail("wheel_radius must be a positive number");
    } else if (tok == "leg") {
      std::string side;
      ls >> side;
      if (side == "left")
        chain = &model.left;
      else if (side == "right")
        chain = &model.right;
      else
        fail("leg must be left or right");
    } else if (tok == "link") {
      if (!chain) fail("link record before any leg record");
      Link link;
      std::string key;
      ls >> link.name;
      while (ls >> key) {
        if (key == "parent") {
          ls >> link.parent;
        } else if (key == "offset") {
          ls >> link.offset.x() >> link.offset.y() >> link.offset.z();
        } else if (key == "axis") {
          ls >> link.axis.x() >> link.axis.y() >> link.axis.z();
        } else if (key == "type") {
          std::string t;
          ls >> t;
          if (t == "revolute")
            link.revolute = true;
          else if (t == "fixed")
            link.revolute = false;
          else
            fail("link type must be revolute or fixed");
        } else {
          fail("unknown link key '" + key + "'");
        }
      }
      if (ls.bad() || !link.offset.allFinite()) fail("malformed link record");
      if (link.revolute && link.axis.norm() < 1e-12)
        fail("revolute link needs a nonzero axis");
      const std::string expected =
          chain->links.empty() ? "base" : chain->links.back().name;
      if (!link.parent.empty() && link.parent != expected)
        fail("link parent must chain from '" + expected + "'");
      chain->links.push_back(link);
    } else {
      fail("unknown record '" + tok + "'");
    }
  }
  if (model.left.links.empty() || model.right.links.empty())
    throw std::runtime_error("robot description needs both legs");
  return model;
}

LegModel LegModel::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string LegModel::serialize() const {
  std::ostringstream out;
  out << "wheel_radius " << wheel_radius << "\n";
  auto dump = [&](const char* side, const LegChain& chain) {
    out << "leg " << side << "\n";
    std::string parent = "base";
    for (const Link& l : chain.links) {
      out << "link " << l.name << " parent " << parent << " offset "
          << l.offset.x() << ' ' << l.offset.y() << ' ' << l.offset.z()
          << " axis " << l.axis.x() << ' ' << l.axis.y() << ' ' << l.axis.z()
          << " type " << (l.revolute ? "revolute" : "fixed") << "\n";
      parent = l.name;
    }
  };
  dump("left", left);
  dump("right", right);
  return out.str();
}

}  // namespace terralio::kin
