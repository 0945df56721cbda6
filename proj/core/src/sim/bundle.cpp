#include <Eigen/Geometry>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "terralio/io/csv.hpp"
#include "terralio/sim/simulator.hpp"

namespace terralio::sim {

namespace fs = std::filesystem;

namespace {

std::string scan_name(std::size_t i) {
  std::ostringstream os;
  os.width(6);
  os.fill('0');
  os << i;
  return os.str() + ".csv";
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
}

}  // namespace

void save_bundle(const SequenceBundle& bundle, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root / "scans");

  std::vector<std::vector<double>> rows;
  for (const TimedPose& p : bundle.gt_poses) {
    const Eigen::Quaterniond q(p.rotation);
    rows.push_back({p.timestamp, p.translation.x(), p.translation.y(),
                    p.translation.z(), q.w(), q.x(), q.y(), q.z()});
  }
  io::write_csv((root / "traj_gt.csv").string(),
                {"t", "x", "y", "z", "qw", "qx", "qy", "qz"}, rows);

  rows.clear();
  for (const ImuSample& s : bundle.imu)
    rows.push_back({s.timestamp, s.accel.x(), s.accel.y(), s.accel.z(),
                    s.gyro.x(), s.gyro.y(), s.gyro.z()});
  io::write_csv((root / "imu.csv").string(),
                {"t", "ax", "ay", "az", "gx", "gy", "gz"}, rows);

  std::vector<std::string> jcols = {"t"};
  const std::size_t nq =
      bundle.joints.empty() ? 0 : bundle.joints.front().angles.size();
  for (std::size_t i = 0; i < nq; ++i) jcols.push_back("q" + std::to_string(i));
  rows.clear();
  for (const JointConfig& jc : bundle.joints) {
    std::vector<double> row = {jc.timestamp};
    row.insert(row.end(), jc.angles.begin(), jc.angles.end());
    rows.push_back(std::move(row));
  }
  io::write_csv((root / "joints.csv").string(), jcols, rows);

  for (std::size_t i = 0; i < bundle.scans.size(); ++i) {
    rows.clear();
    for (const FeaturePoint& f : bundle.scans[i].points)
      rows.push_back({f.p.x(), f.p.y(), f.p.z(),
                      static_cast<double>(static_cast<int>(f.kind)),
                      static_cast<double>(f.label)});
    io::write_csv((root / "scans" / scan_name(i)).string(),
                  {"x", "y", "z", "kind", "label"}, rows);
  }

  spit(root / "scene.json", bundle.scene.to_json());
  spit(root / "robot.txt", bundle.robot.serialize());
  spit(root / "seed", std::to_string(bundle.seed) + "\n");
}

SequenceBundle load_bundle(const std::string& dir) {
  const fs::path root(dir);
  SequenceBundle bundle;
  bundle.scene = Scene::from_json(slurp(root / "scene.json"));
  bundle.robot = kin::LegModel::parse(slurp(root / "robot.txt"));
  bundle.seed = std::stoull(slurp(root / "seed"));
  std::size_t scan_count = 0;
  while (fs::exists(root / "scans" / scan_name(scan_count))) ++scan_count;

  const io::CsvTable traj = io::read_csv((root / "traj_gt.csv").string());
  for (const auto& r : traj.rows) {
    TimedPose p;
    p.timestamp = r[0];
    p.translation = Vec3(r[1], r[2], r[3]);
    p.rotation = Eigen::Quaterniond(r[4], r[5], r[6], r[7])
                     .normalized()
                     .toRotationMatrix();
    bundle.gt_poses.push_back(p);
  }

  const io::CsvTable imu = io::read_csv((root / "imu.csv").string());
  for (const auto& r : imu.rows) {
    ImuSample s;
    s.timestamp = r[0];
    s.accel = Vec3(r[1], r[2], r[3]);
    s.gyro = Vec3(r[4], r[5], r[6]);
    bundle.imu.push_back(s);
  }

  const io::CsvTable joints = io::read_csv((root / "joints.csv").string());
  for (const auto& r : joints.rows) {
    JointConfig jc;
    jc.timestamp = r[0];
    jc.angles.assign(r.begin() + 1, r.end());
    bundle.joints.push_back(jc);
  }

  for (std::size_t i = 0; i < scan_count; ++i) {
    const io::CsvTable scan =
        io::read_csv((root / "scans" / scan_name(i)).string());
    FeatureCloud cloud;
    cloud.timestamp = i < bundle.gt_poses.size()
                          ? bundle.gt_poses[i].timestamp
                          : static_cast<double>(i) / kScanRate;
    for (const auto& r : scan.rows)
      cloud.points.push_back({Vec3(r[0], r[1], r[2]),
                              static_cast<FeatureKind>(static_cast<int>(r[3])),
                              static_cast<std::int32_t>(r[4])});
    bundle.scans.push_back(std::move(cloud));
  }
  return bundle;
}

}  // namespace terralio::sim
