#include "terralio/sim/scene.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace terralio::sim {

using nlohmann::json;

kin::LegModel default_robot() {
  kin::LegModel robot;
  robot.wheel_radius = 0.08;
  auto make_chain = [](double y_sign) {
    kin::LegChain chain;
    chain.links.push_back(
        {"hip", "base", Vec3(0.0, y_sign * 0.12, -0.08), Vec3::UnitY(), true});
    chain.links.push_back(
        {"knee", "hip", Vec3(0.0, 0.0, -0.24), Vec3::UnitY(), true});
    chain.links.push_back(
        {"wheel", "knee", Vec3(0.0, 0.0, -0.24), Vec3::UnitY(), false});
    return chain;
  };
  robot.left = make_chain(1.0);
  robot.right = make_chain(-1.0);
  return robot;
}

namespace {

std::int32_t add_box(Scene& scene, double cx, double cy, double sx, double sy,
                     double height, std::int32_t label) {
  const double ground = scene.terrain.height({cx, cy});
  Box b;
  b.min = Vec3(cx - 0.5 * sx, cy - 0.5 * sy, ground - 0.05);
  b.max = Vec3(cx + 0.5 * sx, cy + 0.5 * sy, ground + height);
  b.label = label;
  scene.boxes.push_back(b);
  return label + 1;
}

std::int32_t add_pole(Scene& scene, double x, double y, double height,
                      std::int32_t label) {
  scene.poles.push_back({{x, y}, 0.04, height, label});
  return label + 1;
}

// Boxes, poles and low platforms alternating along both sides of a straight
// corridor. Platform and box tops sit below the sensor so their horizontal
// faces are visible and anchor z during matching.
std::int32_t dress_corridor(Scene& scene, double x_begin, double x_end,
                            double y_off, std::int32_t label) {
  int slot = 0;
  for (double x = x_begin; x <= x_end + 1e-9; x += 2.0) {
    for (double s : {-1.0, 1.0}) {
      switch (slot % 3) {
        case 0:
          label = add_box(scene, x, s * y_off, 0.5, 0.4, 0.6, label);
          break;
        case 1:
          label = add_pole(scene, x, s * (y_off + 0.4), 1.6, label);
          break;
        default:  // low platform, mostly top face
          label = add_box(scene, x, s * (y_off + 0.2), 1.0, 0.8, 0.18, label);
          break;
      }
    }
    ++slot;
  }
  return label;
}

Scene scene_flat() {
  Scene s;
  s.name = "flat";
  s.terrain = TerrainSpec::flat({{-3.0, -6.0}, {24.0, 6.0}});
  s.profile.waypoints = {{0.0, 0.0}, {20.0, 0.0}};
  s.terrain_roi = {{-0.6, -0.6}, {20.6, 0.6}};
  dress_corridor(s, -1.0, 21.0, 1.4, 1);
  return s;  // noiseless by default
}

Scene scene_staircase(bool sparse) {
  Scene s;
  s.name = sparse ? "staircase_sparse" : "staircase";
  s.terrain = TerrainSpec::staircase(0.08, 0.5, 10, 3.0, {{-3.0, -6.0},
                                                          {16.0, 6.0}});
  s.profile.waypoints = {{0.0, 0.0}, {10.0, 0.0}};
  s.profile.jolt_amplitude = 0.025;
  s.terrain_roi = {{2.5, -0.55}, {8.8, 0.55}};
  s.noise.lidar_sigma = 0.008;
  s.noise.imu_accel_sigma = 0.02;
  s.noise.imu_gyro_sigma = 0.002;
  s.noise.gyro_bias = Vec3(0.0008, -0.0012, 0.0005);
  if (sparse) {
    // Tall featureless walls: vertical faces and vertical edges carry no
    // height information, and the tops stay outside the reduced range.
    s.scan.max_range = 10.0;
    s.noise.accel_bias = Vec3(0.015, -0.01, 0.06);
    std::int32_t label = 1;
    for (double y : {-2.4, 2.4}) {
      Box wall;
      wall.min = Vec3(-2.5, y - 0.15, -0.2);
      wall.max = Vec3(14.0, y + 0.15, 5.0);
      wall.label = label++;
      s.boxes.push_back(wall);
    }
    label = add_pole(s, 1.5, -1.2, 4.5, label);
    label = add_pole(s, 5.0, 1.2, 4.5, label);
    add_pole(s, 8.5, -1.2, 4.5, label);
  } else {
    s.noise.accel_bias = Vec3(0.015, -0.01, 0.02);
    dress_corridor(s, -1.0, 11.0, 1.4, 1);
  }
  return s;
}

Scene scene_hill() {
  Scene s;
  s.name = "hill";
  s.terrain = TerrainSpec::hill(0.4, 6.0, 2.0, {{-3.0, -6.0}, {14.0, 6.0}});
  s.profile.waypoints = {{0.0, 0.0}, {10.0, 0.0}};
  s.terrain_roi = {{1.5, -0.55}, {8.5, 0.55}};
  s.noise.lidar_sigma = 0.008;
  s.noise.imu_accel_sigma = 0.02;
  s.noise.imu_gyro_sigma = 0.002;
  s.noise.accel_bias = Vec3(0.01, 0.012, -0.015);
  s.noise.gyro_bias = Vec3(-0.0006, 0.001, 0.0008);
  dress_corridor(s, -1.0, 11.0, 1.4, 1);
  return s;
}

Scene scene_garden() {
  Scene s;
  s.name = "garden";
  const Rect extent{{-3.0, -6.0}, {14.0, 6.0}};
  std::vector<TerrainSpec> parts;
  parts.push_back(TerrainSpec::ramp(0.04, 0.0, extent));
  parts.push_back(TerrainSpec::hill(0.25, 8.0, 1.0, extent));
  s.terrain = TerrainSpec::composite(std::move(parts), extent);
  s.profile.waypoints = {{0.0, 0.0}, {6.0, 0.0}, {9.0, 1.5}};
  s.terrain_roi = {{-0.6, -0.8}, {9.6, 2.2}};
  s.noise.lidar_sigma = 0.008;
  s.noise.imu_accel_sigma = 0.02;
  s.noise.imu_gyro_sigma = 0.002;
  s.noise.accel_bias = Vec3(-0.012, 0.008, 0.018);
  s.noise.gyro_bias = Vec3(0.0009, 0.0004, -0.0007);
  std::int32_t label = dress_corridor(s, -1.0, 9.0, 1.8, 1);
  label = add_box(s, 7.5, 3.2, 0.6, 0.5, 1.0, label);
  add_pole(s, 10.5, 1.5, 1.8, label);
  return s;
}

}  // namespace

std::vector<std::string> stock_scene_names() {
  return {"flat", "staircase", "staircase_sparse", "hill", "garden"};
}

Scene stock_scene(const std::string& name) {
  if (name == "flat") return scene_flat();
  if (name == "staircase") return scene_staircase(false);
  if (name == "staircase_sparse") return scene_staircase(true);
  if (name == "hill") return scene_hill();
  if (name == "garden") return scene_garden();
  throw std::invalid_argument("unknown stock scene: " + name);
}

namespace {

json vec3_to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec3_from_json(const json& j) {
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
json rect_to_json(const Rect& r) {
  return {{"min", {r.min.x(), r.min.y()}}, {"max", {r.max.x(), r.max.y()}}};
}
Rect rect_from_json(const json& j) {
  return {{j["min"][0].get<double>(), j["min"][1].get<double>()},
          {j["max"][0].get<double>(), j["max"][1].get<double>()}};
}

}  // namespace

std::string Scene::to_json() const {
  json j;
  j["name"] = name;
  j["terrain"] = json::parse(terrain.to_json());
  j["terrain_roi"] = rect_to_json(terrain_roi);

  json boxes_j = json::array();
  for (const Box& b : boxes)
    boxes_j.push_back({{"min", vec3_to_json(b.min)},
                       {"max", vec3_to_json(b.max)},
                       {"label", b.label}});
  j["boxes"] = boxes_j;

  json poles_j = json::array();
  for (const Pole& p : poles)
    poles_j.push_back({{"xy", {p.xy.x(), p.xy.y()}},
                       {"radius", p.radius},
                       {"height", p.height},
                       {"label", p.label}});
  j["poles"] = poles_j;

  json wps = json::array();
  for (const Vec2& w : profile.waypoints) wps.push_back({w.x(), w.y()});
  j["profile"] = {{"waypoints", wps},
                  {"speed", profile.speed},
                  {"ride_height", profile.ride_height},
                  {"smooth_window", profile.smooth_window},
                  {"jolt_amplitude", profile.jolt_amplitude},
                  {"jolt_decay", profile.jolt_decay},
                  {"jolt_freq", profile.jolt_freq}};

  j["noise"] = {{"lidar_sigma", noise.lidar_sigma},
                {"imu_accel_sigma", noise.imu_accel_sigma},
                {"imu_gyro_sigma", noise.imu_gyro_sigma},
                {"accel_bias", vec3_to_json(noise.accel_bias)},
                {"gyro_bias", vec3_to_json(noise.gyro_bias)}};

  j["scan"] = {{"azimuth_steps", scan.azimuth_steps},
               {"elevation_steps", scan.elevation_steps},
               {"fov_up", scan.fov_up},
               {"fov_down", scan.fov_down},
               {"max_range", scan.max_range},
               {"min_range", scan.min_range},
               {"sensor_offset", vec3_to_json(scan.sensor_offset)},
               {"edge_sample_step", scan.edge_sample_step}};
  return j.dump(2);
}

Scene Scene::from_json(const std::string& text) {
  const json j = json::parse(text);
  Scene s;
  s.name = j.value("name", std::string("custom"));
  s.terrain = TerrainSpec::from_json(j.at("terrain").dump());
  s.terrain_roi = rect_from_json(j.at("terrain_roi"));

  for (const auto& b : j.value("boxes", json::array()))
    s.boxes.push_back({vec3_from_json(b.at("min")), vec3_from_json(b.at("max")),
                       b.value("label", 1)});
  for (const auto& p : j.value("poles", json::array()))
    s.poles.push_back({{p.at("xy")[0].get<double>(),
                        p.at("xy")[1].get<double>()},
                       p.value("radius", 0.05),
                       p.value("height", 2.0),
                       p.value("label", 1)});

  const json& pj = j.at("profile");
  for (const auto& w : pj.at("waypoints"))
    s.profile.waypoints.push_back({w[0].get<double>(), w[1].get<double>()});
  s.profile.speed = pj.value("speed", 0.8);
  s.profile.ride_height = pj.value("ride_height", 0.5);
  s.profile.smooth_window = pj.value("smooth_window", 0.6);
  s.profile.jolt_amplitude = pj.value("jolt_amplitude", 0.0);
  s.profile.jolt_decay = pj.value("jolt_decay", 0.15);
  s.profile.jolt_freq = pj.value("jolt_freq", 9.0);

  if (j.contains("noise")) {
    const json& nj = j["noise"];
    s.noise.lidar_sigma = nj.value("lidar_sigma", 0.0);
    s.noise.imu_accel_sigma = nj.value("imu_accel_sigma", 0.0);
    s.noise.imu_gyro_sigma = nj.value("imu_gyro_sigma", 0.0);
    if (nj.contains("accel_bias"))
      s.noise.accel_bias = vec3_from_json(nj["accel_bias"]);
    if (nj.contains("gyro_bias"))
      s.noise.gyro_bias = vec3_from_json(nj["gyro_bias"]);
  }
  if (j.contains("scan")) {
    const json& sj = j["scan"];
    s.scan.azimuth_steps = sj.value("azimuth_steps", 180);
    s.scan.elevation_steps = sj.value("elevation_steps", 14);
    s.scan.fov_up = sj.value("fov_up", 0.35);
    s.scan.fov_down = sj.value("fov_down", -0.85);
    s.scan.max_range = sj.value("max_range", 20.0);
    s.scan.min_range = sj.value("min_range", 0.3);
    if (sj.contains("sensor_offset"))
      s.scan.sensor_offset = vec3_from_json(sj["sensor_offset"]);
    s.scan.edge_sample_step = sj.value("edge_sample_step", 0.08);
  }
  return s;
}

}  // namespace terralio::sim
