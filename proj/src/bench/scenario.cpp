#include "crowdnav/bench/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "crowdnav/common/errors.hpp"

namespace crowdnav::bench {

using nlohmann::json;

namespace {

constexpr double kSpawnSeparation = 1.0;  // between pedestrians [m]
constexpr double kSpawnRobotClear = 1.5;  // from the robot start [m]
constexpr int kSpawnAttempts = 200;

Vec2 vec_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ScenarioInvalid(what + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Vec2> path_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw ScenarioInvalid(what + ": expected a list of points");
  std::vector<Vec2> out;
  for (const auto& p : j) out.push_back(vec_from(p, what));
  return out;
}

json to_j(const Vec2& v) { return json::array({v.x(), v.y()}); }

json to_j(const std::vector<Vec2>& path) {
  json a = json::array();
  for (const auto& p : path) a.push_back(to_j(p));
  return a;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    s.name = get_or<std::string>(j, "name", "scenario");
    s.time_limit = get_or<double>(j, "time_limit", 60.0);
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();

    const json& m = j.at("map");
    s.map.origin = vec_from(m.at("origin"), "map.origin");
    s.map.resolution = m.at("resolution").get<double>();
    s.map.width = m.at("width").get<int>();
    s.map.height = m.at("height").get<int>();
    for (const auto& b : get_or<json>(m, "boxes", json::array())) {
      if (!b.is_array() || b.size() != 4) throw ScenarioInvalid("map.boxes: expected [x0, y0, x1, y1]");
      s.map.boxes.push_back({Vec2(b[0].get<double>(), b[1].get<double>()),
                             Vec2(b[2].get<double>(), b[3].get<double>())});
    }

    for (const auto& p : get_or<json>(j, "pedestrians", json::array())) {
      PedSpec ps;
      ps.route = path_from(p.at("route"), "pedestrians.route");
      ps.radius = get_or<double>(p, "radius", 0.3);
      if (p.contains("speed")) ps.speed = p.at("speed").get<double>();
      if (p.contains("pos")) ps.pos = vec_from(p.at("pos"), "pedestrians.pos");
      s.pedestrians.push_back(std::move(ps));
    }

    const json robot = get_or<json>(j, "robot", json::object());
    s.robot_radius = get_or<double>(robot, "radius", 0.4);
    if (robot.contains("start")) s.start = vec_from(robot.at("start"), "robot.start");
    if (robot.contains("goal")) s.goal = vec_from(robot.at("goal"), "robot.goal");
    if (robot.contains("yaw")) s.start_yaw = robot.at("yaw").get<double>();
    if (j.contains("global_path")) s.global_path = path_from(j.at("global_path"), "global_path");
    s.peds_react_to_robot = get_or<bool>(j, "peds_react_to_robot", false);

    if (j.contains("randomize")) {
      RandomEndpoints r;
      r.endpoints = path_from(j.at("randomize").at("endpoints"), "randomize.endpoints");
      r.junction = vec_from(j.at("randomize").at("junction"), "randomize.junction");
      s.randomize = std::move(r);
    }
  } catch (const json::exception& e) {
    throw ScenarioInvalid(std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioInvalid("cannot open scenario " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ScenarioInvalid(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["time_limit"] = s.time_limit;
  j["seeds"] = s.seeds;
  json boxes = json::array();
  for (const auto& b : s.map.boxes) boxes.push_back({b.min.x(), b.min.y(), b.max.x(), b.max.y()});
  j["map"] = {{"origin", to_j(s.map.origin)},
              {"resolution", s.map.resolution},
              {"width", s.map.width},
              {"height", s.map.height},
              {"boxes", boxes}};
  json peds = json::array();
  for (const auto& p : s.pedestrians) {
    json pj = {{"route", to_j(p.route)}, {"radius", p.radius}};
    if (p.speed) pj["speed"] = *p.speed;
    if (p.pos) pj["pos"] = to_j(*p.pos);
    peds.push_back(pj);
  }
  j["pedestrians"] = peds;
  json robot = {{"radius", s.robot_radius}};
  if (!s.randomize) {
    robot["start"] = to_j(s.start);
    robot["goal"] = to_j(s.goal);
    j["global_path"] = to_j(s.global_path);
  }
  if (s.start_yaw) robot["yaw"] = *s.start_yaw;
  j["robot"] = robot;
  if (s.randomize) {
    j["randomize"] = {{"endpoints", to_j(s.randomize->endpoints)},
                      {"junction", to_j(s.randomize->junction)}};
  }
  if (s.peds_react_to_robot) j["peds_react_to_robot"] = true;
  return j;
}

std::shared_ptr<const cost::ObstacleField> build_field(const MapSpec& map) {
  return std::make_shared<const cost::ObstacleField>(cost::ObstacleField::from_boxes(
      map.origin, map.resolution, map.width, map.height, map.boxes));
}

void validate(const Scenario& s) {
  const auto fail = [&](const std::string& why) { throw ScenarioInvalid(s.name + ": " + why); };
  if (!(s.map.resolution > 0.0) || s.map.width <= 0 || s.map.height <= 0) fail("bad map dimensions");
  if (static_cast<long long>(s.map.width) * s.map.height > 16'000'000) fail("map too large");
  if (!(s.time_limit > 0.0)) fail("time_limit must be positive");
  if (s.seeds.empty()) fail("seeds must be non-empty");
  if (!(s.robot_radius > 0.0)) fail("robot radius must be positive");
  for (const auto& p : s.pedestrians) {
    if (p.route.empty()) fail("pedestrian without route");
    if (!(p.radius > 0.0)) fail("pedestrian radius must be positive");
    if (p.speed && !(*p.speed > 0.0)) fail("pedestrian speed must be positive");
  }
  const auto field = build_field(s.map);
  const auto free_point = [&](const Vec2& p) { return field->in_bounds(p) && !field->occupied_at(p); };
  if (s.randomize) {
    if (s.randomize->endpoints.size() < 2) fail("randomize needs at least two endpoints");
    for (const auto& e : s.randomize->endpoints) {
      if (!free_point(e)) fail("endpoint not in free space");
    }
  } else {
    if (!free_point(s.start)) fail("start not in free space");
    if (!free_point(s.goal)) fail("goal not in free space");
    if (s.global_path.size() < 2) fail("global_path needs at least two points");
  }
}

ScenarioInstance instantiate(const Scenario& s, std::uint64_t seed,
                             std::shared_ptr<const cost::ObstacleField> field) {
  std::mt19937_64 rng(seed);
  ScenarioInstance inst;
  inst.time_limit = s.time_limit;
  if (!field) field = build_field(s.map);

  if (s.randomize) {
    const auto& ends = s.randomize->endpoints;
    const int n = static_cast<int>(ends.size());
    const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int b = std::uniform_int_distribution<int>(0, n - 2)(rng);
    if (b >= a) ++b;
    inst.start = ends[a];
    inst.goal = ends[b];
    inst.global_path = {inst.start, s.randomize->junction, inst.goal};
  } else {
    inst.start = s.start;
    inst.goal = s.goal;
    inst.global_path = s.global_path;
  }

  world::WorldState& w = inst.world;
  w.field = field;
  w.config.sfm.react_to_robot = s.peds_react_to_robot;
  w.robot.x = inst.start.x();
  w.robot.y = inst.start.y();
  w.robot.radius = s.robot_radius;
  if (s.start_yaw) {
    w.robot.theta = *s.start_yaw;
  } else {
    const Vec2 d = inst.global_path[1] - inst.global_path[0];
    w.robot.theta = d.norm() > 0.0 ? std::atan2(d.y(), d.x()) : 0.0;
  }

  std::uniform_real_distribution<double> speed_dist(kPedSpeedMin, kPedSpeedMax);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (const auto& spec : s.pedestrians) {
    world::Pedestrian p;
    p.route = spec.route;
    p.radius = spec.radius;
    p.desired_speed = spec.speed ? *spec.speed : speed_dist(rng);
    const bool forward = u01(rng) < 0.5;
    if (spec.pos || spec.route.size() < 2) {
      p.pos = spec.pos ? *spec.pos : spec.route.front();
      p.route_index = spec.route.size() >= 2 ? 1 : 0;
    } else {
      // Uniform along the route by arc length, rejecting crowded spawns.
      std::vector<double> cum{0.0};
      for (std::size_t k = 0; k + 1 < spec.route.size(); ++k) {
        cum.push_back(cum.back() + (spec.route[k + 1] - spec.route[k]).norm());
      }
      Vec2 best = spec.route.front();
      std::size_t seg = 0;
      for (int attempt = 0; attempt < kSpawnAttempts; ++attempt) {
        const double at = u01(rng) * cum.back();
        std::size_t k = 0;
        while (k + 2 < cum.size() && cum[k + 1] < at) ++k;
        const double len = cum[k + 1] - cum[k];
        const double f = len > 0.0 ? (at - cum[k]) / len : 0.0;
        const Vec2 cand = spec.route[k] + f * (spec.route[k + 1] - spec.route[k]);
        best = cand;
        seg = k;
        bool ok = (cand - inst.start).norm() >= kSpawnRobotClear;
        for (const auto& q : w.pedestrians) ok = ok && (cand - q.pos).norm() >= kSpawnSeparation;
        if (ok) break;
      }
      p.pos = best;
      p.route_index = forward ? static_cast<int>(seg) + 1 : static_cast<int>(seg);
      p.route_dir = forward ? 1 : -1;
    }
    const Vec2 to_goal = p.goal() - p.pos;
    if (to_goal.norm() > 1e-9) p.vel = p.desired_speed * to_goal.normalized();
    w.pedestrians.push_back(std::move(p));
  }
  return inst;
}

Scenario training_corridor() {
  Scenario s;
  s.name = "training_corridor";
  s.time_limit = 60.0;
  s.map.origin = Vec2(-7.0, -7.0);
  s.map.resolution = 0.1;
  s.map.width = 140;
  s.map.height = 140;
  const double half = 1.5, arm = 6.0, edge = 7.0;
  s.map.boxes = {
      {Vec2(half, half), Vec2(edge, edge)},     {Vec2(-edge, half), Vec2(-half, edge)},
      {Vec2(-edge, -edge), Vec2(-half, -half)}, {Vec2(half, -edge), Vec2(edge, -half)},
      {Vec2(arm, -half), Vec2(edge, half)},     {Vec2(-edge, -half), Vec2(-arm, half)},
      {Vec2(-half, arm), Vec2(half, edge)},     {Vec2(-half, -edge), Vec2(half, -arm)},
  };
  const double end = 5.5;
  const double lanes_h[9] = {-0.9, -0.45, 0.0, 0.45, 0.9, -0.675, -0.225, 0.225, 0.675};
  const double lanes_v[8] = {-0.9, -0.45, 0.45, 0.9, -0.675, -0.225, 0.225, 0.675};
  for (double y : lanes_h) s.pedestrians.push_back({{Vec2(-end, y), Vec2(end, y)}, 0.3, {}, {}});
  for (double x : lanes_v) s.pedestrians.push_back({{Vec2(x, -end), Vec2(x, end)}, 0.3, {}, {}});
  const double e = 5.0;
  s.randomize = RandomEndpoints{{Vec2(e, 0.0), Vec2(0.0, e), Vec2(-e, 0.0), Vec2(0.0, -e)}, Vec2::Zero()};
  s.seeds = {1};
  return s;
}

ScenarioInstance make_training_world(std::uint64_t seed) {
  static const Scenario scenario = training_corridor();
  static const auto field = build_field(scenario.map);
  return instantiate(scenario, seed, field);
}

}  // namespace crowdnav::bench
