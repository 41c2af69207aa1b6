#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdnav/cost/obstacle_field.hpp"
#include "crowdnav/world/crowd_world.hpp"

namespace crowdnav::bench {

struct MapSpec {
  Vec2 origin = Vec2::Zero();
  double resolution = 0.1;
  int width = 0;
  int height = 0;
  std::vector<cost::Box> boxes;
};

struct PedSpec {
  std::vector<Vec2> route;
  double radius = 0.3;
  std::optional<double> speed;  // sampled from U(0.8, 1.4) when absent
  std::optional<Vec2> pos;      // sampled along the route when absent
};

// Start and goal drawn per seed among distinct endpoints; the global path
// runs start -> junction -> goal.
struct RandomEndpoints {
  std::vector<Vec2> endpoints;
  Vec2 junction = Vec2::Zero();
};

struct Scenario {
  std::string name;
  MapSpec map;
  std::vector<PedSpec> pedestrians;
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  std::optional<double> start_yaw;  // defaults to the first path direction
  double robot_radius = 0.4;
  std::vector<Vec2> global_path;
  double time_limit = 60.0;
  std::vector<std::uint64_t> seeds;
  std::optional<RandomEndpoints> randomize;
  bool peds_react_to_robot = false;
};

struct ScenarioInstance {
  world::WorldState world;
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  std::vector<Vec2> global_path;
  double time_limit = 60.0;
};

inline constexpr double kPedSpeedMin = 0.8;
inline constexpr double kPedSpeedMax = 1.4;

// Throws ScenarioInvalid on malformed input.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

void validate(const Scenario& s);

std::shared_ptr<const cost::ObstacleField> build_field(const MapSpec& map);

// Deterministic in (scenario, seed). `field` may be passed to share one
// rasterized map between instances.
ScenarioInstance instantiate(const Scenario& s, std::uint64_t seed,
                             std::shared_ptr<const cost::ObstacleField> field = nullptr);

// Two 12 m x 3 m corridors crossing at the origin, 17 pedestrians walking
// between the arm ends, start and goal among the four arm ends.
Scenario training_corridor();
ScenarioInstance make_training_world(std::uint64_t seed);

}  // namespace crowdnav::bench
