#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "crowdnav/cost/cost_model.hpp"
#include "crowdnav/cost/obstacle_field.hpp"
#include "crowdnav/traj/poly_traj.hpp"

namespace crowdnav::world {

inline constexpr double kDt = 0.02;          // 50 Hz tick [s]
inline constexpr double kVSafe = 0.4;        // active-collision speed [m/s]
inline constexpr double kGoalTolerance = 0.5;  // robot goal radius [m]

struct SocialForceParams {
  double tau_relax = 0.5;   // [s]
  double A = 3.0;           // [m/s^2]
  double B = 0.35;          // [m]
  double A_wall = 5.0;      // [m/s^2]
  double B_wall = 0.1;      // [m]
  double goal_tol = 0.3;    // [m]
  double speed_cap = 1.3;   // multiple of desired speed
  bool react_to_robot = false;
};

struct Pedestrian {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  double desired_speed = 1.0;  // [m/s]
  double radius = 0.3;         // [m]
  std::vector<Vec2> route;     // ping-pong goals
  int route_index = 0;
  int route_dir = 1;

  Vec2 goal() const { return route.empty() ? pos : route[route_index]; }
};

// Disc agent as seen by the social force neighbor sum.
struct Disc {
  Vec2 pos = Vec2::Zero();
  double radius = 0.0;
};

// Acceleration of `ped`: goal relaxation, exponential repulsion from each
// neighbor disc, and an exponential wall term along the distance-field
// gradient. `neighbors` must not contain `ped` itself.
Vec2 sfm_accel(const Pedestrian& ped, std::span<const Disc> neighbors,
               const cost::ObstacleField* field, const SocialForceParams& params = {});

struct RobotPlant {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;      // body forward speed [m/s]
  double omega = 0.0;  // [rad/s]
  double radius = 0.4;
  double v_min = -0.2;
  double v_max = 1.2;
  double omega_limit = 1.5;

  Vec2 pos() const { return {x, y}; }
  Vec2 velocity() const;  // global frame
};

struct TrackingGains {
  double k_x = 1.0;
  double k_y = 4.0;
  double k_theta = 2.0;
};

struct Command {
  double v = 0.0;
  double omega = 0.0;
};

// Kinematic tracking law against a reference flat state, clamped to the
// plant limits.
Command tracking_command(const RobotPlant& robot, const traj::FlatState& ref,
                         const TrackingGains& gains = {});

struct CollisionLedger {
  std::int64_t tcc = 0;            // active-contact ticks
  std::int64_t contact_ticks = 0;  // any contact
  bool collided = false;           // at least one active tick
  bool contact = false;            // last tick
  bool active = false;             // last tick
};

struct WorldConfig {
  SocialForceParams sfm;
  TrackingGains gains;
  double v_safe = kVSafe;
};

struct WorldState {
  std::int64_t tick = 0;
  std::vector<Pedestrian> pedestrians;
  RobotPlant robot;
  std::shared_ptr<const cost::ObstacleField> field;
  CollisionLedger ledger;
  WorldConfig config;

  double time() const { return static_cast<double>(tick) * kDt; }
  cost::PedestrianSnapshot snapshot() const;
  double nearest_ped_distance() const;  // center distance, +inf with no peds
};

// One 50 Hz tick driven by the tracking law against plan(plan_age); holds
// the robot still when `plan` is null.
void world_step(WorldState& state, const traj::PiecewisePolyTraj* plan, double plan_age);

// Same tick with an explicit robot command (scripted fixtures).
void world_step_commanded(WorldState& state, Command cmd);

enum class EpisodeStatus { Running, GoalReached, Timeout };

const char* to_string(EpisodeStatus s);

EpisodeStatus episode_status(const WorldState& state, const Vec2& goal, double elapsed,
                             double time_limit);

}  // namespace crowdnav::world
