#include <cmath>

#include "crowdnav/world/crowd_world.hpp"

namespace crowdnav::world {

Vec2 sfm_accel(const Pedestrian& ped, std::span<const Disc> neighbors,
               const cost::ObstacleField* field, const SocialForceParams& params) {
  Vec2 desired = Vec2::Zero();
  const Vec2 to_goal = ped.goal() - ped.pos;
  const double dist_goal = to_goal.norm();
  if (dist_goal > params.goal_tol) desired = ped.desired_speed * to_goal / dist_goal;
  Vec2 acc = (desired - ped.vel) / params.tau_relax;

  for (const Disc& other : neighbors) {
    const Vec2 diff = ped.pos - other.pos;
    const double d = diff.norm();
    if (d <= 1e-9) continue;
    acc += params.A * std::exp((ped.radius + other.radius - d) / params.B) * (diff / d);
  }

  if (field != nullptr && !field->empty()) {
    const auto dist = field->distance(ped.pos);
    const double gn = dist.grad.norm();
    if (dist.in_map && gn > 1e-9) {
      // Distance to the wall surface rather than the occupied cell center.
      const double d_wall = dist.value - 0.5 * field->resolution();
      acc += params.A_wall * std::exp((ped.radius - d_wall) / params.B_wall) * (dist.grad / gn);
    }
  }
  return acc;
}

}  // namespace crowdnav::world
