#include "crowdnav/rl/reward.hpp"

#include <cmath>

namespace crowdnav::rl {

double step_reward(bool in_collision, double speed, bool goal_reached, double v_safe) {
  double r = kTimeReward;
  if (in_collision) r += std::abs(speed) >= v_safe ? kActiveCollisionReward : kPassiveCollisionReward;
  if (goal_reached) r += kGoalReward;
  return r;
}

}  // namespace crowdnav::rl
