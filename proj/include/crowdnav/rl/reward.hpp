#pragma once

namespace crowdnav::rl {

inline constexpr double kTimeReward = -10.0;
inline constexpr double kActiveCollisionReward = -150.0;
inline constexpr double kPassiveCollisionReward = -50.0;
inline constexpr double kGoalReward = 50.0;
inline constexpr double kTerminationPenalty = -1500.0;
inline constexpr double kRewardVSafe = 0.4;  // [m/s]

// r_time + r_collision + r_goal for one decision step.
double step_reward(bool in_collision, double speed, bool goal_reached, double v_safe = kRewardVSafe);

}  // namespace crowdnav::rl
