#pragma once

#include <ostream>
#include <string>

#include "crowdnav/traj/poly_traj.hpp"

namespace crowdnav::traj {

inline constexpr double kDumpRateHz = 50.0;

// CSV rows (t, x, y, vx, vy, ax, ay, yaw, yaw_rate) sampled at 50 Hz,
// including the final instant T.
void write_trajectory_csv(std::ostream& os, const PiecewisePolyTraj& traj);
void write_trajectory_csv(const std::string& path, const PiecewisePolyTraj& traj);

}  // namespace crowdnav::traj
