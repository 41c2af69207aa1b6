#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "crowdnav/cost/cost_model.hpp"
#include "crowdnav/cost/obstacle_field.hpp"
#include "crowdnav/traj/poly_traj.hpp"
#include "crowdnav/world/crowd_world.hpp"

namespace crowdnav::obs {

inline constexpr int kGridSize = 50;
inline constexpr double kGridRes = 0.1;                // [m]
inline constexpr double kInvGridRes = 10.0;            // cells per meter
inline constexpr double kHalfWindow = 2.5;             // [m]
inline constexpr double kPredHorizon = 1.0;            // [s]
inline constexpr double kPredStep = 0.1;               // [s]
inline constexpr double kPathSampleRate = 50.0;        // [Hz]

inline constexpr double kFree = 0.0;
inline constexpr double kGray = 0.5;
inline constexpr double kWhite = 1.0;

// Robot-centered, global-axis-aligned grid; cell (ix, iy) stored at iy * 50 + ix.
using Grid = std::array<double, kGridSize * kGridSize>;

struct Observation {
  Grid static_map{};
  Grid ped_map{};
  std::array<double, 3> kin_state{};  // (vx / v_limit, vy / v_limit, theta / pi)
};

inline int grid_index(int ix, int iy) { return iy * kGridSize + ix; }

// Cell containing global point p in the window around `center`, or nullopt
// when p falls outside [-2.5, 2.5) on either axis.
std::optional<std::pair<int, int>> cell_of(const Vec2& p, const Vec2& center);

// Global position of the center of cell (ix, iy).
Vec2 cell_center(int ix, int iy, const Vec2& center);

// Occupancy as gray, then cells holding 50 Hz samples of the remaining
// plan (from plan_age to its end) as white.
Grid encode_static(const cost::ObstacleField& field, const Vec2& robot_pos,
                   const traj::PiecewisePolyTraj* prev_plan, double plan_age);

// Constant-velocity prediction discs at t = 0.1, 0.2, ..., horizon as white,
// then the current discs as gray.
Grid encode_peds(const cost::PedestrianSnapshot& peds, const Vec2& robot_pos,
                 double horizon = kPredHorizon);

std::array<double, 3> encode_state(const world::RobotPlant& robot);

Observation encode(const world::WorldState& state, const traj::PiecewisePolyTraj* prev_plan,
                   double plan_age);

// Binary PGM (P5), row 0 = top = iy 49; 0.0 -> 0, 0.5 -> 128, 1.0 -> 255.
void write_pgm(std::ostream& os, const Grid& grid);

// Writes <prefix>_static.pgm, <prefix>_peds.pgm and <prefix>_state.json.
void write_observation_dump(const std::string& prefix, const Observation& obs);

}  // namespace crowdnav::obs
