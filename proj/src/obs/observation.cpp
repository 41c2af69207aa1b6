#include "crowdnav/obs/observation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace crowdnav::obs {

std::optional<std::pair<int, int>> cell_of(const Vec2& p, const Vec2& center) {
  const double fx = std::floor((p.x() - center.x()) * kInvGridRes + kHalfWindow * kInvGridRes);
  const double fy = std::floor((p.y() - center.y()) * kInvGridRes + kHalfWindow * kInvGridRes);
  if (!(fx >= 0.0 && fx < kGridSize && fy >= 0.0 && fy < kGridSize)) return std::nullopt;
  return std::make_pair(static_cast<int>(fx), static_cast<int>(fy));
}

Vec2 cell_center(int ix, int iy, const Vec2& center) {
  return center + Vec2((ix + 0.5) * kGridRes - kHalfWindow, (iy + 0.5) * kGridRes - kHalfWindow);
}

namespace {

// Paints value into every cell whose center lies within `radius` of c.
void paint_disc(Grid& g, const Vec2& c, double radius, const Vec2& center, double value) {
  const Vec2 rel = c - center;
  const int x0 = std::max(0, static_cast<int>(std::floor((rel.x() - radius + kHalfWindow) * kInvGridRes)));
  const int x1 = std::min(kGridSize - 1, static_cast<int>(std::floor((rel.x() + radius + kHalfWindow) * kInvGridRes)));
  const int y0 = std::max(0, static_cast<int>(std::floor((rel.y() - radius + kHalfWindow) * kInvGridRes)));
  const int y1 = std::min(kGridSize - 1, static_cast<int>(std::floor((rel.y() + radius + kHalfWindow) * kInvGridRes)));
  const double r2 = radius * radius;
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      if ((cell_center(ix, iy, center) - c).squaredNorm() <= r2) g[grid_index(ix, iy)] = value;
    }
  }
}

}  // namespace

Grid encode_static(const cost::ObstacleField& field, const Vec2& robot_pos,
                   const traj::PiecewisePolyTraj* prev_plan, double plan_age) {
  Grid g{};
  if (!field.empty()) {
    for (int iy = 0; iy < kGridSize; ++iy) {
      for (int ix = 0; ix < kGridSize; ++ix) {
        if (field.occupied_at(cell_center(ix, iy, robot_pos))) g[grid_index(ix, iy)] = kGray;
      }
    }
  }
  if (prev_plan != nullptr && !prev_plan->empty()) {
    const double total = prev_plan->total_duration();
    const double start = std::clamp(plan_age, 0.0, total);
    const double step = 1.0 / kPathSampleRate;
    for (int k = 0;; ++k) {
      const double t = start + k * step;
      if (t > total) break;
      const auto cell = cell_of(prev_plan->eval(t, 0).pos(), robot_pos);
      if (cell) g[grid_index(cell->first, cell->second)] = kWhite;
    }
  }
  return g;
}

Grid encode_peds(const cost::PedestrianSnapshot& peds, const Vec2& robot_pos, double horizon) {
  Grid g{};
  const int steps = static_cast<int>(std::floor(horizon / kPredStep + 1e-9));
  for (const auto& p : peds) {
    for (int k = 1; k <= steps; ++k) {
      paint_disc(g, p.pos + p.vel * (k * kPredStep), p.radius, robot_pos, kWhite);
    }
  }
  for (const auto& p : peds) paint_disc(g, p.pos, p.radius, robot_pos, kGray);
  return g;
}

std::array<double, 3> encode_state(const world::RobotPlant& robot) {
  const Vec2 v = robot.velocity();
  return {v.x() / robot.v_max, v.y() / robot.v_max, robot.theta / std::numbers::pi};
}

Observation encode(const world::WorldState& state, const traj::PiecewisePolyTraj* prev_plan,
                   double plan_age) {
  Observation o;
  const Vec2 c = state.robot.pos();
  if (state.field) {
    o.static_map = encode_static(*state.field, c, prev_plan, plan_age);
  } else {
    o.static_map = encode_static(cost::ObstacleField{}, c, prev_plan, plan_age);
  }
  o.ped_map = encode_peds(state.snapshot(), c);
  o.kin_state = encode_state(state.robot);
  return o;
}

void write_pgm(std::ostream& os, const Grid& grid) {
  os << "P5\n" << kGridSize << ' ' << kGridSize << "\n255\n";
  for (int row = 0; row < kGridSize; ++row) {
    const int iy = kGridSize - 1 - row;
    for (int ix = 0; ix < kGridSize; ++ix) {
      const double v = grid[grid_index(ix, iy)];
      const unsigned char b = v >= kWhite ? 255 : (v >= kGray ? 128 : 0);
      os.put(static_cast<char>(b));
    }
  }
}

void write_observation_dump(const std::string& prefix, const Observation& obs) {
  const auto write_grid = [](const std::string& path, const Grid& g) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    write_pgm(f, g);
  };
  write_grid(prefix + "_static.pgm", obs.static_map);
  write_grid(prefix + "_peds.pgm", obs.ped_map);
  std::ofstream f(prefix + "_state.json");
  if (!f) throw std::runtime_error("cannot write " + prefix + "_state.json");
  nlohmann::json j;
  j["kin_state"] = {obs.kin_state[0], obs.kin_state[1], obs.kin_state[2]};
  f << j.dump(2) << '\n';
}

}  // namespace crowdnav::obs
