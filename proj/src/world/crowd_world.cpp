#include "crowdnav/world/crowd_world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdnav::world {

Vec2 RobotPlant::velocity() const { return v * Vec2(std::cos(theta), std::sin(theta)); }

Command tracking_command(const RobotPlant& robot, const traj::FlatState& ref,
                         const TrackingGains& gains) {
  const double c = std::cos(robot.theta), s = std::sin(robot.theta);
  const double dx = ref.pos.x() - robot.x, dy = ref.pos.y() - robot.y;
  const double e_x = c * dx + s * dy;
  const double e_y = -s * dx + c * dy;
  const double e_theta = wrap_angle(ref.yaw - robot.theta);
  const double v_ref = ref.vel.norm();
  Command cmd;
  cmd.v = v_ref * std::cos(e_theta) + gains.k_x * e_x;
  cmd.omega = ref.yaw_rate + gains.k_y * v_ref * e_y + gains.k_theta * std::sin(e_theta);
  cmd.v = std::clamp(cmd.v, robot.v_min, robot.v_max);
  cmd.omega = std::clamp(cmd.omega, -robot.omega_limit, robot.omega_limit);
  return cmd;
}

cost::PedestrianSnapshot WorldState::snapshot() const {
  cost::PedestrianSnapshot out;
  out.reserve(pedestrians.size());
  for (const auto& p : pedestrians) out.push_back({p.pos, p.vel, p.radius});
  return out;
}

double WorldState::nearest_ped_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pedestrians) best = std::min(best, (p.pos - robot.pos()).norm());
  return best;
}

namespace {

void step_pedestrians(WorldState& st) {
  const auto& prm = st.config.sfm;
  const std::size_t n = st.pedestrians.size();
  if (n == 0) return;
  std::vector<Disc> discs;
  discs.reserve(n + 1);
  std::vector<Vec2> acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    discs.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) discs.push_back({st.pedestrians[j].pos, st.pedestrians[j].radius});
    }
    if (prm.react_to_robot) discs.push_back({st.robot.pos(), st.robot.radius});
    acc[i] = sfm_accel(st.pedestrians[i], discs, st.field.get(), prm);
  }
  // Semi-implicit Euler with the speed cap, then route bookkeeping.
  for (std::size_t i = 0; i < n; ++i) {
    Pedestrian& p = st.pedestrians[i];
    p.vel += acc[i] * kDt;
    const double cap = prm.speed_cap * p.desired_speed;
    const double speed = p.vel.norm();
    if (speed > cap) p.vel *= cap / speed;
    p.pos += p.vel * kDt;
    if (p.route.size() >= 2 && (p.goal() - p.pos).norm() <= prm.goal_tol) {
      const int last = static_cast<int>(p.route.size()) - 1;
      if (p.route_index + p.route_dir > last || p.route_index + p.route_dir < 0) {
        p.route_dir = -p.route_dir;
      }
      p.route_index += p.route_dir;
    }
  }
}

void update_ledger(WorldState& st) {
  const RobotPlant& r = st.robot;
  bool contact = false;
  if (st.field && !st.field->empty()) {
    const auto d = st.field->distance(r.pos());
    if (d.in_map && d.value < r.radius) contact = true;
  }
  for (const auto& p : st.pedestrians) {
    if (contact) break;
    if ((p.pos - r.pos()).norm() < r.radius + p.radius) contact = true;
  }
  const bool active = contact && std::abs(r.v) >= st.config.v_safe;
  st.ledger.contact = contact;
  st.ledger.active = active;
  if (contact) ++st.ledger.contact_ticks;
  if (active) {
    ++st.ledger.tcc;
    st.ledger.collided = true;
  }
}

}  // namespace

void world_step_commanded(WorldState& st, Command cmd) {
  step_pedestrians(st);
  RobotPlant& r = st.robot;
  r.v = std::clamp(cmd.v, r.v_min, r.v_max);
  r.omega = std::clamp(cmd.omega, -r.omega_limit, r.omega_limit);
  const double mid = r.theta + 0.5 * r.omega * kDt;
  r.x += r.v * std::cos(mid) * kDt;
  r.y += r.v * std::sin(mid) * kDt;
  r.theta = wrap_angle(r.theta + r.omega * kDt);
  update_ledger(st);
  ++st.tick;
}

void world_step(WorldState& st, const traj::PiecewisePolyTraj* plan, double plan_age) {
  Command cmd;
  if (plan != nullptr && !plan->empty()) {
    const double t = std::clamp(plan_age, 0.0, plan->total_duration());
    cmd = tracking_command(st.robot, plan->flat_state(t), st.config.gains);
  }
  world_step_commanded(st, cmd);
}

const char* to_string(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::Running: return "Running";
    case EpisodeStatus::GoalReached: return "GoalReached";
    case EpisodeStatus::Timeout: return "Timeout";
  }
  return "?";
}

EpisodeStatus episode_status(const WorldState& state, const Vec2& goal, double elapsed,
                             double time_limit) {
  if ((state.robot.pos() - goal).norm() <= kGoalTolerance) return EpisodeStatus::GoalReached;
  if (elapsed > time_limit) return EpisodeStatus::Timeout;
  return EpisodeStatus::Running;
}

}  // namespace crowdnav::world
