#include <cmath>

#include <doctest.h>

#include "crowdnav/bench/scenario.hpp"
#include "crowdnav/planner/st_planner.hpp"
#include "crowdnav/world/crowd_world.hpp"

using namespace crowdnav;
using world::WorldState;

namespace {

world::Pedestrian still_ped(Vec2 pos) {
  world::Pedestrian p;
  p.pos = pos;
  return p;
}

// Robot overlapping a static pedestrian, driven straight for `ticks` ticks.
WorldState contact_fixture() {
  WorldState w;
  w.pedestrians.push_back(still_ped({0.0, 0.0}));
  w.robot.x = -0.3;
  return w;
}

}  // namespace

TEST_SUITE("world") {

TEST_CASE("goal term alone when isolated") {
  world::Pedestrian p;
  p.desired_speed = 1.2;
  p.route = {{10.0, 0.0}};
  const Vec2 a = world::sfm_accel(p, {}, nullptr);
  CHECK(a.x() == doctest::Approx(2.4));
  CHECK(a.y() == 0.0);

  world::Pedestrian at_goal;
  at_goal.route = {{0.0, 0.0}};
  CHECK(world::sfm_accel(at_goal, {}, nullptr).norm() < 1e-12);
}

TEST_CASE("face-to-face repulsion equals A at contact") {
  world::Pedestrian p;
  p.pos = {0.0, 0.0};
  p.route = {{0.0, 0.0}};
  const world::Disc other{{0.6, 0.0}, 0.3};
  const Vec2 a = world::sfm_accel(p, std::span<const world::Disc>(&other, 1), nullptr);
  CHECK(a.x() == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(std::abs(a.y()) < 1e-12);
}

TEST_CASE("wall term pushes away from obstacles") {
  const auto field = cost::ObstacleField::from_boxes({-2, -2}, 0.1, 40, 40, {{{0.5, -2}, {2, 2}}});
  world::Pedestrian p;
  p.pos = {0.1, 0.05};
  p.route = {p.pos};
  const Vec2 a = world::sfm_accel(p, {}, &field);
  CHECK(a.x() < 0.0);
  CHECK(std::isfinite(a.norm()));
}

TEST_CASE("active collision accounting") {
  {
    WorldState w = contact_fixture();
    for (int i = 0; i < 10; ++i) world::world_step_commanded(w, {0.6, 0.0});
    CHECK(w.ledger.tcc == 10);
    CHECK(w.ledger.collided);
    CHECK(w.ledger.contact_ticks == 10);
  }
  {
    WorldState w = contact_fixture();
    for (int i = 0; i < 10; ++i) world::world_step_commanded(w, {0.2, 0.0});
    CHECK(w.ledger.tcc == 0);
    CHECK_FALSE(w.ledger.collided);
    CHECK(w.ledger.contact_ticks == 10);
  }
  {
    // Exactly at v_safe counts as active.
    WorldState w = contact_fixture();
    world::world_step_commanded(w, {0.4, 0.0});
    CHECK(w.ledger.tcc == 1);
  }
}

TEST_CASE("wall contact counts") {
  WorldState w;
  w.field = std::make_shared<cost::ObstacleField>(
      cost::ObstacleField::from_boxes({-2, -2}, 0.1, 40, 40, {{{0.3, -2}, {2, 2}}}));
  world::world_step_commanded(w, {0.5, 0.0});
  CHECK(w.ledger.contact);
  CHECK(w.ledger.tcc == 1);
}

TEST_CASE("empty world with a resting plan leaves the robot still") {
  WorldState w;
  w.robot.x = 1.0;
  w.robot.y = -2.0;
  w.robot.theta = 0.3;
  traj::TrajParams p;
  p.start.pos = p.end.pos = {1.0, -2.0};
  p.start_yaw = 0.3;
  p.tau = {traj::tau_from_duration(2.0)};
  const auto plan = traj::construct_minjerk(p);
  for (int i = 0; i < 100; ++i) world::world_step(w, &plan, i * world::kDt);
  CHECK(w.robot.x == 1.0);
  CHECK(w.robot.y == -2.0);
  CHECK(w.robot.theta == doctest::Approx(0.3));
  CHECK(w.tick == 100);
  CHECK(w.time() == doctest::Approx(2.0));
}

TEST_CASE("tracking follows a straight plan") {
  WorldState w;
  planner::PlanRequest req;
  req.local_goal = {4.0, 0.0};
  const auto plan = planner::solve(req).traj;
  int k = 0;
  for (; k * world::kDt <= plan.total_duration(); ++k) world::world_step(w, &plan, k * world::kDt);
  for (int j = 0; j < 100; ++j, ++k) world::world_step(w, &plan, k * world::kDt);
  CHECK((w.robot.pos() - Vec2(4.0, 0.0)).norm() < 0.1);
}

TEST_CASE("plant limits hold") {
  WorldState w;
  world::world_step_commanded(w, {5.0, 9.0});
  CHECK(w.robot.v == 1.2);
  CHECK(w.robot.omega == 1.5);
  world::world_step_commanded(w, {-5.0, -9.0});
  CHECK(w.robot.v == -0.2);
  CHECK(w.robot.omega == -1.5);
}

TEST_CASE("episode status thresholds") {
  WorldState w;
  w.robot.x = 3.0;
  CHECK(world::episode_status(w, {3.0, 0.0}, 1.0, 60.0) == world::EpisodeStatus::GoalReached);
  CHECK(world::episode_status(w, {3.51, 0.0}, 60.0 + world::kDt, 60.0) == world::EpisodeStatus::Timeout);
  CHECK(world::episode_status(w, {9.0, 0.0}, 0.0, 60.0) == world::EpisodeStatus::Running);
  CHECK(world::episode_status(w, {3.5, 0.0}, 61.0, 60.0) == world::EpisodeStatus::GoalReached);
}

TEST_CASE("ping-pong routes reverse at the ends") {
  WorldState w;
  world::Pedestrian p;
  p.pos = {0.0, 0.0};
  p.desired_speed = 1.0;
  p.route = {{0.0, 0.0}, {2.0, 0.0}};
  p.route_index = 1;
  w.pedestrians.push_back(p);
  w.robot.x = 50.0;
  double max_x = 0.0;
  bool returned = false;
  for (int i = 0; i < 400; ++i) {
    world::world_step_commanded(w, {});
    max_x = std::max(max_x, w.pedestrians[0].pos.x());
    if (max_x > 1.5 && w.pedestrians[0].pos.x() < 0.5) returned = true;
  }
  CHECK(max_x < 2.3);
  CHECK(returned);
}

TEST_CASE("determinism and speed caps in the training corridor") {
  auto a = bench::make_training_world(42), b = bench::make_training_world(42);
  for (int i = 0; i < 500; ++i) {
    world::world_step_commanded(a.world, {0.5, 0.1});
    world::world_step_commanded(b.world, {0.5, 0.1});
    for (const auto& p : a.world.pedestrians) {
      CHECK(p.vel.norm() <= 1.3 * p.desired_speed + 1e-12);
    }
  }
  REQUIRE(a.world.pedestrians.size() == b.world.pedestrians.size());
  for (std::size_t i = 0; i < a.world.pedestrians.size(); ++i) {
    CHECK(a.world.pedestrians[i].pos == b.world.pedestrians[i].pos);
    CHECK(a.world.pedestrians[i].vel == b.world.pedestrians[i].vel);
  }
  CHECK(a.world.robot.x == b.world.robot.x);
  CHECK(a.world.ledger.tcc == b.world.ledger.tcc);
}

TEST_CASE("pedestrian separation in the corridor") {
  // Fraction of (pair, tick) samples over 120 s with center distance at
  // least 0.9 (r_i + r_j), robot parked outside the map.
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto inst = bench::make_training_world(seed);
    auto& w = inst.world;
    w.robot.x = 100.0;
    w.robot.y = 100.0;
    const std::size_t n = w.pedestrians.size();
    REQUIRE(n == 17);
    long ok = 0, total = 0;
    for (int t = 0; t < 6000; ++t) {
      world::world_step_commanded(w, {});
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const auto& a = w.pedestrians[i];
          const auto& b = w.pedestrians[j];
          ok += (a.pos - b.pos).norm() >= 0.9 * (a.radius + b.radius);
          ++total;
        }
      }
    }
    CHECK(static_cast<double>(ok) / total >= 0.99);
  }
}

TEST_CASE("slow robot never accrues tcc") {
  auto inst = bench::make_training_world(7);
  for (int i = 0; i < 1500; ++i) world::world_step_commanded(inst.world, {0.35, 0.2});
  CHECK(inst.world.ledger.tcc == 0);
}

}  // TEST_SUITE
