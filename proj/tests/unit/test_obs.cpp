#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "crowdnav/bench/scenario.hpp"
#include "crowdnav/obs/observation.hpp"

using namespace crowdnav;
using obs::grid_index;

namespace {

int count(const obs::Grid& g, double v) {
  int n = 0;
  for (double x : g) n += x == v;
  return n;
}

bool codes_only(const obs::Grid& g) {
  for (double x : g) {
    if (x != obs::kFree && x != obs::kGray && x != obs::kWhite) return false;
  }
  return true;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_SUITE("obs") {

TEST_CASE("cell index arithmetic") {
  const Vec2 c{0.0, 0.0};
  CHECK(obs::cell_of({2.49, 2.49}, c) == std::pair{49, 49});
  CHECK(obs::cell_of({-2.5, -2.5}, c) == std::pair{0, 0});
  CHECK(obs::cell_of({1.0, 0.0}, c) == std::pair{35, 25});
  CHECK_FALSE(obs::cell_of({2.5, 0.0}, c).has_value());
  CHECK_FALSE(obs::cell_of({0.0, -2.51}, c).has_value());
  const Vec2 off{3.0, -1.0};
  CHECK(obs::cell_of(off + Vec2(2.49, 2.49), off) == std::pair{49, 49});
  CHECK((obs::cell_center(35, 25, c) - Vec2(1.05, 0.05)).norm() < 1e-12);
}

TEST_CASE("empty inputs encode to black") {
  const cost::ObstacleField none;
  const auto s = obs::encode_static(none, {0, 0}, nullptr, 0.0);
  CHECK(count(s, obs::kFree) == 2500);
  const auto p = obs::encode_peds({}, {0, 0});
  CHECK(count(p, obs::kFree) == 2500);
}

TEST_CASE("wall column lands at index 35") {
  const auto field = cost::ObstacleField::from_boxes({-5, -5}, 0.1, 100, 100, {{{1.0, -5}, {1.1, 5}}});
  const auto s = obs::encode_static(field, {0, 0}, nullptr, 0.0);
  for (int iy = 0; iy < 50; ++iy) {
    CHECK(s[grid_index(35, iy)] == obs::kGray);
    CHECK(s[grid_index(34, iy)] == obs::kFree);
    CHECK(s[grid_index(36, iy)] == obs::kFree);
  }
  CHECK(count(s, obs::kGray) == 50);
  CHECK(codes_only(s));
}

TEST_CASE("plan overwrites obstacles") {
  const auto field = cost::ObstacleField::from_boxes({-5, -5}, 0.1, 100, 100, {{{1.0, -0.5}, {1.5, 0.5}}});
  traj::TrajParams p;
  p.start.pos = {0.0, 0.05};
  p.end.pos = {2.0, 0.05};
  p.tau = {traj::tau_from_duration(2.0)};
  const auto plan = traj::construct_minjerk(p);
  const auto s = obs::encode_static(field, {0, 0}, &plan, 0.0);
  CHECK(s[grid_index(37, 25)] == obs::kWhite);  // occupied and on the path
  CHECK(s[grid_index(37, 27)] == obs::kGray);   // occupied, off the path
  CHECK(s[grid_index(30, 25)] == obs::kWhite);
  CHECK(s[grid_index(10, 25)] == obs::kFree);   // behind the robot
  CHECK(codes_only(s));

  // Only the remaining horizon is painted.
  const auto later = obs::encode_static(field, {0, 0}, &plan, 1.9);
  CHECK(later[grid_index(30, 25)] == obs::kFree);
  CHECK(later[grid_index(44, 25)] == obs::kWhite);
}

TEST_CASE("static pedestrian paints only gray") {
  const cost::PedestrianSnapshot peds{{{0.5, -0.3}, {0.0, 0.0}, 0.3}};
  const auto g = obs::encode_peds(peds, {0, 0});
  CHECK(count(g, obs::kWhite) == 0);
  CHECK(count(g, obs::kGray) > 0);
  for (int iy = 0; iy < 50; ++iy) {
    for (int ix = 0; ix < 50; ++ix) {
      const bool inside = (obs::cell_center(ix, iy, {0, 0}) - Vec2(0.5, -0.3)).norm() <= 0.3;
      CHECK((g[grid_index(ix, iy)] == obs::kGray) == inside);
    }
  }
}

TEST_CASE("moving pedestrian trail") {
  const cost::PedestrianSnapshot peds{{{1.0, 0.0}, {1.0, 0.0}, 0.3}};
  const auto g = obs::encode_peds(peds, {0, 0});
  CHECK(g[grid_index(35, 25)] == obs::kGray);   // cell holding (1, 0)
  CHECK(g[grid_index(37, 25)] == obs::kGray);   // center (1.25, 0.05) inside the current disc
  CHECK(g[grid_index(40, 25)] == obs::kWhite);  // (1.5, 0) on the trail
  CHECK(g[grid_index(45, 25)] == obs::kWhite);  // (2, 0) at the horizon
  CHECK(g[grid_index(48, 25)] == obs::kFree);   // beyond horizon + radius
  CHECK(g[grid_index(31, 25)] == obs::kFree);   // behind the current disc
  CHECK(codes_only(g));
}

TEST_CASE("translation equivariance") {
  auto base = bench::make_training_world(3);
  const auto a = obs::encode(base.world, nullptr, 0.0);

  auto moved = base;
  const Vec2 shift{0.7, -1.3};
  const auto& f = *base.world.field;
  std::vector<std::uint8_t> occ = f.occupancy();
  moved.world.field = std::make_shared<cost::ObstacleField>(f.origin() + shift, f.resolution(),
                                                            f.width(), f.height(), occ);
  moved.world.robot.x += shift.x();
  moved.world.robot.y += shift.y();
  for (auto& p : moved.world.pedestrians) p.pos += shift;
  const auto b = obs::encode(moved.world, nullptr, 0.0);
  CHECK(a.static_map == b.static_map);
  CHECK(a.ped_map == b.ped_map);
  CHECK(a.kin_state == b.kin_state);
}

TEST_CASE("kinematic state normalization") {
  world::RobotPlant r;
  CHECK(obs::encode_state(r) == std::array<double, 3>{0.0, 0.0, 0.0});
  r.v = 1.2;
  const auto s = obs::encode_state(r);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(0.0));
  r.v = 0.0;
  r.theta = std::numbers::pi;
  CHECK(obs::encode_state(r)[2] == doctest::Approx(1.0));
}

TEST_CASE("dumps are byte-stable") {
  const auto dir = std::filesystem::temp_directory_path() / "crowdnav_obs_dump";
  std::filesystem::create_directories(dir);
  auto inst = bench::make_training_world(9);
  const auto o = obs::encode(inst.world, nullptr, 0.0);
  obs::write_observation_dump((dir / "a").string(), o);
  obs::write_observation_dump((dir / "b").string(), obs::encode(inst.world, nullptr, 0.0));
  for (const char* suffix : {"_static.pgm", "_peds.pgm", "_state.json"}) {
    const auto x = slurp((dir / (std::string("a") + suffix)).string());
    const auto y = slurp((dir / (std::string("b") + suffix)).string());
    CHECK(!x.empty());
    CHECK(x == y);
  }
  std::ostringstream pgm;
  obs::write_pgm(pgm, o.static_map);
  const std::string bytes = pgm.str();
  CHECK(bytes.rfind("P5\n50 50\n255\n", 0) == 0);
  CHECK(bytes.size() == std::string("P5\n50 50\n255\n").size() + 2500);
}

}  // TEST_SUITE
