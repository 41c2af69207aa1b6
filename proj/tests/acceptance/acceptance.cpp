#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdnav/bench/batch.hpp"
#include "crowdnav/bench/scenario.hpp"
#include "crowdnav/obs/observation.hpp"
#include "crowdnav/planner/st_planner.hpp"
#include "crowdnav/rl/episode.hpp"
#include "crowdnav/rl/trainer.hpp"
#include "crowdnav/verify/gradcheck.hpp"
#include "crowdnav/world/crowd_world.hpp"

namespace fs = std::filesystem;
using namespace crowdnav;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// Random request with a few boxes and pedestrians around the segment.
planner::PlanRequest random_request(std::mt19937_64& rng, bool empty) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  planner::PlanRequest r;
  const double ang = M_PI * u(rng);
  const double len = 3.0 + 2.0 * std::abs(u(rng));
  r.start.pos = Vec2(u(rng), u(rng));
  r.start.vel = 0.5 * Vec2(u(rng), u(rng));
  r.start.yaw = std::atan2(r.start.vel.y(), r.start.vel.x());
  r.local_goal = r.start.pos + len * Vec2(std::cos(ang), std::sin(ang));
  if (empty) return r;
  std::vector<cost::Box> boxes;
  for (int i = 0; i < 3; ++i) {
    const Vec2 c = r.start.pos + (0.3 + 0.4 * i) * (r.local_goal - r.start.pos) + Vec2(u(rng), u(rng));
    const Vec2 h(0.2 + 0.2 * std::abs(u(rng)), 0.2 + 0.2 * std::abs(u(rng)));
    if ((c - r.start.pos).cwiseAbs().maxCoeff() < 1.2 || (c - r.local_goal).cwiseAbs().maxCoeff() < 1.2) continue;
    boxes.push_back({c - h, c + h});
  }
  r.field = cost::ObstacleField::from_boxes(r.start.pos - Vec2(8, 8), 0.1, 160, 160, boxes);
  for (int i = 0; i < 4; ++i) {
    const Vec2 p = r.start.pos + (0.25 + 0.2 * i) * (r.local_goal - r.start.pos) + 1.5 * Vec2(u(rng), u(rng));
    r.peds.push_back({p, 1.2 * Vec2(u(rng), u(rng)), 0.3});
  }
  return r;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto c = verify::minjerk_oracle();
  const double dt = seconds_since(t0);
  return {c.pass && dt < 1.0, fmt("err %.2e, %.3f s", c.max_rel_err, dt)};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string failed;
  for (const auto& c : verify::run_all()) {
    if (!c.pass) failed += " " + c.name;
    ok = ok && c.pass;
  }
  const double dt = seconds_since(t0);
  return {ok && dt < 120.0, fmt("%s, %.1f s", failed.empty() ? "all suites" : ("failed:" + failed).c_str(), dt)};
}

Outcome criterion3() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  int monotone = 0, shorter = 0;
  for (int i = 0; i < 100; ++i) {
    const auto req = random_request(rng, false);
    const auto r = planner::solve(req);
    monotone += r.status == planner::PlanStatus::Failed || r.final_cost <= r.initial_cost;
  }
  for (int i = 0; i < 100; ++i) {
    auto req = random_request(rng, true);
    const double slow = planner::solve(req).traj.total_duration();
    req.weights.w_T = 5.0;
    const double fast = planner::solve(req).traj.total_duration();
    shorter += fast < slow;
  }
  const double dt = seconds_since(t0);
  return {monotone == 100 && shorter >= 95 && dt < 60.0,
          fmt("monotone %d/100, shorter %d/100, %.1f s", monotone, shorter, dt)};
}

Outcome criterion4() {
  std::mt19937_64 rng(404);
  std::vector<double> ms;
  for (int i = 0; i < 100; ++i) {
    const auto req = random_request(rng, false);
    const auto t0 = Clock::now();
    const auto r = planner::solve(req);
    ms.push_back(1e3 * seconds_since(t0));
    (void)r;
  }
  std::nth_element(ms.begin(), ms.begin() + 50, ms.end());
  const double median = ms[50];
  return {median < 50.0, fmt("median %.2f ms", median)};
}

Outcome criterion5() {
  const auto fixture = [](double v) {
    world::WorldState w;
    world::Pedestrian p;
    w.pedestrians.push_back(p);
    w.robot.x = -0.3;
    for (int i = 0; i < 10; ++i) world::world_step_commanded(w, {v, 0.0});
    return w.ledger.tcc;
  };
  const auto fast = fixture(0.6), slow = fixture(0.2);
  int exact = 0;
  const auto agent = rl::fixed_agent(cost::CostWeights::all(1.0));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = rl::run_episode(bench::make_training_world(500 + s), agent, {});
    exact += rl::replay_return(r.steps, rl::kTerminationPenalty) == r.ret;
  }
  return {fast == 10 && slow == 0 && exact == 10,
          fmt("tcc %lld/%lld, replay exact %d/10", static_cast<long long>(fast),
              static_cast<long long>(slow), exact)};
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  const auto sc = bench::training_corridor();
  const bench::BatchAgent agent(bench::parse_agent("fixed:1,1,1,1,1"));
  const auto a = bench::aggregate(sc.name, "ST(all=1)", bench::run_batch(sc, agent, 100, 1000));
  const double dt = seconds_since(t0);
  return {a.complete >= 85 && dt < 900.0,
          fmt("complete %d/100, tcc %lld, %.1f s", a.complete, static_cast<long long>(a.tcc), dt)};
}

Outcome criterion7() {
  const auto t0 = Clock::now();
  rl::Trainer trainer(bench::training_corridor(), {}, 7);
  std::vector<double> ret;
  trainer.train(300, [&](const rl::EpisodeLog& e) { ret.push_back(e.ret); });
  const auto mean = [&](int lo, int hi) {
    double s = 0.0;
    for (int i = lo; i < hi; ++i) s += ret[i];
    return s / (hi - lo);
  };
  const double early = mean(0, 50), late = mean(250, 300);
  const double gain = (late - early) / std::abs(early);
  const double dt = seconds_since(t0);
  return {gain >= 0.30 && dt < 1800.0,
          fmt("mean return %.1f -> %.1f (%+.1f%%), %.1f s", early, late, 100.0 * gain, dt)};
}

Outcome criterion8(const fs::path& work) {
  const auto t0 = Clock::now();
  const auto sc = bench::training_corridor();
  rl::Trainer trainer(sc, {}, 11);
  trainer.train(2000);
  const fs::path ckpt = work / "criterion8_final.bin";
  fs::create_directories(work);
  policy::save_checkpoint(ckpt.string(), trainer.checkpoint());

  const std::uint64_t held_out = 5000;
  const bench::BatchAgent learned(bench::parse_agent("ckpt:" + ckpt.string()));
  const bench::BatchAgent fixed(bench::parse_agent("fixed:1,1,1,1,1"));
  const auto l = bench::aggregate(sc.name, "Learned", bench::run_batch(sc, learned, 100, held_out));
  const auto f = bench::aggregate(sc.name, "ST(all=1)", bench::run_batch(sc, fixed, 100, held_out));
  const double dt = seconds_since(t0);
  return {l.tcc < f.tcc && l.complete >= f.complete - 5,
          fmt("learned tcc %lld complete %d, ST(all=1) tcc %lld complete %d, %.0f s",
              static_cast<long long>(l.tcc), l.complete, static_cast<long long>(f.tcc), f.complete, dt)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

Outcome criterion9(const fs::path& work) {
  int failed = 0;
  const auto expect = [&](bool c) { failed += !c; };
  const Vec2 o{0.0, 0.0};
  expect(obs::cell_of({2.49, 2.49}, o) == std::pair{49, 49});
  expect(obs::cell_of({-2.5, -2.5}, o) == std::pair{0, 0});
  expect(obs::cell_of({1.0, 0.0}, o) == std::pair{35, 25});
  expect(!obs::cell_of({2.5, 0.0}, o).has_value());

  const auto wall = cost::ObstacleField::from_boxes({-5, -5}, 0.1, 100, 100, {{{1.0, -5}, {1.1, 5}}});
  const auto s = obs::encode_static(wall, o, nullptr, 0.0);
  int gray = 0;
  for (double x : s) gray += x == obs::kGray;
  expect(gray == 50 && s[obs::grid_index(35, 10)] == obs::kGray);

  const auto box = cost::ObstacleField::from_boxes({-5, -5}, 0.1, 100, 100, {{{1.0, -0.5}, {1.5, 0.5}}});
  traj::TrajParams p;
  p.start.pos = {0.0, 0.05};
  p.end.pos = {2.0, 0.05};
  p.tau = {traj::tau_from_duration(2.0)};
  const auto plan = traj::construct_minjerk(p);
  const auto sp = obs::encode_static(box, o, &plan, 0.0);
  expect(sp[obs::grid_index(37, 25)] == obs::kWhite);
  expect(sp[obs::grid_index(37, 27)] == obs::kGray);

  const auto still = obs::encode_peds({{{0.5, -0.3}, {0.0, 0.0}, 0.3}}, o);
  expect(std::none_of(still.begin(), still.end(), [](double x) { return x == obs::kWhite; }));
  const auto moving = obs::encode_peds({{{1.0, 0.0}, {1.0, 0.0}, 0.3}}, o);
  expect(moving[obs::grid_index(35, 25)] == obs::kGray);
  expect(moving[obs::grid_index(40, 25)] == obs::kWhite);
  expect(moving[obs::grid_index(48, 25)] == obs::kFree);

  const fs::path dir = work / "obs_dumps";
  fs::create_directories(dir);
  const auto inst = bench::make_training_world(9);
  obs::write_observation_dump((dir / "a").string(), obs::encode(inst.world, nullptr, 0.0));
  obs::write_observation_dump((dir / "b").string(), obs::encode(bench::make_training_world(9).world, nullptr, 0.0));
  for (const char* suffix : {"_static.pgm", "_peds.pgm", "_state.json"}) {
    const auto x = slurp(dir / (std::string("a") + suffix));
    expect(!x.empty() && x == slurp(dir / (std::string("b") + suffix)));
  }
  return {failed == 0, fmt("%d failed checks", failed)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  int only = 0;
  std::string work = (fs::temp_directory_path() / "crowdnav_acceptance").string();
  app.add_option("--only", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--work", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"min-jerk oracle", criterion1},
      {"gradient suites", criterion2},
      {"solver soundness", criterion3},
      {"solve latency", criterion4},
      {"simulation accounting", criterion5},
      {"fixed-weight end-to-end", criterion6},
      {"learning smoke test", criterion7},
      {"learned vs fixed TCC", [&] { return criterion8(work); }},
      {"encoder fixtures", [&] { return criterion9(work); }},
  };
  bool ok = true;
  for (int i = 0; i < 9; ++i) {
    if (only != 0 && only != i + 1) continue;
    const Outcome r = criteria[i].second();
    std::printf("%s %d %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail.c_str());
    std::fflush(stdout);
    ok = ok && r.pass;
  }
  return ok ? 0 : 3;
}
