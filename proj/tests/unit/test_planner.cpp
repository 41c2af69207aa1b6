#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <doctest.h>

#include "crowdnav/planner/lbfgs.hpp"
#include "crowdnav/planner/plan_io.hpp"
#include "crowdnav/planner/st_planner.hpp"

using namespace crowdnav;
using planner::PlanRequest;

namespace {

PlanRequest empty_request(Vec2 a, Vec2 b) {
  PlanRequest r;
  r.start.pos = a;
  r.local_goal = b;
  return r;
}

Eigen::Rotation2Dd rot(double a) { return Eigen::Rotation2Dd(a); }

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("lbfgs minimizes a quadratic and the Rosenbrock valley") {
  const planner::Objective quad = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * (x - Eigen::Vector3d(1, -2, 3));
    return (x - Eigen::Vector3d(1, -2, 3)).squaredNorm();
  };
  const auto r = planner::minimize_lbfgs(quad, Eigen::VectorXd::Zero(3));
  CHECK(r.status == planner::LbfgsStatus::Converged);
  CHECK((r.x - Eigen::Vector3d(1, -2, 3)).norm() < 1e-5);

  const planner::Objective rosen = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(2);
    g(0) = -2 * (1 - x(0)) - 400 * x(0) * (x(1) - x(0) * x(0));
    g(1) = 200 * (x(1) - x(0) * x(0));
    return (1 - x(0)) * (1 - x(0)) + 100 * std::pow(x(1) - x(0) * x(0), 2);
  };
  planner::LbfgsOptions opt;
  opt.max_iter = 1000;
  const auto q = planner::minimize_lbfgs(rosen, Eigen::Vector2d(-1.2, 1.0), opt);
  CHECK(q.cost <= q.initial_cost);
  CHECK((q.x - Eigen::Vector2d(1, 1)).norm() < 1e-3);
}

TEST_CASE("lbfgs reports a non-finite start") {
  const planner::Objective bad = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Zero(1);
    return std::nan("");
  };
  CHECK(planner::minimize_lbfgs(bad, Eigen::VectorXd::Zero(1)).status == planner::LbfgsStatus::NonFinite);
}

TEST_CASE("initial guess") {
  const auto g = planner::initial_guess(empty_request({0, 0}, {5, 0}));
  REQUIRE(g.waypoints.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK((g.waypoints[i] - Vec2(i + 1, 0)).norm() < 1e-12);
  for (double d : g.durations()) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.end.vel.norm() == 0.0);
  CHECK(g.end.acc.norm() == 0.0);

  const auto z = planner::initial_guess(empty_request({1, 2}, {1, 2}));
  for (const auto& w : z.waypoints) CHECK((w - Vec2(1, 2)).norm() == 0.0);
  for (double d : z.durations()) CHECK(d == doctest::Approx(2.0 * traj::kMinDuration).epsilon(1e-12));

  PlanRequest moving = empty_request({0, 0}, {3, 1});
  moving.start.vel = {0.3, 0.1};
  moving.start.acc = {0.0, 0.2};
  const auto m = planner::initial_guess(moving);
  CHECK((m.start.vel - moving.start.vel).norm() == 0.0);
  CHECK((m.start.acc - moving.start.acc).norm() == 0.0);

  // Rotating the request rotates the guess.
  const double a = 0.7;
  const auto base = planner::initial_guess(empty_request({0, 0}, {4, 1}));
  const auto turned = planner::initial_guess(empty_request({0, 0}, rot(a) * Vec2(4, 1)));
  for (std::size_t i = 0; i < base.waypoints.size(); ++i) {
    CHECK((rot(a) * base.waypoints[i] - turned.waypoints[i]).norm() < 1e-12);
  }
  for (int i = 0; i < base.num_pieces(); ++i) CHECK(base.tau[i] == doctest::Approx(turned.tau[i]));
}

TEST_CASE("empty map solve is near straight") {
  const auto r = planner::solve(empty_request({0, 0}, {5, 0}));
  REQUIRE(r.status != planner::PlanStatus::Failed);
  double dev = 0.0;
  for (double t = 0; t <= r.traj.total_duration(); t += 0.02) {
    dev = std::max(dev, std::abs(r.traj.eval(t, 0).pos().y()));
  }
  CHECK(dev < 0.05);
  CHECK(r.final_cost <= r.initial_cost + 1e-12);
  CHECK((r.traj.eval(r.traj.total_duration(), 0).pos() - Vec2(5, 0)).norm() < 1e-9);
}

TEST_CASE("converged status implies a small gradient") {
  const PlanRequest req = empty_request({0, 0}, {3, 0});
  const auto r = planner::solve(req);
  if (r.status == planner::PlanStatus::Converged) {
    // Rebuild the decision vector from the solution's knots.
    traj::TrajParams p = planner::initial_guess(req);
    for (int i = 0; i + 1 < r.traj.num_pieces(); ++i) {
      p.waypoints[i] = r.traj.eval(r.traj.start_time(i + 1), 0).pos();
    }
    for (int i = 0; i < r.traj.num_pieces(); ++i) {
      p.tau[i] = traj::tau_from_duration(r.traj.duration(i));
    }
    Eigen::VectorXd g;
    planner::evaluate_params(p, req, {}, &g);
    CHECK(g.lpNorm<Eigen::Infinity>() <= 1e-5 * 1.01);
  }
}

TEST_CASE("obstacle on the segment is avoided") {
  PlanRequest req = empty_request({-3, 0}, {3, 0});
  req.field = cost::ObstacleField::from_boxes({-5, -5}, 0.1, 100, 100, {{{-0.05, -0.05}, {0.05, 0.05}}});
  const auto r = planner::solve(req);
  REQUIRE(r.status != planner::PlanStatus::Failed);
  for (double t = 0; t <= r.traj.total_duration(); t += 0.02) {
    const Vec2 p = r.traj.eval(t, 0).pos();
    CHECK(cost::static_clearance(req.field, p, req.limits.robot_radius) >= 0.0);
  }
}

TEST_CASE("higher time weight gives a shorter plan") {
  PlanRequest req = empty_request({0, 0}, {4, 2});
  const auto slow = planner::solve(req);
  req.weights.w_T = 5.0;
  const auto fast = planner::solve(req);
  CHECK(fast.traj.total_duration() < slow.traj.total_duration());
}

TEST_CASE("start inside an obstacle fails") {
  PlanRequest req = empty_request({0, 0}, {3, 0});
  req.field = cost::ObstacleField::from_boxes({-5, -5}, 0.1, 100, 100, {{{-0.5, -0.5}, {0.5, 0.5}}});
  CHECK(planner::solve(req).status == planner::PlanStatus::Failed);
  req.start.pos = {-1.0, 0.0};
  CHECK(planner::solve(req).status != planner::PlanStatus::Failed);
}

TEST_CASE("solver is deterministic") {
  PlanRequest req = empty_request({0, 0}, {4, -1});
  req.peds = {{{2.0, -0.3}, {-0.5, 0.2}, 0.3}};
  const auto a = planner::solve(req), b = planner::solve(req);
  CHECK(a.iterations == b.iterations);
  CHECK(a.final_cost == b.final_cost);
  for (int i = 0; i < a.traj.num_pieces(); ++i) CHECK(a.traj.coeffs(i) == b.traj.coeffs(i));
}

TEST_CASE("raising w_h does not reduce pedestrian clearance") {
  PlanRequest req = empty_request({0, 0}, {5, 0});
  req.peds = {{{2.5, 0.4}, {0.0, 0.0}, 0.3}};
  double prev = -1e9;
  for (double wh : {0.1, 1.0, 5.0}) {
    req.weights.w_h = wh;
    const auto r = planner::solve(req);
    double m = 1e9;
    for (double t = 0; t <= r.traj.total_duration(); t += 0.02) {
      m = std::min(m, cost::dynamic_clearance(req.peds, r.traj.eval(t, 0).pos(), t, req.limits.robot_radius));
    }
    CHECK(m >= prev - 1e-3);
    prev = m;
  }
}

TEST_CASE("replan trigger") {
  const auto plan = planner::solve(empty_request({0, 0}, {5, 0})).traj;
  const cost::ObstacleField none;
  const cost::PlannerLimits lim;
  CHECK_FALSE(planner::replan_needed(plan, 0.0, none, {}, lim));

  const Vec2 ahead = plan.eval(1.0, 0).pos();
  const cost::PedestrianSnapshot blocker{{ahead, {0, 0}, 0.3}};
  CHECK(planner::replan_needed(plan, 0.0, none, blocker, lim));

  // Pedestrian crossing where the robot was 2 s ago, moving away.
  const double t_now = 3.0;
  const Vec2 past = plan.eval(1.0, 0).pos();
  const cost::PedestrianSnapshot behind{{past + Vec2(0, -1.2), {0, -1.0}, 0.3}};
  CHECK_FALSE(planner::replan_needed(plan, t_now, none, behind, lim));
}

TEST_CASE("local goal selection") {
  const std::vector<Vec2> straight{{0, 0}, {10, 0}};
  CHECK((planner::select_local_goal(straight, {0, 0}, 5.0) - Vec2(5, 0)).norm() < 1e-12);
  CHECK((planner::select_local_goal(straight, {12, 1}, 5.0) - Vec2(10, 0)).norm() < 1e-12);
  const std::vector<Vec2> ell{{0, 0}, {4, 0}, {4, 4}};
  CHECK((planner::select_local_goal(ell, {4, 0}, 2.0) - Vec2(4, 2)).norm() < 1e-12);
  const std::vector<Vec2> single{{1, 1}};
  CHECK((planner::select_local_goal(single, {0, 0}, 5.0) - Vec2(1, 1)).norm() == 0.0);
}

TEST_CASE("request dump round-trips") {
  PlanRequest req = empty_request({0.1, 0.2}, {3, 1});
  req.start.vel = {0.3, -0.1};
  req.field = cost::ObstacleField::from_boxes({-1, -1}, 0.1, 30, 20, {{{0.5, 0.0}, {0.9, 0.3}}});
  req.peds = {{{1.0, 0.5}, {0.1, 0.2}, 0.3}};
  req.weights = {1.5, 0.7, 0.2, 3.0, 0.9};
  const auto back = planner::plan_request_from_json(planner::to_json(req));
  CHECK((back.start.pos - req.start.pos).norm() == 0.0);
  CHECK((back.start.vel - req.start.vel).norm() == 0.0);
  CHECK(back.weights == req.weights);
  CHECK(back.field.occupancy() == req.field.occupancy());
  CHECK(back.peds.size() == 1);
  const auto a = planner::solve(req), b = planner::solve(back);
  CHECK(a.final_cost == b.final_cost);
}

}  // TEST_SUITE
