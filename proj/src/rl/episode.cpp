#include "crowdnav/rl/episode.hpp"

#include <algorithm>
#include <cmath>

#include "crowdnav/rl/reward.hpp"

namespace crowdnav::rl {

Agent fixed_agent(const cost::CostWeights& w) {
  return [w](const obs::Observation&) {
    Decision d;
    d.action.weights = w;
    for (int i = 0; i < policy::kActionDim; ++i) {
      const double wi = i == 0 ? w.w_T : i == 1 ? w.w_f : i == 2 ? w.w_yr : i == 3 ? w.w_s : w.w_h;
      d.action.raw(i) = std::log(wi);
    }
    return d;
  };
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::GoalReached: return "GoalReached";
    case Termination::Timeout: return "Timeout";
    case Termination::PlannerFailure: return "PlannerFailure";
  }
  return "?";
}

EpisodeResult run_episode(bench::ScenarioInstance inst, const Agent& agent,
                          const EpisodeConfig& config, const DecisionHook& hook) {
  world::WorldState& w = inst.world;
  const cost::ObstacleField empty_field;
  const cost::ObstacleField& field = w.field ? *w.field : empty_field;
  cost::PlannerLimits limits = config.limits;
  limits.robot_radius = w.robot.radius;

  EpisodeResult res;
  traj::PiecewisePolyTraj plan;
  bool have_plan = false;
  std::int64_t plan_tick = 0;
  int fail_streak = 0;

  const auto plan_age = [&] { return static_cast<double>(w.tick - plan_tick) * world::kDt; };
  const auto attempt_plan = [&](const cost::CostWeights& weights, int decision,
                                const obs::Observation* o) {
    planner::PlanRequest req;
    req.start.pos = w.robot.pos();
    req.start.vel = w.robot.velocity();
    req.start.yaw = w.robot.theta;
    if (have_plan) req.start.acc = plan.flat_state(std::min(plan_age(), plan.total_duration())).acc;
    req.local_goal = planner::select_local_goal(inst.global_path, w.robot.pos(), config.lookahead);
    req.field = field;
    req.peds = w.snapshot();
    req.weights = weights;
    req.limits = limits;
    planner::PlanResult r = planner::solve(req, config.planner);
    ++res.plans;
    if (hook && o != nullptr) hook(decision, *o, req, r);
    if (r.status == planner::PlanStatus::Failed) {
      ++fail_streak;
    } else {
      fail_streak = 0;
      plan = std::move(r.traj);
      have_plan = true;
      plan_tick = w.tick;
    }
  };

  Vec2 last_pos = w.robot.pos();
  for (int k = 0;; ++k) {
    const obs::Observation o = obs::encode(w, have_plan ? &plan : nullptr, plan_age());
    const Decision dec = agent(o);
    ++res.decisions;
    attempt_plan(dec.action.weights, k, &o);

    StepRecord step;
    if (config.record_observations) step.obs = o;
    step.raw = dec.action.raw;
    step.weights = dec.action.weights;
    step.log_prob = dec.action.log_prob;
    step.value = dec.value;
    step.std = dec.std;

    bool failure = fail_streak >= config.fail_streak_limit;
    bool timeout = false;
    bool goal = false;
    for (int j = 0; j < config.decision_ticks && !failure; ++j) {
      world::world_step(w, have_plan ? &plan : nullptr, plan_age());
      res.distance += (w.robot.pos() - last_pos).norm();
      last_pos = w.robot.pos();
      if (w.ledger.contact) {
        step.in_collision = true;
        step.collision_speed = std::max(step.collision_speed, std::abs(w.robot.v));
      }
      if (config.record_trace) {
        res.trace.push_back({w.time(), w.robot.x, w.robot.y, w.robot.theta, w.robot.v, w.robot.omega,
                             w.ledger.contact, w.ledger.active, w.nearest_ped_distance(), w.ledger.tcc});
      }
      const auto status = world::episode_status(w, inst.goal, w.time(), inst.time_limit);
      if (status == world::EpisodeStatus::GoalReached) {
        goal = true;
        break;
      }
      if (status == world::EpisodeStatus::Timeout) {
        timeout = true;
        break;
      }
      if ((j + 1) % config.replan_ticks == 0 && j + 1 < config.decision_ticks && have_plan &&
          planner::replan_needed(plan, plan_age(), field, w.snapshot(), limits)) {
        attempt_plan(dec.action.weights, k, nullptr);
        failure = fail_streak >= config.fail_streak_limit;
      }
    }

    step.goal_reached = goal;
    step.early_termination = failure || timeout;
    step.reward = step_reward(step.in_collision, step.collision_speed, goal);
    if (step.early_termination) step.reward += config.termination_penalty;
    step.done = goal || timeout || failure;
    res.ret += step.reward;
    res.steps.push_back(std::move(step));
    if (res.steps.back().done) {
      res.termination = goal ? Termination::GoalReached
                        : failure ? Termination::PlannerFailure
                                  : Termination::Timeout;
      break;
    }
  }

  res.time = w.time();
  res.tcc = w.ledger.tcc;
  res.collided = w.ledger.collided;
  res.complete = res.termination == Termination::GoalReached;
  return res;
}

double replay_return(const std::vector<StepRecord>& steps, double termination_penalty) {
  double total = 0.0;
  for (const auto& s : steps) {
    total += step_reward(s.in_collision, s.collision_speed, s.goal_reached);
    if (s.early_termination) total += termination_penalty;
  }
  return total;
}

}  // namespace crowdnav::rl
