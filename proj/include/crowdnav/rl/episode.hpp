#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "crowdnav/bench/scenario.hpp"
#include "crowdnav/obs/observation.hpp"
#include "crowdnav/planner/st_planner.hpp"
#include "crowdnav/policy/action.hpp"
#include "crowdnav/rl/reward.hpp"

namespace crowdnav::rl {

struct Decision {
  policy::ActionSample action;
  double value = 0.0;
  double std = 0.0;
};

// Maps the current observation to cost weights once per decision step.
using Agent = std::function<Decision(const obs::Observation&)>;

Agent fixed_agent(const cost::CostWeights& w);

struct EpisodeConfig {
  int decision_ticks = 50;  // 1 Hz
  int replan_ticks = 5;     // 10 Hz
  int fail_streak_limit = 3;
  double termination_penalty = kTerminationPenalty;
  double lookahead = planner::kDefaultLookahead;
  planner::PlannerConfig planner;
  cost::PlannerLimits limits;
  bool record_observations = false;
  bool record_trace = false;
};

enum class Termination { GoalReached, Timeout, PlannerFailure };

const char* to_string(Termination t);

struct StepRecord {
  obs::Observation obs;  // filled when record_observations
  policy::ActionVec raw = policy::ActionVec::Zero();
  cost::CostWeights weights;
  double log_prob = 0.0;
  double value = 0.0;
  double std = 0.0;
  double reward = 0.0;
  bool done = false;
  // Inputs to the reward, for replay.
  bool in_collision = false;
  double collision_speed = 0.0;
  bool goal_reached = false;
  bool early_termination = false;
};

struct TraceRow {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;
  bool contact = false;
  bool active = false;
  double nearest_ped = 0.0;
  std::int64_t tcc = 0;
};

struct EpisodeResult {
  std::vector<StepRecord> steps;
  Termination termination = Termination::Timeout;
  double ret = 0.0;
  double time = 0.0;      // simulated seconds
  double distance = 0.0;  // path length driven [m]
  std::int64_t tcc = 0;
  bool collided = false;
  bool complete = false;  // goal reached within the time limit
  int decisions = 0;
  int plans = 0;
  std::vector<TraceRow> trace;
};

// Called after each decision's plan attempt (used for dumps).
using DecisionHook = std::function<void(int decision, const obs::Observation&,
                                        const planner::PlanRequest&, const planner::PlanResult&)>;

EpisodeResult run_episode(bench::ScenarioInstance inst, const Agent& agent,
                          const EpisodeConfig& config, const DecisionHook& hook = {});

// Sum of step_reward over the recorded inputs plus termination penalties.
double replay_return(const std::vector<StepRecord>& steps, double termination_penalty);

}  // namespace crowdnav::rl
