#pragma once

#include <span>
#include <vector>

#include "crowdnav/cost/cost_model.hpp"
#include "crowdnav/planner/lbfgs.hpp"
#include "crowdnav/traj/poly_traj.hpp"

namespace crowdnav::planner {

inline constexpr double kDefaultLookahead = 5.0;   // [m]
inline constexpr double kReplanScanRate = 10.0;    // [Hz]

struct PlanRequest {
  traj::FlatState start;
  Vec2 local_goal = Vec2::Zero();
  cost::ObstacleField field;
  cost::PedestrianSnapshot peds;
  cost::CostWeights weights;
  cost::PlannerLimits limits;
};

struct PlannerConfig {
  int pieces = traj::kDefaultPieces;
  cost::PenaltyOptions penalty;
  LbfgsOptions lbfgs;
};

enum class PlanStatus { Converged, MaxIter, Failed };

const char* to_string(PlanStatus s);

struct PlanResult {
  traj::PiecewisePolyTraj traj;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  PlanStatus status = PlanStatus::Failed;
};

// Straight-line guess: evenly spaced waypoints from start to the local goal,
// T_i = max(L / (M v_bar), 2 T_min), rest at the goal.
traj::TrajParams initial_guess(const PlanRequest& request, int pieces = traj::kDefaultPieces);

// Weighted total cost and its gradient w.r.t. the decision vector
// [waypoints (x, y interleaved), tau]. Exposed for gradient checks.
double evaluate_params(const traj::TrajParams& params, const PlanRequest& request,
                       const PlannerConfig& config, Eigen::VectorXd* grad);

Eigen::VectorXd pack_params(const traj::TrajParams& params);
traj::TrajParams unpack_params(const Eigen::VectorXd& x, const traj::TrajParams& like);

// Quasi-Newton solve of the weighted objective. Never throws for planning
// failures; they surface as PlanStatus::Failed.
PlanResult solve(const PlanRequest& request, const PlannerConfig& config = {});

// True if the remaining plan, scanned at 10 Hz from t_elapsed, has a sample
// with negative static or dynamic clearance. Pedestrians are extrapolated at
// constant velocity from now.
bool replan_needed(const traj::PiecewisePolyTraj& current, double t_elapsed,
                   const cost::ObstacleField& field, const cost::PedestrianSnapshot& peds,
                   const cost::PlannerLimits& limits);

// Projects the robot onto the polyline and walks `lookahead` meters further,
// clamped to the path end.
Vec2 select_local_goal(std::span<const Vec2> path, const Vec2& robot_pos,
                       double lookahead = kDefaultLookahead);

}  // namespace crowdnav::planner
