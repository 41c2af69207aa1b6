#pragma once

#include <span>
#include <vector>

#include "crowdnav/cost/l1_relax.hpp"
#include "crowdnav/cost/obstacle_field.hpp"
#include "crowdnav/traj/poly_traj.hpp"

namespace crowdnav::cost {

inline constexpr int kDefaultSamplesPerPiece = 30;

// Objective weights (w_T, w_f, w_yr, w_s, w_h), the policy's action.
struct CostWeights {
  double w_T = 1.0;
  double w_f = 1.0;
  double w_yr = 1.0;
  double w_s = 1.0;
  double w_h = 1.0;

  bool valid() const;
  static CostWeights all(double v) { return {v, v, v, v, v}; }
  friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

struct PlannerLimits {
  double v_bar = 1.0;        // [m/s]
  double a_bar = 1.0;        // [m/s^2]
  double yr_bar = 0.2;       // [rad/s]
  double d_s_th = 1.0;       // [m]
  double d_h_th = 1.0;       // [m]
  double robot_radius = 0.4; // [m]
  double ped_radius = 0.3;   // [m]

  bool valid() const;
};

struct PedestrianState {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  double radius = 0.3;
};

// Pedestrians as seen at plan start; propagated at constant velocity.
using PedestrianSnapshot = std::vector<PedestrianState>;

// Gradient shaped like the trajectory: one coefficient matrix and one
// duration derivative per piece.
struct CostGrad {
  std::vector<traj::CoeffMat> coeffs;
  std::vector<double> durations;

  CostGrad() = default;
  explicit CostGrad(int pieces)
      : coeffs(pieces, traj::CoeffMat::Zero()), durations(pieces, 0.0) {}
  void add_scaled(const CostGrad& other, double scale);
  void scale(double s);
};

struct TermResult {
  double value = 0.0;
  CostGrad grad;
};

struct CostTerms {
  double control = 0.0;
  double time = 0.0;
  double feasibility = 0.0;
  double yaw_rate = 0.0;
  double static_obs = 0.0;
  double dynamic_obs = 0.0;
};

struct TotalCost {
  double value = 0.0;
  CostTerms terms;  // unweighted term values
  CostGrad grad;
};

// Sampling and relaxation settings shared by the penalty terms.
struct PenaltyOptions {
  int samples_per_piece = kDefaultSamplesPerPiece;
  double mu = kDefaultRelaxMu;
};

// Integral of squared jerk, exact per piece.
TermResult control_effort(const traj::PiecewisePolyTraj& traj);

TermResult feasibility_cost(const traj::PiecewisePolyTraj& traj, const PlannerLimits& limits,
                            const PenaltyOptions& opt = {});

// Flat-output yaw rate (v_x a_y - v_y a_x) / max(|v|^2, v_eps^2).
TermResult yaw_rate_cost(const traj::PiecewisePolyTraj& traj, const PlannerLimits& limits,
                         const PenaltyOptions& opt = {});

// d_s(t) = esdf(p(t)) - robot_radius; d_s = 0 outside the map.
TermResult static_cost(const traj::PiecewisePolyTraj& traj, const ObstacleField& field,
                       const PlannerLimits& limits, const PenaltyOptions& opt = {});

// d_h(t) = min_i |p(t) - (p_i + v_i t)| - r_i - robot_radius.
TermResult dynamic_cost(const traj::PiecewisePolyTraj& traj, const PedestrianSnapshot& peds,
                        const PlannerLimits& limits, const PenaltyOptions& opt = {});

TotalCost total_cost(const traj::PiecewisePolyTraj& traj, const CostWeights& weights,
                     const ObstacleField& field, const PedestrianSnapshot& peds,
                     const PlannerLimits& limits, const PenaltyOptions& opt = {});

// Clearance helpers used by the replan check and by tests.
double static_clearance(const ObstacleField& field, const Vec2& p, double robot_radius);
double dynamic_clearance(const PedestrianSnapshot& peds, const Vec2& p, double t,
                         double robot_radius);

}  // namespace crowdnav::cost
