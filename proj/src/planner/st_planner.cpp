#include "crowdnav/planner/st_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdnav/common/errors.hpp"

namespace crowdnav::planner {

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Converged: return "Converged";
    case PlanStatus::MaxIter: return "MaxIter";
    case PlanStatus::Failed: return "Failed";
  }
  return "?";
}

traj::TrajParams initial_guess(const PlanRequest& request, int pieces) {
  traj::TrajParams p;
  const Vec2 a = request.start.pos;
  const Vec2 b = request.local_goal;
  const double length = (b - a).norm();
  const double dur = std::max(length / (pieces * request.limits.v_bar), 2.0 * traj::kMinDuration);
  p.waypoints.resize(pieces - 1);
  for (int i = 1; i < pieces; ++i) {
    p.waypoints[i - 1] = a + (b - a) * (static_cast<double>(i) / pieces);
  }
  p.tau.assign(pieces, traj::tau_from_duration(dur));
  p.start.pos = a;
  p.start.vel = request.start.vel;
  p.start.acc = request.start.acc;
  p.end.pos = b;
  p.start_yaw = request.start.yaw;
  return p;
}

Eigen::VectorXd pack_params(const traj::TrajParams& params) {
  const int nw = static_cast<int>(params.waypoints.size());
  Eigen::VectorXd x(2 * nw + params.num_pieces());
  for (int i = 0; i < nw; ++i) x.segment<2>(2 * i) = params.waypoints[i];
  for (int i = 0; i < params.num_pieces(); ++i) x(2 * nw + i) = params.tau[i];
  return x;
}

traj::TrajParams unpack_params(const Eigen::VectorXd& x, const traj::TrajParams& like) {
  traj::TrajParams p = like;
  const int nw = static_cast<int>(like.waypoints.size());
  for (int i = 0; i < nw; ++i) p.waypoints[i] = x.segment<2>(2 * i);
  for (int i = 0; i < like.num_pieces(); ++i) p.tau[i] = x(2 * nw + i);
  return p;
}

double evaluate_params(const traj::TrajParams& params, const PlanRequest& request,
                       const PlannerConfig& config, Eigen::VectorXd* grad) {
  const traj::PiecewisePolyTraj tr = traj::construct_minjerk(params);
  const cost::TotalCost tc = cost::total_cost(tr, request.weights, request.field, request.peds,
                                              request.limits, config.penalty);
  if (grad != nullptr) {
    const traj::ParamGrad pg = traj::backprop_params(tr, params, tc.grad.coeffs, tc.grad.durations);
    const int nw = static_cast<int>(pg.waypoints.size());
    grad->resize(2 * nw + params.num_pieces());
    for (int i = 0; i < nw; ++i) grad->segment<2>(2 * i) = pg.waypoints[i];
    for (int i = 0; i < params.num_pieces(); ++i) (*grad)(2 * nw + i) = pg.tau[i];
  }
  return tc.value;
}

namespace {

bool start_in_collision(const PlanRequest& request) {
  return !request.field.empty() && request.field.occupied_at(request.start.pos);
}

}  // namespace

PlanResult solve(const PlanRequest& request, const PlannerConfig& config) {
  PlanResult out;
  const traj::TrajParams guess = initial_guess(request, config.pieces);
  if (start_in_collision(request)) {
    out.status = PlanStatus::Failed;
    try {
      out.traj = traj::construct_minjerk(guess);
    } catch (const SingularSystem&) {
    }
    return out;
  }

  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    return evaluate_params(unpack_params(x, guess), request, config, &g);
  };
  const LbfgsResult r = minimize_lbfgs(objective, pack_params(guess), config.lbfgs);
  out.initial_cost = r.initial_cost;
  out.final_cost = r.cost;
  out.iterations = r.iterations;
  switch (r.status) {
    case LbfgsStatus::Converged: out.status = PlanStatus::Converged; break;
    case LbfgsStatus::NonFinite: out.status = PlanStatus::Failed; break;
    default: out.status = PlanStatus::MaxIter; break;
  }
  if (out.status != PlanStatus::Failed) {
    out.traj = traj::construct_minjerk(unpack_params(r.x, guess));
  }
  return out;
}

bool replan_needed(const traj::PiecewisePolyTraj& current, double t_elapsed,
                   const cost::ObstacleField& field, const cost::PedestrianSnapshot& peds,
                   const cost::PlannerLimits& limits) {
  if (current.empty()) return false;
  const double total = current.total_duration();
  const double step = 1.0 / kReplanScanRate;
  for (int k = 0;; ++k) {
    const double t = t_elapsed + k * step;
    if (t > total + 1e-9) break;
    const Vec2 p = current.eval(std::min(t, total), 0).pos();
    if (!field.empty() && cost::static_clearance(field, p, limits.robot_radius) < 0.0) return true;
    if (!peds.empty() && cost::dynamic_clearance(peds, p, t - t_elapsed, limits.robot_radius) < 0.0) {
      return true;
    }
  }
  return false;
}

Vec2 select_local_goal(std::span<const Vec2> path, const Vec2& robot_pos, double lookahead) {
  if (path.size() == 1) return path.front();
  // Nearest point over all segments, as (segment index, fraction).
  double best = std::numeric_limits<double>::infinity();
  std::size_t seg = 0;
  double frac = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Vec2 a = path[i], ab = path[i + 1] - path[i];
    const double len2 = ab.squaredNorm();
    const double f = len2 > 0.0 ? std::clamp((robot_pos - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const double d = (a + f * ab - robot_pos).squaredNorm();
    if (d < best) {
      best = d;
      seg = i;
      frac = f;
    }
  }
  double remaining = lookahead;
  Vec2 cur = path[seg] + frac * (path[seg + 1] - path[seg]);
  for (std::size_t i = seg; i + 1 < path.size(); ++i) {
    const double len = (path[i + 1] - cur).norm();
    if (len >= remaining && len > 0.0) return cur + (path[i + 1] - cur) * (remaining / len);
    remaining -= len;
    cur = path[i + 1];
  }
  return path.back();
}

}  // namespace crowdnav::planner
