#pragma once

#include <functional>

#include <Eigen/Core>

namespace crowdnav::planner {

struct LbfgsOptions {
  int memory = 8;
  int max_iter = 200;
  double g_tol = 1e-5;         // infinity norm of the gradient
  double cost_rel_tol = 1e-8;  // relative decrease between iterations
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
};

enum class LbfgsStatus {
  Converged,  // gradient below g_tol
  MaxIter,
  SmallDecrease,  // relative cost decrease below cost_rel_tol
  LineSearchStalled,  // no Armijo point among finite trials
  NonFinite,  // objective non-finite at the start or at every trial
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  double initial_cost = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIter;
};

// Returns the cost and writes the gradient. May return a non-finite value
// (or throw) to signal an inadmissible point; the line search backs off.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Limited-memory BFGS with Armijo backtracking. Deterministic.
LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

}  // namespace crowdnav::planner
