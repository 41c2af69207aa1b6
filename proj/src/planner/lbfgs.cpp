#include "crowdnav/planner/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <exception>
#include <limits>

namespace crowdnav::planner {

namespace {

double safe_eval(const Objective& f, const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  try {
    const double v = f(x, g);
    if (!std::isfinite(v) || !g.allFinite()) return std::numeric_limits<double>::infinity();
    return v;
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& opt) {
  const Eigen::Index n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);
  res.grad = Eigen::VectorXd::Zero(n);
  res.cost = safe_eval(objective, res.x, res.grad);
  res.initial_cost = res.cost;
  if (!std::isfinite(res.cost)) {
    res.status = LbfgsStatus::NonFinite;
    return res;
  }
  if (res.grad.lpNorm<Eigen::Infinity>() <= opt.g_tol) {
    res.status = LbfgsStatus::Converged;
    return res;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd g_new(n), x_new(n), d(n);
  std::vector<double> alpha_buf(opt.memory);

  res.status = LbfgsStatus::MaxIter;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    // Two-loop recursion.
    d = -res.grad;
    const int k = static_cast<int>(s_hist.size());
    for (int i = k - 1; i >= 0; --i) {
      alpha_buf[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha_buf[i] * y_hist[i];
    }
    if (k > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha_buf[i] - beta) * s_hist[i];
    }
    double slope = d.dot(res.grad);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -res.grad;
      slope = d.dot(res.grad);
    }

    double step = s_hist.empty() ? 1.0 / std::max(d.norm(), 1e-12) : 1.0;
    bool accepted = false;
    bool any_finite = false;
    double f_new = 0.0;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      x_new = res.x + step * d;
      f_new = safe_eval(objective, x_new, g_new);
      if (std::isfinite(f_new)) {
        any_finite = true;
        if (f_new <= res.cost + opt.armijo_c * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= opt.shrink;
    }
    if (!accepted) {
      res.status = any_finite ? LbfgsStatus::LineSearchStalled : LbfgsStatus::NonFinite;
      break;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - res.grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.squaredNorm()) {
      if (static_cast<int>(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }

    const double decrease = res.cost - f_new;
    res.x = x_new;
    res.grad = g_new;
    const double prev = res.cost;
    res.cost = f_new;
    res.iterations = iter + 1;

    if (res.grad.lpNorm<Eigen::Infinity>() <= opt.g_tol) {
      res.status = LbfgsStatus::Converged;
      break;
    }
    if (decrease <= opt.cost_rel_tol * std::max(std::abs(prev), 1.0)) {
      res.status = LbfgsStatus::SmallDecrease;
      break;
    }
  }
  return res;
}

}  // namespace crowdnav::planner
