#include "crowdnav/verify/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "crowdnav/cost/cost_model.hpp"
#include "crowdnav/planner/st_planner.hpp"
#include "crowdnav/policy/policy_net.hpp"
#include "crowdnav/traj/poly_traj.hpp"

namespace crowdnav::verify {

using Eigen::VectorXd;
using traj::CoeffMat;
using traj::PiecewisePolyTraj;

namespace {

constexpr double kStep = 1e-6;

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

traj::TrajParams random_params(std::mt19937_64& rng, const Vec2& lo, const Vec2& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pieces(2, 5);
  const auto point = [&] {
    return Vec2(lo.x() + u(rng) * (hi.x() - lo.x()), lo.y() + u(rng) * (hi.y() - lo.y()));
  };
  traj::TrajParams p;
  const int m = pieces(rng);
  p.start.pos = point();
  p.start.vel = Vec2(u(rng) - 0.5, u(rng) - 0.5);
  p.start.acc = Vec2(u(rng) - 0.5, u(rng) - 0.5) * 0.5;
  p.end.pos = point();
  // Moving end state: near a rest endpoint the flat yaw rate is too
  // ill-conditioned for a 1e-6 central difference.
  p.end.vel = Vec2(u(rng) - 0.5, u(rng) - 0.5);
  for (int i = 0; i < m - 1; ++i) p.waypoints.push_back(point());
  for (int i = 0; i < m; ++i) p.tau.push_back(traj::tau_from_duration(0.6 + u(rng)));
  p.start_yaw = (u(rng) - 0.5) * 6.0;
  return p;
}

// Flattened (coeffs, durations) perturbation of a trajectory.
PiecewisePolyTraj shifted(const PiecewisePolyTraj& tr, const std::vector<CoeffMat>& dc,
                          const std::vector<double>& dt, double h) {
  std::vector<CoeffMat> c(tr.pieces().begin(), tr.pieces().end());
  std::vector<double> d(tr.durations().begin(), tr.durations().end());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] += h * dc[i];
    d[i] += h * dt[i];
  }
  return PiecewisePolyTraj(c, d, tr.start(), tr.end(), tr.start_yaw());
}

using TermFn = std::function<cost::TermResult(const PiecewisePolyTraj&)>;

// Directional derivative check along random directions.
double term_direction_error(const PiecewisePolyTraj& tr, const TermFn& fn, std::mt19937_64& rng,
                            int directions) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const cost::TermResult base = fn(tr);
  double worst = 0.0;
  for (int k = 0; k < directions; ++k) {
    std::vector<CoeffMat> dc(tr.num_pieces());
    std::vector<double> dt(tr.num_pieces());
    double analytic = 0.0;
    for (int i = 0; i < tr.num_pieces(); ++i) {
      for (int r = 0; r < traj::kNumCoeffs; ++r) {
        for (int a = 0; a < 2; ++a) dc[i](r, a) = n01(rng);
      }
      dt[i] = 0.2 * n01(rng);
      analytic += (base.grad.coeffs[i].array() * dc[i].array()).sum() + base.grad.durations[i] * dt[i];
    }
    const double fp = fn(shifted(tr, dc, dt, kStep)).value;
    const double fm = fn(shifted(tr, dc, dt, -kStep)).value;
    worst = std::max(worst, rel_err((fp - fm) / (2.0 * kStep), analytic, 1e-6));
  }
  return worst;
}

struct CostInstance {
  PiecewisePolyTraj traj;
  traj::TrajParams params;
  cost::ObstacleField field;
  cost::PedestrianSnapshot peds;
  cost::CostWeights weights;
  cost::PlannerLimits limits;
};

CostInstance random_cost_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CostInstance c;
  // 10 m x 10 m map with random boxes; the trajectory stays well inside it.
  std::vector<cost::Box> boxes;
  for (int i = 0; i < 3; ++i) {
    const Vec2 lo(1.0 + 7.0 * u(rng), 1.0 + 7.0 * u(rng));
    boxes.push_back({lo, lo + Vec2(0.3 + u(rng), 0.3 + u(rng))});
  }
  c.field = cost::ObstacleField::from_boxes(Vec2(-1.0, -1.0), 0.1, 120, 120, boxes);
  c.params = random_params(rng, Vec2(2.0, 2.0), Vec2(7.0, 7.0));
  c.traj = traj::construct_minjerk(c.params);
  for (int i = 0; i < 3; ++i) {
    c.peds.push_back({Vec2(2.0 + 5.0 * u(rng), 2.0 + 5.0 * u(rng)),
                      Vec2(u(rng) - 0.5, u(rng) - 0.5), 0.3});
  }
  c.weights = {0.5 + u(rng), 0.5 + u(rng), 0.5 + u(rng), 0.5 + u(rng), 0.5 + u(rng)};
  c.limits.v_bar = 0.6;  // activate the feasibility penalties
  c.limits.a_bar = 0.5;
  c.limits.yr_bar = 0.3;
  return c;
}

// Quadrature sample positions and absolute times (30 intervals per piece).
template <class F>
void for_each_sample(const PiecewisePolyTraj& tr, int n, F&& f) {
  for (int i = 0; i < tr.num_pieces(); ++i) {
    for (int j = 0; j <= n; ++j) {
      const double s = tr.duration(i) * j / n;
      f(traj::eval_piece(tr.coeffs(i), s, 1).pos(), tr.start_time(i) + s);
    }
  }
}

// Any sample within 1e-3 (in cell units) of a bilinear interpolation line.
bool near_grid_line(const CostInstance& c, int n) {
  bool near = false;
  for_each_sample(c.traj, n, [&](const Vec2& p, double) {
    for (int a = 0; a < 2; ++a) {
      const double g = (p(a) - c.field.origin()(a)) / c.field.resolution() - 0.5;
      if (std::abs(g - std::round(g)) < 1e-3) near = true;
    }
  });
  return near;
}

// Any sample whose two closest pedestrian gaps are within 1e-3.
bool near_ped_tie(const CostInstance& c, int n) {
  bool near = false;
  for_each_sample(c.traj, n, [&](const Vec2& p, double t) {
    std::vector<double> gaps;
    for (const auto& q : c.peds) gaps.push_back((p - (q.pos + q.vel * t)).norm() - q.radius);
    std::sort(gaps.begin(), gaps.end());
    if (gaps.size() >= 2 && gaps[1] - gaps[0] < 1e-3) near = true;
  });
  return near;
}

}  // namespace

CheckOutcome minjerk_oracle() {
  CheckOutcome out{"minjerk_oracle", 0, 0, 0.0, 1e-6, false};
  traj::TrajParams p;
  p.start.pos = Vec2(0.0, 0.0);
  p.end.pos = Vec2(1.0, 0.0);
  p.tau = {traj::tau_from_duration(1.0)};
  const PiecewisePolyTraj tr = traj::construct_minjerk(p);
  const double closed = cost::control_effort(tr).value;
  // Composite Simpson over the squared jerk.
  const int n = 2000;
  const double T = tr.total_duration();
  double simpson = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    simpson += w * tr.eval(T * k / n, 3).jerk().squaredNorm();
  }
  simpson *= T / (3.0 * n);
  out.checked = 2;
  out.max_rel_err = std::max(std::abs(closed - 720.0), std::abs(simpson - 720.0));
  out.pass = out.max_rel_err <= out.tolerance;
  return out;
}

CheckOutcome traj_gradcheck(int instances, std::uint64_t seed) {
  CheckOutcome out{"traj_backprop", 0, 0, 0.0, 1e-5, true};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int k = 0; k < instances; ++k) {
    const traj::TrajParams p = random_params(rng, Vec2(-3.0, -3.0), Vec2(3.0, 3.0));
    const int m = p.num_pieces();
    // Smooth scalar: random linear functional of coefficients and durations.
    std::vector<CoeffMat> wc(m);
    std::vector<double> wd(m);
    for (int i = 0; i < m; ++i) {
      for (int r = 0; r < traj::kNumCoeffs; ++r) {
        for (int a = 0; a < 2; ++a) wc[i](r, a) = n01(rng);
      }
      wd[i] = n01(rng);
    }
    const auto scalar = [&](const traj::TrajParams& q) {
      const PiecewisePolyTraj tr = traj::construct_minjerk(q);
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += (tr.coeffs(i).array() * wc[i].array()).sum() + wd[i] * tr.duration(i);
      return s;
    };
    const PiecewisePolyTraj tr = traj::construct_minjerk(p);
    const traj::ParamGrad g = traj::backprop_params(tr, p, wc, wd);
    for (int w = 0; w < m - 1; ++w) {
      for (int a = 0; a < 2; ++a) {
        traj::TrajParams hp = p, hm = p;
        hp.waypoints[w](a) += kStep;
        hm.waypoints[w](a) -= kStep;
        const double fd = (scalar(hp) - scalar(hm)) / (2.0 * kStep);
        out.max_rel_err = std::max(out.max_rel_err, rel_err(fd, g.waypoints[w](a), 1e-4));
        ++out.checked;
      }
    }
    for (int i = 0; i < m; ++i) {
      traj::TrajParams hp = p, hm = p;
      hp.tau[i] += kStep;
      hm.tau[i] -= kStep;
      const double fd = (scalar(hp) - scalar(hm)) / (2.0 * kStep);
      out.max_rel_err = std::max(out.max_rel_err, rel_err(fd, g.tau[i], 1e-4));
      ++out.checked;
    }
  }
  out.pass = out.max_rel_err <= out.tolerance;
  return out;
}

std::vector<CheckOutcome> cost_gradchecks(int instances, std::uint64_t seed) {
  const cost::PenaltyOptions opt;
  const int n = opt.samples_per_piece;
  struct Term {
    std::string name;
    bool static_edges;
    bool ped_ties;
    std::function<cost::TermResult(const CostInstance&, const PiecewisePolyTraj&)> fn;
  };
  const std::vector<Term> terms = {
      {"cost_control", false, false, [](const CostInstance&, const PiecewisePolyTraj& t) { return cost::control_effort(t); }},
      {"cost_feasibility", false, false, [&](const CostInstance& c, const PiecewisePolyTraj& t) { return cost::feasibility_cost(t, c.limits, opt); }},
      {"cost_yaw_rate", false, false, [&](const CostInstance& c, const PiecewisePolyTraj& t) { return cost::yaw_rate_cost(t, c.limits, opt); }},
      {"cost_static", true, false, [&](const CostInstance& c, const PiecewisePolyTraj& t) { return cost::static_cost(t, c.field, c.limits, opt); }},
      {"cost_dynamic", false, true, [&](const CostInstance& c, const PiecewisePolyTraj& t) { return cost::dynamic_cost(t, c.peds, c.limits, opt); }},
      {"cost_total", true, true, [&](const CostInstance& c, const PiecewisePolyTraj& t) {
         const cost::TotalCost tc = cost::total_cost(t, c.weights, c.field, c.peds, c.limits, opt);
         return cost::TermResult{tc.value, tc.grad};
       }},
  };

  std::vector<CheckOutcome> outs;
  for (std::size_t ti = 0; ti < terms.size(); ++ti) {
    const Term& term = terms[ti];
    CheckOutcome out{term.name, 0, 0, 0.0, 1e-4, true};
    std::mt19937_64 rng(seed + 1000 * ti);
    for (int attempt = 0; out.checked < instances && attempt < 50 * instances; ++attempt) {
      const CostInstance c = random_cost_instance(rng);
      if ((term.static_edges && near_grid_line(c, n)) || (term.ped_ties && near_ped_tie(c, n))) {
        ++out.excluded;
        continue;
      }
      const TermFn fn = [&](const PiecewisePolyTraj& t) { return term.fn(c, t); };
      out.max_rel_err = std::max(out.max_rel_err, term_direction_error(c.traj, fn, rng, 3));
      ++out.checked;
    }
    out.pass = out.checked == instances && out.max_rel_err <= out.tolerance;
    outs.push_back(out);
  }

  // Total cost through the decision vector (waypoints, tau).
  CheckOutcome out{"cost_total_params", 0, 0, 0.0, 1e-4, true};
  std::mt19937_64 rng(seed + 7777);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int attempt = 0; out.checked < instances && attempt < 50 * instances; ++attempt) {
    const CostInstance c = random_cost_instance(rng);
    if (near_grid_line(c, n) || near_ped_tie(c, n)) {
      ++out.excluded;
      continue;
    }
    planner::PlanRequest req;
    req.field = c.field;
    req.peds = c.peds;
    req.weights = c.weights;
    req.limits = c.limits;
    const planner::PlannerConfig cfg;
    VectorXd g;
    const VectorXd x = planner::pack_params(c.params);
    planner::evaluate_params(c.params, req, cfg, &g);
    for (int k = 0; k < 3; ++k) {
      VectorXd d(x.size());
      for (int i = 0; i < d.size(); ++i) d(i) = n01(rng);
      const double fp = planner::evaluate_params(planner::unpack_params(x + kStep * d, c.params), req, cfg, nullptr);
      const double fm = planner::evaluate_params(planner::unpack_params(x - kStep * d, c.params), req, cfg, nullptr);
      out.max_rel_err = std::max(out.max_rel_err, rel_err((fp - fm) / (2.0 * kStep), g.dot(d), 1e-6));
    }
    ++out.checked;
  }
  out.pass = out.checked == instances && out.max_rel_err <= out.tolerance;
  outs.push_back(out);
  return outs;
}

CheckOutcome policy_gradcheck(int params, std::uint64_t seed) {
  CheckOutcome out{"policy_backward", 0, 0, 0.0, 1e-3, true};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  policy::PolicyNet net(seed);
  // Non-trivial BN statistics and a non-degenerate actor head.
  int off = 0;
  for (int ch : {16, 32, 32}) {
    for (int i = 0; i < ch; ++i) {
      net.bn_stats()(off + i) = 0.2 * (u(rng) - 0.5);
      net.bn_stats()(off + ch + i) = 0.5 + u(rng);
    }
    off += 2 * ch;
  }
  {
    const auto& b = net.block("actor3.w");
    for (int i = 0; i < b.size(); ++i) net.params()(b.offset + i) = 0.3 * (u(rng) - 0.5);
  }
  obs::Observation o;
  const double levels[3] = {0.0, 0.5, 1.0};
  for (int i = 0; i < obs::kGridSize * obs::kGridSize; ++i) {
    o.static_map[i] = levels[static_cast<int>(u(rng) * 3) % 3];
    o.ped_map[i] = levels[static_cast<int>(u(rng) * 3) % 3];
  }
  o.kin_state = {u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5};

  policy::ActionVec wa;
  for (int i = 0; i < policy::kActionDim; ++i) wa(i) = u(rng) - 0.5;
  const double wv = 0.7;
  const auto loss = [&](const policy::PolicyNet& n) {
    const auto r = n.forward(o);
    return wa.dot(r.mean) + wv * r.value;
  };
  policy::PolicyNet::Cache cache;
  net.forward(o, &cache);
  VectorXd grad = VectorXd::Zero(net.num_params());
  net.backward(cache, wa, wv, grad);

  // Guarantee coverage of conv, attention and head blocks, then random picks.
  std::vector<int> idx;
  for (const char* name : {"conv1.w", "conv2.w", "conv3.w", "bn2.gamma", "att.w", "att.b", "env1.w", "st1.w", "actor1.w", "critic3.w"}) {
    const auto& b = net.block(name);
    idx.push_back(b.offset + static_cast<int>(u(rng) * b.size()) % b.size());
  }
  while (static_cast<int>(idx.size()) < params) idx.push_back(static_cast<int>(u(rng) * net.num_params()) % net.num_params());

  for (int i : idx) {
    policy::PolicyNet np = net, nm = net;
    np.params()(i) += kStep;
    nm.params()(i) -= kStep;
    const double fd = (loss(np) - loss(nm)) / (2.0 * kStep);
    out.max_rel_err = std::max(out.max_rel_err, rel_err(fd, grad(i), 1e-6));
    ++out.checked;
  }
  out.pass = out.max_rel_err <= out.tolerance;
  return out;
}

std::vector<CheckOutcome> run_all() {
  std::vector<CheckOutcome> all{minjerk_oracle(), traj_gradcheck()};
  for (auto& c : cost_gradchecks()) all.push_back(c);
  all.push_back(policy_gradcheck());
  return all;
}

}  // namespace crowdnav::verify
