#include "crowdnav/cost/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdnav::cost {

using traj::CoeffMat;
using traj::Derivatives;
using traj::PiecewisePolyTraj;

bool CostWeights::valid() const {
  for (double w : {w_T, w_f, w_yr, w_s, w_h}) {
    if (!std::isfinite(w) || w <= 0.0) return false;
  }
  return true;
}

bool PlannerLimits::valid() const {
  for (double v : {v_bar, a_bar, yr_bar, d_s_th, d_h_th, robot_radius, ped_radius}) {
    if (!std::isfinite(v) || v <= 0.0) return false;
  }
  return true;
}

void CostGrad::add_scaled(const CostGrad& other, double s) {
  if (coeffs.empty()) *this = CostGrad(static_cast<int>(other.coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    coeffs[i] += s * other.coeffs[i];
    durations[i] += s * other.durations[i];
  }
}

void CostGrad::scale(double s) {
  for (auto& c : coeffs) c *= s;
  for (auto& d : durations) d *= s;
}

namespace {

struct Sample {
  int piece = 0;
  double s = 0.0;
  double t_abs = 0.0;
  Derivatives d;
};

// Integrand value and its partials w.r.t. pos/vel/acc and absolute time.
struct Partials {
  double value = 0.0;
  Vec2 d_pos = Vec2::Zero();
  Vec2 d_vel = Vec2::Zero();
  Vec2 d_acc = Vec2::Zero();
  double d_t = 0.0;
};

// Trapezoidal quadrature over n evenly spaced intervals per piece. Sample
// locations scale with the piece duration, and absolute sample times depend
// on all preceding durations; both paths enter the duration gradient.
template <class Integrand>
TermResult integrate_samples(const PiecewisePolyTraj& traj, int n, Integrand&& integrand) {
  const int m = traj.num_pieces();
  TermResult out;
  out.grad = CostGrad(m);
  n = std::max(n, 2);
  std::vector<double> time_shift(m, 0.0);  // sum of w * dL/dt_abs per piece

  for (int i = 0; i < m; ++i) {
    const CoeffMat& c = traj.coeffs(i);
    const double T = traj.duration(i);
    const double t0 = traj.start_time(i);
    const double h = T / n;
    for (int j = 0; j <= n; ++j) {
      const double frac = static_cast<double>(j) / n;
      const double s = T * frac;
      const double w = (j == 0 || j == n) ? 0.5 * h : h;
      Sample smp{i, s, t0 + s, traj::eval_piece(c, s, 3)};
      const Partials p = integrand(smp);
      if (p.value == 0.0 && p.d_t == 0.0 && p.d_pos.isZero(0) && p.d_vel.isZero(0) &&
          p.d_acc.isZero(0)) {
        continue;
      }
      out.value += w * p.value;

      // d/dc_k of pos, vel, acc at s: s^k, k s^{k-1}, k (k-1) s^{k-2}.
      double sk[6];
      sk[0] = 1.0;
      for (int k = 1; k < 6; ++k) sk[k] = sk[k - 1] * s;
      for (int k = 0; k < 6; ++k) {
        Vec2 g = sk[k] * p.d_pos;
        if (k >= 1) g += k * sk[k - 1] * p.d_vel;
        if (k >= 2) g += k * (k - 1) * sk[k - 2] * p.d_acc;
        out.grad.coeffs[i].row(k) += w * g.transpose();
      }

      const double dlds = p.d_pos.dot(smp.d.vel()) + p.d_vel.dot(smp.d.acc()) +
                          p.d_acc.dot(smp.d.jerk()) + p.d_t;
      out.grad.durations[i] += (w / T) * p.value + w * dlds * frac;
      time_shift[i] += w * p.d_t;
    }
  }
  // t_abs of piece i includes T_k for every k < i.
  double suffix = 0.0;
  for (int i = m - 1; i >= 0; --i) {
    out.grad.durations[i] += suffix;
    suffix += time_shift[i];
  }
  return out;
}

}  // namespace

TermResult control_effort(const PiecewisePolyTraj& traj) {
  const int m = traj.num_pieces();
  TermResult out;
  out.grad = CostGrad(m);
  for (int i = 0; i < m; ++i) {
    const CoeffMat& c = traj.coeffs(i);
    const double t1 = traj.duration(i), t2 = t1 * t1, t3 = t2 * t1, t4 = t2 * t2, t5 = t4 * t1;
    const auto c3 = c.row(3), c4 = c.row(4), c5 = c.row(5);
    out.value += 36.0 * c3.squaredNorm() * t1 + 144.0 * c3.dot(c4) * t2 +
                 (192.0 * c4.squaredNorm() + 240.0 * c3.dot(c5)) * t3 + 720.0 * c4.dot(c5) * t4 +
                 720.0 * c5.squaredNorm() * t5;
    out.grad.coeffs[i].row(3) = 72.0 * c3 * t1 + 144.0 * c4 * t2 + 240.0 * c5 * t3;
    out.grad.coeffs[i].row(4) = 144.0 * c3 * t2 + 384.0 * c4 * t3 + 720.0 * c5 * t4;
    out.grad.coeffs[i].row(5) = 240.0 * c3 * t3 + 720.0 * c4 * t4 + 1440.0 * c5 * t5;
    out.grad.durations[i] = 36.0 * c3.squaredNorm() + 288.0 * c3.dot(c4) * t1 +
                            (576.0 * c4.squaredNorm() + 720.0 * c3.dot(c5)) * t2 +
                            2880.0 * c4.dot(c5) * t3 + 3600.0 * c5.squaredNorm() * t4;
  }
  return out;
}

TermResult feasibility_cost(const PiecewisePolyTraj& traj, const PlannerLimits& limits,
                            const PenaltyOptions& opt) {
  const double v2 = limits.v_bar * limits.v_bar;
  const double a2 = limits.a_bar * limits.a_bar;
  return integrate_samples(traj, opt.samples_per_piece, [&](const Sample& s) {
    Partials p;
    const auto [lv, dlv] = l1_relax(s.d.vel().squaredNorm() - v2, opt.mu);
    const auto [la, dla] = l1_relax(s.d.acc().squaredNorm() - a2, opt.mu);
    p.value = lv + la;
    p.d_vel = 2.0 * dlv * s.d.vel();
    p.d_acc = 2.0 * dla * s.d.acc();
    return p;
  });
}

TermResult yaw_rate_cost(const PiecewisePolyTraj& traj, const PlannerLimits& limits,
                         const PenaltyOptions& opt) {
  const double yr2 = limits.yr_bar * limits.yr_bar;
  constexpr double kEps2 = traj::kYawSpeedEps * traj::kYawSpeedEps;
  return integrate_samples(traj, opt.samples_per_piece, [&](const Sample& s) {
    Partials p;
    const Vec2& v = s.d.vel();
    const Vec2& a = s.d.acc();
    const double speed2 = v.squaredNorm();
    const bool clamped = speed2 <= kEps2;
    const double den = clamped ? kEps2 : speed2;
    const double cross = v.x() * a.y() - v.y() * a.x();
    const double yr = cross / den;
    const auto [l, dl] = l1_relax(yr * yr - yr2, opt.mu);
    p.value = l;
    if (dl == 0.0) return p;
    const double dl_dyr = dl * 2.0 * yr;
    Vec2 dyr_dv = Vec2(a.y(), -a.x()) / den;
    if (!clamped) dyr_dv -= (cross * 2.0 / (den * den)) * v;
    const Vec2 dyr_da = Vec2(-v.y(), v.x()) / den;
    p.d_vel = dl_dyr * dyr_dv;
    p.d_acc = dl_dyr * dyr_da;
    return p;
  });
}

double static_clearance(const ObstacleField& field, const Vec2& p, double robot_radius) {
  if (field.empty()) return ObstacleField::kFarDistance - robot_radius;
  const auto d = field.distance(p);
  return d.in_map ? d.value - robot_radius : 0.0;
}

TermResult static_cost(const PiecewisePolyTraj& traj, const ObstacleField& field,
                       const PlannerLimits& limits, const PenaltyOptions& opt) {
  if (field.empty()) return TermResult{0.0, CostGrad(traj.num_pieces())};
  return integrate_samples(traj, opt.samples_per_piece, [&](const Sample& s) {
    Partials p;
    const auto d = field.distance(s.d.pos());
    const double clearance = d.in_map ? d.value - limits.robot_radius : 0.0;
    const auto [l, dl] = l1_relax(limits.d_s_th - clearance, opt.mu);
    p.value = l;
    if (d.in_map) p.d_pos = -dl * d.grad;
    return p;
  });
}

double dynamic_clearance(const PedestrianSnapshot& peds, const Vec2& p, double t,
                         double robot_radius) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ped : peds) {
    const Vec2 q = ped.pos + ped.vel * t;
    best = std::min(best, (p - q).norm() - ped.radius);
  }
  return best - robot_radius;
}

TermResult dynamic_cost(const PiecewisePolyTraj& traj, const PedestrianSnapshot& peds,
                        const PlannerLimits& limits, const PenaltyOptions& opt) {
  if (peds.empty()) return TermResult{0.0, CostGrad(traj.num_pieces())};
  return integrate_samples(traj, opt.samples_per_piece, [&](const Sample& s) {
    Partials p;
    const Vec2& pos = s.d.pos();
    // Hard minimum; the gradient follows the active pedestrian.
    int active = -1;
    double best = std::numeric_limits<double>::infinity();
    Vec2 diff_best = Vec2::Zero();
    double dist_best = 0.0;
    for (std::size_t k = 0; k < peds.size(); ++k) {
      const Vec2 diff = pos - (peds[k].pos + peds[k].vel * s.t_abs);
      const double dist = diff.norm();
      const double gap = dist - peds[k].radius;
      if (gap < best) {
        best = gap;
        active = static_cast<int>(k);
        diff_best = diff;
        dist_best = dist;
      }
    }
    const double clearance = best - limits.robot_radius;
    const auto [l, dl] = l1_relax(limits.d_h_th - clearance, opt.mu);
    p.value = l;
    if (dl == 0.0 || dist_best <= 0.0) return p;
    const Vec2 n = diff_best / dist_best;
    p.d_pos = -dl * n;
    p.d_t = dl * n.dot(peds[active].vel);
    return p;
  });
}

TotalCost total_cost(const PiecewisePolyTraj& traj, const CostWeights& w,
                     const ObstacleField& field, const PedestrianSnapshot& peds,
                     const PlannerLimits& limits, const PenaltyOptions& opt) {
  const int m = traj.num_pieces();
  TotalCost out;
  out.grad = CostGrad(m);

  const TermResult ju = control_effort(traj);
  out.terms.control = ju.value;
  out.grad.add_scaled(ju.grad, 1.0);

  out.terms.time = traj.total_duration();
  for (auto& g : out.grad.durations) g += w.w_T;

  const TermResult jf = feasibility_cost(traj, limits, opt);
  out.terms.feasibility = jf.value;
  out.grad.add_scaled(jf.grad, w.w_f);

  const TermResult jy = yaw_rate_cost(traj, limits, opt);
  out.terms.yaw_rate = jy.value;
  out.grad.add_scaled(jy.grad, w.w_yr);

  const TermResult js = static_cost(traj, field, limits, opt);
  out.terms.static_obs = js.value;
  out.grad.add_scaled(js.grad, w.w_s);

  const TermResult jh = dynamic_cost(traj, peds, limits, opt);
  out.terms.dynamic_obs = jh.value;
  out.grad.add_scaled(jh.grad, w.w_h);

  out.value = ju.value + w.w_T * out.terms.time + w.w_f * jf.value + w.w_yr * jy.value +
              w.w_s * js.value + w.w_h * jh.value;
  return out;
}

}  // namespace crowdnav::cost
