#include "crowdnav/traj/poly_traj.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crowdnav/common/errors.hpp"
#include "crowdnav/traj/banded_system.hpp"

namespace crowdnav::traj {

double duration_from_tau(double tau) {
  // Numerically stable softplus.
  const double sp = tau > 30.0 ? tau : std::log1p(std::exp(tau));
  return kMinDuration + sp;
}

double tau_from_duration(double duration) {
  const double sp = std::max(duration - kMinDuration, 1e-12);
  return sp > 30.0 ? sp : std::log(std::expm1(sp));
}

double duration_dtau(double tau) { return 1.0 / (1.0 + std::exp(-tau)); }

std::vector<double> TrajParams::durations() const {
  std::vector<double> out(tau.size());
  std::transform(tau.begin(), tau.end(), out.begin(), duration_from_tau);
  return out;
}

PiecewisePolyTraj::PiecewisePolyTraj(std::vector<CoeffMat> pieces, std::vector<double> durations,
                                     BoundaryState start, BoundaryState end, double start_yaw)
    : pieces_(std::move(pieces)),
      durations_(std::move(durations)),
      start_(start),
      end_(end),
      start_yaw_(wrap_angle(start_yaw)) {
  start_times_.resize(durations_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < durations_.size(); ++i) {
    start_times_[i] = acc;
    acc += durations_[i];
  }
  total_ = acc;
}

std::pair<int, double> PiecewisePolyTraj::locate(double t) const {
  if (pieces_.empty()) throw OutOfDomain("empty trajectory");
  if (t < 0.0 || t > total_ + 1e-9) {
    throw OutOfDomain("t = " + std::to_string(t) + " outside [0, " + std::to_string(total_) + "]");
  }
  const int last = num_pieces() - 1;
  if (t >= total_) return {last, durations_[last]};
  // First piece whose start is > t, minus one.
  auto it = std::upper_bound(start_times_.begin(), start_times_.end(), t);
  int i = static_cast<int>(it - start_times_.begin()) - 1;
  i = std::clamp(i, 0, last);
  return {i, std::min(t - start_times_[i], durations_[i])};
}

Derivatives eval_piece(const CoeffMat& c, double s, int max_order) {
  Derivatives out;
  // Horner per derivative order.
  Vec2 p = c.row(5).transpose();
  for (int k = 4; k >= 0; --k) p = p * s + c.row(k).transpose();
  out.d[0] = p;
  if (max_order >= 1) {
    Vec2 v = 5.0 * c.row(5).transpose();
    for (int k = 4; k >= 1; --k) v = v * s + k * c.row(k).transpose();
    out.d[1] = v;
  }
  if (max_order >= 2) {
    Vec2 a = 20.0 * c.row(5).transpose();
    a = a * s + 12.0 * c.row(4).transpose();
    a = a * s + 6.0 * c.row(3).transpose();
    a = a * s + 2.0 * c.row(2).transpose();
    out.d[2] = a;
  }
  if (max_order >= 3) {
    Vec2 j = 60.0 * c.row(5).transpose();
    j = j * s + 24.0 * c.row(4).transpose();
    j = j * s + 6.0 * c.row(3).transpose();
    out.d[3] = j;
  }
  return out;
}

Derivatives PiecewisePolyTraj::eval(double t, int max_order) const {
  const auto [i, s] = locate(t);
  return eval_piece(pieces_[i], s, max_order);
}

FlatState flat_state_from(const Derivatives& d, double fallback_yaw) {
  FlatState fs;
  fs.pos = d.pos();
  fs.vel = d.vel();
  fs.acc = d.acc();
  fs.jerk = d.jerk();
  const double speed2 = fs.vel.squaredNorm();
  if (std::sqrt(speed2) >= kYawSpeedEps) {
    fs.yaw = wrap_angle(std::atan2(fs.vel.y(), fs.vel.x()));
  } else {
    fs.yaw = wrap_angle(fallback_yaw);
  }
  const double denom = std::max(speed2, kYawSpeedEps * kYawSpeedEps);
  fs.yaw_rate = (fs.vel.x() * fs.acc.y() - fs.vel.y() * fs.acc.x()) / denom;
  return fs;
}

FlatState PiecewisePolyTraj::flat_state(double t) const {
  const Derivatives d = eval(t, 3);
  if (d.vel().norm() >= kYawSpeedEps) return flat_state_from(d, start_yaw_);

  // Forward-fill: heading at the last instant before t where the speed was
  // still above v_eps, found by a coarse backward scan plus bisection.
  constexpr double kScanStep = 0.01;
  double fallback = start_yaw_;
  double slow = std::min(t, total_);
  while (slow > 0.0) {
    double fast = std::max(0.0, slow - kScanStep);
    Vec2 v = eval(fast, 1).vel();
    if (v.norm() >= kYawSpeedEps) {
      for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (fast + slow);
        const Vec2 vm = eval(mid, 1).vel();
        if (vm.norm() >= kYawSpeedEps) {
          fast = mid;
          v = vm;
        } else {
          slow = mid;
        }
      }
      fallback = std::atan2(v.y(), v.x());
      break;
    }
    slow = fast;
  }
  return flat_state_from(d, fallback);
}

namespace {

// Assembles the (6M x 6M) banded system of the minimum-jerk spline: start
// pos/vel/acc, then per interior junction jerk and snap continuity (the
// optimality conditions), waypoint interpolation, and pos/vel/acc
// continuity, then end pos/vel/acc.
BandedSystem assemble(std::span<const double> T) {
  const int m = static_cast<int>(T.size());
  BandedSystem a(6 * m, 6, 6);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  for (int i = 0; i < m - 1; ++i) {
    const double t1 = T[i], t2 = t1 * t1, t3 = t2 * t1, t4 = t2 * t2, t5 = t4 * t1;
    const int r = 6 * i;
    a(r + 3, r + 3) = 6.0;
    a(r + 3, r + 4) = 24.0 * t1;
    a(r + 3, r + 5) = 60.0 * t2;
    a(r + 3, r + 9) = -6.0;
    a(r + 4, r + 4) = 24.0;
    a(r + 4, r + 5) = 120.0 * t1;
    a(r + 4, r + 10) = -24.0;
    for (int k = 0; k < 6; ++k) {
      const double tk = k == 0 ? 1.0 : k == 1 ? t1 : k == 2 ? t2 : k == 3 ? t3 : k == 4 ? t4 : t5;
      a(r + 5, r + k) = tk;
      a(r + 6, r + k) = tk;
    }
    a(r + 6, r + 6) = -1.0;
    a(r + 7, r + 1) = 1.0;
    a(r + 7, r + 2) = 2.0 * t1;
    a(r + 7, r + 3) = 3.0 * t2;
    a(r + 7, r + 4) = 4.0 * t3;
    a(r + 7, r + 5) = 5.0 * t4;
    a(r + 7, r + 7) = -1.0;
    a(r + 8, r + 2) = 2.0;
    a(r + 8, r + 3) = 6.0 * t1;
    a(r + 8, r + 4) = 12.0 * t2;
    a(r + 8, r + 5) = 20.0 * t3;
    a(r + 8, r + 8) = -2.0;
  }
  const double t1 = T[m - 1], t2 = t1 * t1, t3 = t2 * t1, t4 = t2 * t2, t5 = t4 * t1;
  const int r = 6 * m - 6;
  a(r + 3, r + 0) = 1.0;
  a(r + 3, r + 1) = t1;
  a(r + 3, r + 2) = t2;
  a(r + 3, r + 3) = t3;
  a(r + 3, r + 4) = t4;
  a(r + 3, r + 5) = t5;
  a(r + 4, r + 1) = 1.0;
  a(r + 4, r + 2) = 2.0 * t1;
  a(r + 4, r + 3) = 3.0 * t2;
  a(r + 4, r + 4) = 4.0 * t3;
  a(r + 4, r + 5) = 5.0 * t4;
  a(r + 5, r + 2) = 2.0;
  a(r + 5, r + 3) = 6.0 * t1;
  a(r + 5, r + 4) = 12.0 * t2;
  a(r + 5, r + 5) = 20.0 * t3;
  return a;
}

void check_durations(std::span<const double> T) {
  if (T.empty()) throw SingularSystem("trajectory needs at least one piece");
  for (double d : T) {
    if (!std::isfinite(d) || d <= 0.0) {
      throw SingularSystem("non-positive or non-finite piece duration");
    }
  }
}

}  // namespace

PiecewisePolyTraj construct_minjerk(const TrajParams& params) {
  const int m = params.num_pieces();
  if (m < 1 || static_cast<int>(params.waypoints.size()) != m - 1) {
    throw SingularSystem("waypoint count must be piece count - 1");
  }
  const std::vector<double> T = params.durations();
  check_durations(T);

  BandedSystem a = assemble(T);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(6 * m, 2);
  b.row(0) = params.start.pos.transpose();
  b.row(1) = params.start.vel.transpose();
  b.row(2) = params.start.acc.transpose();
  for (int i = 0; i < m - 1; ++i) b.row(6 * i + 5) = params.waypoints[i].transpose();
  b.row(6 * m - 3) = params.end.pos.transpose();
  b.row(6 * m - 2) = params.end.vel.transpose();
  b.row(6 * m - 1) = params.end.acc.transpose();

  a.factorize_lu();
  a.solve(b);
  if (!b.allFinite()) throw SingularSystem("non-finite spline coefficients");

  std::vector<CoeffMat> pieces(m);
  for (int i = 0; i < m; ++i) pieces[i] = b.block<6, 2>(6 * i, 0);
  return PiecewisePolyTraj(std::move(pieces), T, params.start, params.end, params.start_yaw);
}

ParamGrad backprop_params(const PiecewisePolyTraj& traj, const TrajParams& params,
                          std::span<const CoeffMat> grad_coeffs,
                          std::span<const double> grad_durations_direct) {
  const int m = traj.num_pieces();
  const auto T = traj.durations();
  check_durations(T);

  BandedSystem a = assemble(T);
  a.factorize_lu();

  // Adjoint: lambda = A^{-T} dJ/dc.
  Eigen::MatrixXd adj(6 * m, 2);
  for (int i = 0; i < m; ++i) adj.block<6, 2>(6 * i, 0) = grad_coeffs[i];
  a.solve_adjoint(adj);

  ParamGrad out;
  out.waypoints.resize(m - 1);
  for (int i = 0; i < m - 1; ++i) out.waypoints[i] = adj.row(6 * i + 5).transpose();

  // dJ/dT_i = direct - lambda^T (dA/dT_i) c.
  std::vector<double> grad_T(grad_durations_direct.begin(), grad_durations_direct.end());
  grad_T.resize(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const CoeffMat& c = traj.coeffs(i);
    const double t1 = T[i], t2 = t1 * t1, t3 = t2 * t1, t4 = t2 * t2;
    const Eigen::RowVector2d vel = c.row(1) + 2.0 * t1 * c.row(2) + 3.0 * t2 * c.row(3) +
                                   4.0 * t3 * c.row(4) + 5.0 * t4 * c.row(5);
    const Eigen::RowVector2d acc =
        2.0 * c.row(2) + 6.0 * t1 * c.row(3) + 12.0 * t2 * c.row(4) + 20.0 * t3 * c.row(5);
    const Eigen::RowVector2d jerk = 6.0 * c.row(3) + 24.0 * t1 * c.row(4) + 60.0 * t2 * c.row(5);
    if (i < m - 1) {
      const Eigen::RowVector2d snap = 24.0 * c.row(4) + 120.0 * t1 * c.row(5);
      const Eigen::RowVector2d crackle = 120.0 * c.row(5);
      const int r = 6 * i;
      grad_T[i] -= adj.row(r + 3).dot(snap) + adj.row(r + 4).dot(crackle) +
                   adj.row(r + 5).dot(vel) + adj.row(r + 6).dot(vel) + adj.row(r + 7).dot(acc) +
                   adj.row(r + 8).dot(jerk);
    } else {
      const int r = 6 * m - 3;
      grad_T[i] -= adj.row(r).dot(vel) + adj.row(r + 1).dot(acc) + adj.row(r + 2).dot(jerk);
    }
  }

  out.tau.resize(m);
  for (int i = 0; i < m; ++i) out.tau[i] = grad_T[i] * duration_dtau(params.tau[i]);
  return out;
}

}  // namespace crowdnav::traj
