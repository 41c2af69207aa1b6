#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "crowdnav/common/geometry.hpp"

namespace crowdnav::traj {

inline constexpr int kNumCoeffs = 6;      // quintic
inline constexpr double kMinDuration = 0.05;  // T_min [s]
inline constexpr double kYawSpeedEps = 1e-3;  // v_eps [m/s]
inline constexpr int kDefaultPieces = 5;

// Row k holds the coefficient of s^k (local piece time), one column per axis.
using CoeffMat = Eigen::Matrix<double, kNumCoeffs, 2>;

struct BoundaryState {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  Vec2 acc = Vec2::Zero();
};

struct FlatState {
  Vec2 pos = Vec2::Zero();
  Vec2 vel = Vec2::Zero();
  Vec2 acc = Vec2::Zero();
  Vec2 jerk = Vec2::Zero();
  double yaw = 0.0;       // (-pi, pi]
  double yaw_rate = 0.0;
};

// Position and its first three derivatives; entries above max_order are zero.
struct Derivatives {
  std::array<Vec2, 4> d{Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  const Vec2& pos() const { return d[0]; }
  const Vec2& vel() const { return d[1]; }
  const Vec2& acc() const { return d[2]; }
  const Vec2& jerk() const { return d[3]; }
};

// T = T_min + softplus(tau), so every real tau maps to an admissible duration.
double duration_from_tau(double tau);
double tau_from_duration(double duration);
// dT/dtau, the logistic sigmoid.
double duration_dtau(double tau);

// Decision variables of the spatial-temporal solve.
struct TrajParams {
  std::vector<Vec2> waypoints;  // M - 1 intermediate junction positions
  std::vector<double> tau;      // M duration pre-images
  BoundaryState start;
  BoundaryState end;
  double start_yaw = 0.0;  // heading used while the trajectory is at rest

  int num_pieces() const { return static_cast<int>(tau.size()); }
  std::vector<double> durations() const;
};

// Piecewise quintic 2-D trajectory. Immutable after construction.
class PiecewisePolyTraj {
 public:
  PiecewisePolyTraj() = default;
  PiecewisePolyTraj(std::vector<CoeffMat> pieces, std::vector<double> durations,
                    BoundaryState start, BoundaryState end, double start_yaw = 0.0);

  int num_pieces() const { return static_cast<int>(pieces_.size()); }
  bool empty() const { return pieces_.empty(); }
  const CoeffMat& coeffs(int i) const { return pieces_[i]; }
  std::span<const CoeffMat> pieces() const { return pieces_; }
  double duration(int i) const { return durations_[i]; }
  std::span<const double> durations() const { return durations_; }
  double start_time(int i) const { return start_times_[i]; }
  double total_duration() const { return total_; }
  const BoundaryState& start() const { return start_; }
  const BoundaryState& end() const { return end_; }
  double start_yaw() const { return start_yaw_; }

  // Piece index and local time for global time t (closed-left / open-right
  // intervals, t == T maps to the last piece). Throws OutOfDomain.
  std::pair<int, double> locate(double t) const;

  Derivatives eval(double t, int max_order = 3) const;
  FlatState flat_state(double t) const;

 private:
  std::vector<CoeffMat> pieces_;
  std::vector<double> durations_;
  std::vector<double> start_times_;
  double total_ = 0.0;
  BoundaryState start_;
  BoundaryState end_;
  double start_yaw_ = 0.0;
};

// Derivatives of a single piece at local time s.
Derivatives eval_piece(const CoeffMat& c, double s, int max_order = 3);

// Minimum-jerk quintic spline through the waypoints with the given durations
// and boundary pos/vel/acc. Throws SingularSystem on degenerate durations.
PiecewisePolyTraj construct_minjerk(const TrajParams& params);

// Chain rule from coefficient-space gradients (and direct duration gradients)
// back to the decision variables.
struct ParamGrad {
  std::vector<Vec2> waypoints;
  std::vector<double> tau;
};

ParamGrad backprop_params(const PiecewisePolyTraj& traj, const TrajParams& params,
                          std::span<const CoeffMat> grad_coeffs,
                          std::span<const double> grad_durations_direct);

// Heading from the planar velocity with rest-hold semantics.
FlatState flat_state_from(const Derivatives& d, double fallback_yaw);

}  // namespace crowdnav::traj
