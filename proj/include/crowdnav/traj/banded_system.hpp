#pragma once

#include <vector>

#include <Eigen/Core>

namespace crowdnav::traj {

// Square banded matrix with in-place LU factorization (no pivoting).
// Storage is column-compressed by diagonal offset, so memory and work are
// linear in the dimension for fixed bandwidths.
class BandedSystem {
 public:
  BandedSystem() = default;
  BandedSystem(int n, int lower_bw, int upper_bw);

  int size() const { return n_; }

  double& operator()(int i, int j) { return data_[index(i, j)]; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }

  // Throws SingularSystem when a pivot is numerically zero.
  void factorize_lu();

  // Solves A x = b in place (b has one column per right-hand side).
  void solve(Eigen::MatrixXd& b) const;
  // Solves A^T x = b in place.
  void solve_adjoint(Eigen::MatrixXd& b) const;

 private:
  int index(int i, int j) const { return (i - j + upper_bw_) * n_ + j; }

  int n_ = 0;
  int lower_bw_ = 0;
  int upper_bw_ = 0;
  std::vector<double> data_;
};

}  // namespace crowdnav::traj
