#include "crowdnav/traj/banded_system.hpp"

#include <algorithm>
#include <cmath>

#include "crowdnav/common/errors.hpp"

namespace crowdnav::traj {

BandedSystem::BandedSystem(int n, int lower_bw, int upper_bw)
    : n_(n),
      lower_bw_(lower_bw),
      upper_bw_(upper_bw),
      data_(static_cast<std::size_t>(n) * (lower_bw + upper_bw + 1), 0.0) {}

void BandedSystem::factorize_lu() {
  double scale = 0.0;
  for (double v : data_) scale = std::max(scale, std::abs(v));
  const double tiny = 1e-14 * std::max(scale, 1.0);

  for (int k = 0; k < n_; ++k) {
    const double pivot = (*this)(k, k);
    if (!std::isfinite(pivot) || std::abs(pivot) <= tiny) {
      throw SingularSystem("banded LU: zero pivot at row " + std::to_string(k));
    }
    const int i_max = std::min(k + lower_bw_, n_ - 1);
    for (int i = k + 1; i <= i_max; ++i) {
      if ((*this)(i, k) != 0.0) (*this)(i, k) /= pivot;
    }
    const int j_max = std::min(k + upper_bw_, n_ - 1);
    for (int j = k + 1; j <= j_max; ++j) {
      const double akj = (*this)(k, j);
      if (akj == 0.0) continue;
      for (int i = k + 1; i <= i_max; ++i) {
        const double aik = (*this)(i, k);
        if (aik != 0.0) (*this)(i, j) -= aik * akj;
      }
    }
  }
}

void BandedSystem::solve(Eigen::MatrixXd& b) const {
  for (int j = 0; j < n_; ++j) {
    const int i_max = std::min(j + lower_bw_, n_ - 1);
    for (int i = j + 1; i <= i_max; ++i) {
      const double l = (*this)(i, j);
      if (l != 0.0) b.row(i) -= l * b.row(j);
    }
  }
  for (int j = n_ - 1; j >= 0; --j) {
    b.row(j) /= (*this)(j, j);
    const int i_min = std::max(0, j - upper_bw_);
    for (int i = i_min; i < j; ++i) {
      const double u = (*this)(i, j);
      if (u != 0.0) b.row(i) -= u * b.row(j);
    }
  }
}

void BandedSystem::solve_adjoint(Eigen::MatrixXd& b) const {
  // A^T = U^T L^T: forward with U^T, then backward with L^T.
  for (int j = 0; j < n_; ++j) {
    b.row(j) /= (*this)(j, j);
    const int i_max = std::min(j + upper_bw_, n_ - 1);
    for (int i = j + 1; i <= i_max; ++i) {
      const double u = (*this)(j, i);
      if (u != 0.0) b.row(i) -= u * b.row(j);
    }
  }
  for (int j = n_ - 1; j >= 0; --j) {
    const int i_min = std::max(0, j - lower_bw_);
    for (int i = i_min; i < j; ++i) {
      const double l = (*this)(j, i);
      if (l != 0.0) b.row(i) -= l * b.row(j);
    }
  }
}

}  // namespace crowdnav::traj
