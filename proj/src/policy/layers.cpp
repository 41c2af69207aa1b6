#include "crowdnav/policy/layers.hpp"

#include <cmath>

namespace crowdnav::policy::layers {

MatrixXd im2col(const MatrixXd& in, int h, int w, int k, int pad) {
  const int c = static_cast<int>(in.rows());
  MatrixXd cols = MatrixXd::Zero(static_cast<Eigen::Index>(c) * k * k, h * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int row = (ch * k + ky) * k + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - pad;
            if (sx < 0 || sx >= w) continue;
            cols(row, y * w + x) = in(ch, sy * w + sx);
          }
        }
      }
    }
  }
  return cols;
}

MatrixXd col2im(const MatrixXd& cols, int channels, int h, int w, int k, int pad) {
  MatrixXd out = MatrixXd::Zero(channels, h * w);
  for (int ch = 0; ch < channels; ++ch) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int row = (ch * k + ky) * k + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - pad;
            if (sx < 0 || sx >= w) continue;
            out(ch, sy * w + sx) += cols(row, y * w + x);
          }
        }
      }
    }
  }
  return out;
}

MatrixXd conv_forward(const MatrixXd& cols, const ConstMatMap& weight, const ConstVecMap& bias) {
  MatrixXd out = weight * cols;
  out.colwise() += bias;
  return out;
}

MatrixXd conv_backward(const MatrixXd& d_out, const MatrixXd& cols, const ConstMatMap& weight,
                       MatMap d_weight, VecMap d_bias) {
  d_weight.noalias() += d_out * cols.transpose();
  d_bias += d_out.rowwise().sum();
  return weight.transpose() * d_out;
}

MatrixXd batchnorm_forward(const MatrixXd& in, const VectorXd& mean, const VectorXd& var,
                           const ConstVecMap& gamma, const ConstVecMap& beta, double eps,
                           MatrixXd* normalized) {
  const VectorXd inv_std = (var.array() + eps).rsqrt();
  MatrixXd xhat = (in.colwise() - mean).array().colwise() * inv_std.array();
  MatrixXd out = (xhat.array().colwise() * gamma.array()).colwise() + beta.array();
  if (normalized != nullptr) *normalized = std::move(xhat);
  return out;
}

MatrixXd batchnorm_backward(const MatrixXd& d_out, const MatrixXd& normalized,
                            const VectorXd& var, const ConstVecMap& gamma, double eps,
                            VecMap d_gamma, VecMap d_beta) {
  d_gamma += (d_out.array() * normalized.array()).rowwise().sum().matrix();
  d_beta += d_out.rowwise().sum();
  const VectorXd scale = gamma.array() * (var.array() + eps).rsqrt();
  return d_out.array().colwise() * scale.array();
}

MatrixXd maxpool_forward(const MatrixXd& in, int h, int w, std::vector<int>* argmax) {
  const int oh = h / 2, ow = w / 2;
  const int c = static_cast<int>(in.rows());
  MatrixXd out(c, oh * ow);
  if (argmax != nullptr) argmax->assign(static_cast<std::size_t>(c) * oh * ow, 0);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        int best = (2 * y) * w + 2 * x;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = (2 * y + dy) * w + 2 * x + dx;
            if (in(ch, idx) > in(ch, best)) best = idx;
          }
        }
        out(ch, y * ow + x) = in(ch, best);
        if (argmax != nullptr) (*argmax)[static_cast<std::size_t>(ch) * oh * ow + y * ow + x] = best;
      }
    }
  }
  return out;
}

MatrixXd maxpool_backward(const MatrixXd& d_out, const std::vector<int>& argmax, int in_cols) {
  const int c = static_cast<int>(d_out.rows());
  const int n = static_cast<int>(d_out.cols());
  MatrixXd d_in = MatrixXd::Zero(c, in_cols);
  for (int ch = 0; ch < c; ++ch) {
    for (int j = 0; j < n; ++j) {
      d_in(ch, argmax[static_cast<std::size_t>(ch) * n + j]) += d_out(ch, j);
    }
  }
  return d_in;
}

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }

MatrixXd relu_backward(const MatrixXd& d_out, const MatrixXd& out) {
  return (out.array() > 0.0).select(d_out, 0.0);
}

}  // namespace crowdnav::policy::layers
