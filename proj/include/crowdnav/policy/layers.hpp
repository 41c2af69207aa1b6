#pragma once

#include <vector>

#include <Eigen/Dense>

// Single-sample layer kernels. Feature maps are (channels x H*W) matrices with
// column index y * W + x.
namespace crowdnav::policy::layers {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using ConstMatMap = Eigen::Map<const MatrixXd>;
using MatMap = Eigen::Map<MatrixXd>;
using ConstVecMap = Eigen::Map<const VectorXd>;
using VecMap = Eigen::Map<VectorXd>;

// Zero-padded k x k patches, stride 1: rows (c * k + ky) * k + kx.
MatrixXd im2col(const MatrixXd& in, int h, int w, int k, int pad);
MatrixXd col2im(const MatrixXd& cols, int channels, int h, int w, int k, int pad);

// out = weight * im2col(in) + bias; weight is (out_ch x in_ch * k * k).
MatrixXd conv_forward(const MatrixXd& cols, const ConstMatMap& weight, const ConstVecMap& bias);
// Accumulates into d_weight / d_bias, returns d_cols.
MatrixXd conv_backward(const MatrixXd& d_out, const MatrixXd& cols, const ConstMatMap& weight,
                       MatMap d_weight, VecMap d_bias);

// Per-channel affine normalization with frozen statistics.
MatrixXd batchnorm_forward(const MatrixXd& in, const VectorXd& mean, const VectorXd& var,
                           const ConstVecMap& gamma, const ConstVecMap& beta, double eps,
                           MatrixXd* normalized);
MatrixXd batchnorm_backward(const MatrixXd& d_out, const MatrixXd& normalized,
                            const VectorXd& var, const ConstVecMap& gamma, double eps,
                            VecMap d_gamma, VecMap d_beta);

// 2 x 2 max pool with stride 2 (floor); records flat argmax per output.
MatrixXd maxpool_forward(const MatrixXd& in, int h, int w, std::vector<int>* argmax);
MatrixXd maxpool_backward(const MatrixXd& d_out, const std::vector<int>& argmax, int in_cols);

MatrixXd relu(const MatrixXd& x);
// Zeroes gradient where the forward output was not positive.
MatrixXd relu_backward(const MatrixXd& d_out, const MatrixXd& out);

}  // namespace crowdnav::policy::layers
