#include "crowdnav/policy/policy_net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "crowdnav/common/errors.hpp"
#include "crowdnav/policy/layers.hpp"

namespace crowdnav::policy {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using layers::ConstMatMap;
using layers::ConstVecMap;
using layers::MatMap;
using layers::VecMap;

namespace {

constexpr int kChannels[4] = {2, 16, 32, 32};
constexpr int kSpatial[4] = {50, 25, 12, 6};
constexpr int kBnOffset[3] = {0, 32, 96};
constexpr int kAttKernel = 7;
constexpr int kFeat = 32 * 6 * 6;

// Block order; must match the add_block calls in the constructor.
enum Block {
  kConv1W, kConv1B, kBn1G, kBn1B,
  kConv2W, kConv2B, kBn2G, kBn2B,
  kConv3W, kConv3B, kBn3G, kBn3B,
  kAttW, kAttB,
  kEnv1W, kEnv1B, kEnv2W, kEnv2B,
  kSt1W, kSt1B, kSt2W, kSt2B,
  kAct1W, kAct1B, kAct2W, kAct2B, kAct3W, kAct3B,
  kCri1W, kCri1B, kCri2W, kCri2B, kCri3W, kCri3B,
  kNumBlocks
};

constexpr int conv_block(int l) { return kConv1W + 4 * l; }

MatrixXd orthogonal(int rows, int cols, double gain, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  const int big = std::max(rows, cols), small = std::min(rows, cols);
  MatrixXd a(big, small);
  for (int j = 0; j < small; ++j) {
    for (int i = 0; i < big; ++i) a(i, j) = n01(rng);
  }
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(big, small);
  const MatrixXd r = qr.matrixQR();
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return gain * (rows < cols ? MatrixXd(q.transpose()) : q);
}

VectorXd sigmoid(const VectorXd& s) { return (1.0 + (-s.array()).exp()).inverse().matrix(); }

}  // namespace

PolicyNet::PolicyNet() {
  using G = ParamGroup;
  for (int l = 0; l < 3; ++l) {
    const std::string n = std::to_string(l + 1);
    add_block("conv" + n + ".w", kChannels[l + 1], kChannels[l] * 9, G::Encoder);
    add_block("conv" + n + ".b", kChannels[l + 1], 1, G::Encoder);
    add_block("bn" + n + ".gamma", kChannels[l + 1], 1, G::Encoder);
    add_block("bn" + n + ".beta", kChannels[l + 1], 1, G::Encoder);
  }
  add_block("att.w", 1, 2 * kAttKernel * kAttKernel, G::Encoder);
  add_block("att.b", 1, 1, G::Encoder);
  add_block("env1.w", 256, kFeat, G::Encoder);
  add_block("env1.b", 256, 1, G::Encoder);
  add_block("env2.w", 128, 256, G::Encoder);
  add_block("env2.b", 128, 1, G::Encoder);
  add_block("st1.w", 32, 3, G::Encoder);
  add_block("st1.b", 32, 1, G::Encoder);
  add_block("st2.w", 32, 32, G::Encoder);
  add_block("st2.b", 32, 1, G::Encoder);
  add_block("actor1.w", 128, 160, G::Actor);
  add_block("actor1.b", 128, 1, G::Actor);
  add_block("actor2.w", 64, 128, G::Actor);
  add_block("actor2.b", 64, 1, G::Actor);
  add_block("actor3.w", kActionDim, 64, G::Actor);
  add_block("actor3.b", kActionDim, 1, G::Actor);
  add_block("critic1.w", 128, 160, G::Critic);
  add_block("critic1.b", 128, 1, G::Critic);
  add_block("critic2.w", 64, 128, G::Critic);
  add_block("critic2.b", 64, 1, G::Critic);
  add_block("critic3.w", 1, 64, G::Critic);
  add_block("critic3.b", 1, 1, G::Critic);
  if (static_cast<int>(blocks_.size()) != kNumBlocks) throw std::logic_error("block layout");
  params_ = VectorXd::Zero(blocks_.back().offset + blocks_.back().size());

  bn_stats_ = VectorXd::Zero(kBnOffset[2] + 2 * kChannels[3]);
  for (int l = 0; l < 3; ++l) {
    bn_stats_.segment(kBnOffset[l] + kChannels[l + 1], kChannels[l + 1]).setOnes();
  }
}

PolicyNet::PolicyNet(std::uint64_t seed) : PolicyNet() {
  std::mt19937_64 rng(seed);
  const double relu_gain = std::sqrt(2.0);
  const auto init = [&](int b, double gain) {
    const ParamBlock& blk = blocks_[b];
    MatMap(params_.data() + blk.offset, blk.rows, blk.cols) = orthogonal(blk.rows, blk.cols, gain, rng);
  };
  for (int l = 0; l < 3; ++l) {
    init(conv_block(l), relu_gain);
    const ParamBlock& g = blocks_[conv_block(l) + 2];
    params_.segment(g.offset, g.size()).setOnes();
  }
  init(kAttW, 1.0);
  for (int b : {kEnv1W, kEnv2W, kSt1W, kSt2W, kAct1W, kAct2W, kCri1W, kCri2W}) init(b, relu_gain);
  init(kAct3W, 0.01);
  init(kCri3W, 1.0);
}

void PolicyNet::add_block(const std::string& name, int rows, int cols, ParamGroup group) {
  const int offset = blocks_.empty() ? 0 : blocks_.back().offset + blocks_.back().size();
  blocks_.push_back({name, offset, rows, cols, group});
}

const ParamBlock& PolicyNet::block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("unknown parameter block " + std::string(name));
}

namespace {

struct View {
  const VectorXd& p;
  const std::vector<ParamBlock>& blocks;
  ConstMatMap mat(int b) const {
    return ConstMatMap(p.data() + blocks[b].offset, blocks[b].rows, blocks[b].cols);
  }
  ConstVecMap vec(int b) const { return ConstVecMap(p.data() + blocks[b].offset, blocks[b].size()); }
};

struct GradView {
  VectorXd& g;
  const std::vector<ParamBlock>& blocks;
  MatMap mat(int b) const { return MatMap(g.data() + blocks[b].offset, blocks[b].rows, blocks[b].cols); }
  VecMap vec(int b) const { return VecMap(g.data() + blocks[b].offset, blocks[b].size()); }
};

MatrixXd input_maps(const obs::Observation& o) {
  MatrixXd x(2, obs::kGridSize * obs::kGridSize);
  for (int i = 0; i < x.cols(); ++i) {
    x(0, i) = o.static_map[i];
    x(1, i) = o.ped_map[i];
  }
  return x;
}

}  // namespace

PolicyNet::Output PolicyNet::forward(const obs::Observation& o, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  const View v{params_, blocks_};

  MatrixXd x = input_maps(o);
  for (int l = 0; l < 3; ++l) {
    const int h = kSpatial[l], ch = kChannels[l + 1];
    const int b = conv_block(l);
    c.cols[l] = layers::im2col(x, h, h, 3, 1);
    const MatrixXd conv = layers::conv_forward(c.cols[l], v.mat(b), v.vec(b + 1));
    const MatrixXd z = layers::batchnorm_forward(conv, bn_stats_.segment(kBnOffset[l], ch),
                                                 bn_stats_.segment(kBnOffset[l] + ch, ch),
                                                 v.vec(b + 2), v.vec(b + 3), kBnEps, &c.norm[l]);
    c.act[l] = layers::relu(z);
    x = layers::maxpool_forward(c.act[l], h, h, &c.pool_idx[l]);
  }
  c.pooled = x;

  // Spatial attention over channel-wise mean and max maps.
  const int npos = kSpatial[3] * kSpatial[3];
  MatrixXd pooled_maps(2, npos);
  c.max_idx.assign(npos, 0);
  for (int j = 0; j < npos; ++j) {
    Eigen::Index arg = 0;
    pooled_maps(0, j) = c.pooled.col(j).mean();
    pooled_maps(1, j) = c.pooled.col(j).maxCoeff(&arg);
    c.max_idx[j] = static_cast<int>(arg);
  }
  c.att_cols = layers::im2col(pooled_maps, kSpatial[3], kSpatial[3], kAttKernel, kAttKernel / 2);
  if (gate_override_) {
    c.gate = *gate_override_;
  } else {
    const VectorXd s = (v.mat(kAttW) * c.att_cols).transpose().array() + v.vec(kAttB)(0);
    c.gate = sigmoid(s);
  }
  const MatrixXd gated = c.pooled.array().rowwise() * c.gate.transpose().array();
  c.flat = Eigen::Map<const VectorXd>(gated.data(), kFeat);

  c.env[0] = (v.mat(kEnv1W) * c.flat + v.vec(kEnv1B)).cwiseMax(0.0);
  c.env[1] = (v.mat(kEnv2W) * c.env[0] + v.vec(kEnv2B)).cwiseMax(0.0);
  c.state_in = Eigen::Vector3d(o.kin_state[0], o.kin_state[1], o.kin_state[2]);
  c.st[0] = (v.mat(kSt1W) * c.state_in + v.vec(kSt1B)).cwiseMax(0.0);
  c.st[1] = (v.mat(kSt2W) * c.st[0] + v.vec(kSt2B)).cwiseMax(0.0);
  c.embed.resize(160);
  c.embed << c.env[1], c.st[1];

  Output out;
  c.actor_h[0] = (v.mat(kAct1W) * c.embed + v.vec(kAct1B)).array().tanh();
  c.actor_h[1] = (v.mat(kAct2W) * c.actor_h[0] + v.vec(kAct2B)).array().tanh();
  out.mean = v.mat(kAct3W) * c.actor_h[1] + v.vec(kAct3B);
  c.critic_h[0] = (v.mat(kCri1W) * c.embed + v.vec(kCri1B)).array().tanh();
  c.critic_h[1] = (v.mat(kCri2W) * c.critic_h[0] + v.vec(kCri2B)).array().tanh();
  out.value = (v.mat(kCri3W) * c.critic_h[1])(0) + v.vec(kCri3B)(0);

  if (!out.mean.allFinite() || !std::isfinite(out.value)) {
    throw NonFinite("policy forward produced a non-finite output");
  }
  return out;
}

void PolicyNet::backward(const Cache& c, const ActionVec& d_mean, double d_value,
                         VectorXd& grad) const {
  if (grad.size() != params_.size()) grad = VectorXd::Zero(params_.size());
  const View v{params_, blocks_};
  const GradView g{grad, blocks_};

  // Heads.
  VectorXd d_embed = VectorXd::Zero(160);
  {
    g.mat(kAct3W).noalias() += d_mean * c.actor_h[1].transpose();
    g.vec(kAct3B) += d_mean;
    VectorXd dh = v.mat(kAct3W).transpose() * d_mean;
    dh.array() *= 1.0 - c.actor_h[1].array().square();
    g.mat(kAct2W).noalias() += dh * c.actor_h[0].transpose();
    g.vec(kAct2B) += dh;
    VectorXd dh0 = v.mat(kAct2W).transpose() * dh;
    dh0.array() *= 1.0 - c.actor_h[0].array().square();
    g.mat(kAct1W).noalias() += dh0 * c.embed.transpose();
    g.vec(kAct1B) += dh0;
    d_embed.noalias() += v.mat(kAct1W).transpose() * dh0;
  }
  {
    g.mat(kCri3W) += d_value * c.critic_h[1].transpose();
    g.vec(kCri3B)(0) += d_value;
    VectorXd dh = v.mat(kCri3W).transpose() * d_value;
    dh.array() *= 1.0 - c.critic_h[1].array().square();
    g.mat(kCri2W).noalias() += dh * c.critic_h[0].transpose();
    g.vec(kCri2B) += dh;
    VectorXd dh0 = v.mat(kCri2W).transpose() * dh;
    dh0.array() *= 1.0 - c.critic_h[0].array().square();
    g.mat(kCri1W).noalias() += dh0 * c.embed.transpose();
    g.vec(kCri1B) += dh0;
    d_embed.noalias() += v.mat(kCri1W).transpose() * dh0;
  }

  // State encoder.
  {
    VectorXd d1 = d_embed.tail(32);
    d1 = (c.st[1].array() > 0.0).select(d1, 0.0);
    g.mat(kSt2W).noalias() += d1 * c.st[0].transpose();
    g.vec(kSt2B) += d1;
    VectorXd d0 = v.mat(kSt2W).transpose() * d1;
    d0 = (c.st[0].array() > 0.0).select(d0, 0.0);
    g.mat(kSt1W).noalias() += d0 * c.state_in.transpose();
    g.vec(kSt1B) += d0;
  }

  // Environment FC.
  VectorXd d_flat;
  {
    VectorXd d1 = d_embed.head(128);
    d1 = (c.env[1].array() > 0.0).select(d1, 0.0);
    g.mat(kEnv2W).noalias() += d1 * c.env[0].transpose();
    g.vec(kEnv2B) += d1;
    VectorXd d0 = v.mat(kEnv2W).transpose() * d1;
    d0 = (c.env[0].array() > 0.0).select(d0, 0.0);
    g.mat(kEnv1W).noalias() += d0 * c.flat.transpose();
    g.vec(kEnv1B) += d0;
    d_flat = v.mat(kEnv1W).transpose() * d0;
  }

  // Attention gate.
  const int npos = kSpatial[3] * kSpatial[3];
  const MatrixXd d_gated = Eigen::Map<const MatrixXd>(d_flat.data(), kChannels[3], npos);
  MatrixXd d_pooled = d_gated.array().rowwise() * c.gate.transpose().array();
  if (!gate_override_) {
    const VectorXd d_gate = (d_gated.array() * c.pooled.array()).colwise().sum().transpose();
    const VectorXd d_s = d_gate.array() * c.gate.array() * (1.0 - c.gate.array());
    g.mat(kAttW).noalias() += d_s.transpose() * c.att_cols.transpose();
    g.vec(kAttB)(0) += d_s.sum();
    const MatrixXd d_cols = v.mat(kAttW).transpose() * d_s.transpose();
    const MatrixXd d_maps =
        layers::col2im(d_cols, 2, kSpatial[3], kSpatial[3], kAttKernel, kAttKernel / 2);
    for (int j = 0; j < npos; ++j) {
      d_pooled.col(j).array() += d_maps(0, j) / kChannels[3];
      d_pooled(c.max_idx[j], j) += d_maps(1, j);
    }
  }

  // Conv stack.
  MatrixXd d_x = d_pooled;
  for (int l = 2; l >= 0; --l) {
    const int h = kSpatial[l], ch = kChannels[l + 1];
    const int b = conv_block(l);
    MatrixXd d_act = layers::maxpool_backward(d_x, c.pool_idx[l], h * h);
    d_act = layers::relu_backward(d_act, c.act[l]);
    const MatrixXd d_conv = layers::batchnorm_backward(
        d_act, c.norm[l], bn_stats_.segment(kBnOffset[l] + ch, ch), v.vec(b + 2), kBnEps,
        g.vec(b + 2), g.vec(b + 3));
    const MatrixXd d_cols = layers::conv_backward(d_conv, c.cols[l], v.mat(b), g.mat(b), g.vec(b + 1));
    if (l > 0) d_x = layers::col2im(d_cols, kChannels[l], h, h, 3, 1);
  }
}

void PolicyNet::update_bn_stats(std::span<const obs::Observation> batch, double momentum) {
  if (batch.empty()) return;
  const View v{params_, blocks_};
  std::vector<MatrixXd> xs;
  xs.reserve(batch.size());
  for (const auto& o : batch) xs.push_back(input_maps(o));

  std::vector<MatrixXd> convs(batch.size());
  for (int l = 0; l < 3; ++l) {
    const int h = kSpatial[l], ch = kChannels[l + 1];
    const int b = conv_block(l);
    VectorXd sum = VectorXd::Zero(ch);
    for (std::size_t s = 0; s < xs.size(); ++s) {
      convs[s] = layers::conv_forward(layers::im2col(xs[s], h, h, 3, 1), v.mat(b), v.vec(b + 1));
      sum += convs[s].rowwise().sum();
    }
    const double n = static_cast<double>(xs.size()) * h * h;
    const VectorXd mean = sum / n;
    VectorXd sq = VectorXd::Zero(ch);
    for (const auto& m : convs) sq += (m.colwise() - mean).array().square().rowwise().sum().matrix();
    const VectorXd var = sq / std::max(n - 1.0, 1.0);

    auto run_mean = bn_stats_.segment(kBnOffset[l], ch);
    auto run_var = bn_stats_.segment(kBnOffset[l] + ch, ch);
    run_mean = (1.0 - momentum) * run_mean + momentum * mean;
    run_var = (1.0 - momentum) * run_var + momentum * var;

    for (std::size_t s = 0; s < xs.size(); ++s) {
      const MatrixXd z = layers::batchnorm_forward(convs[s], run_mean, run_var, v.vec(b + 2),
                                                   v.vec(b + 3), kBnEps, nullptr);
      xs[s] = layers::maxpool_forward(layers::relu(z), h, h, nullptr);
    }
  }
}

VectorXd group_learning_rates(const PolicyNet& net, double lr_encoder, double lr_actor,
                              double lr_critic) {
  VectorXd lr(net.num_params());
  for (const auto& b : net.blocks()) {
    const double r = b.group == ParamGroup::Actor ? lr_actor
                     : b.group == ParamGroup::Critic ? lr_critic
                                                     : lr_encoder;
    lr.segment(b.offset, b.size()).setConstant(r);
  }
  return lr;
}

}  // namespace crowdnav::policy
