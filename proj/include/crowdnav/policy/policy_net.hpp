#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "crowdnav/obs/observation.hpp"

namespace crowdnav::policy {

inline constexpr int kActionDim = 5;
inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.1;

using ActionVec = Eigen::Matrix<double, kActionDim, 1>;

enum class ParamGroup { Encoder, Actor, Critic };

struct ParamBlock {
  std::string name;
  int offset = 0;
  int rows = 0;
  int cols = 0;
  ParamGroup group = ParamGroup::Encoder;
  int size() const { return rows * cols; }
};

// Actor-critic network: three conv/BN/ReLU/pool blocks over the two grids,
// spatial attention gate, FC environment embedding, MLP state encoder, and
// tanh actor / critic heads. All parameters live in one flat vector; batch
// norm always normalizes with its running statistics, which only change via
// update_bn_stats.
class PolicyNet {
 public:
  struct Output {
    ActionVec mean = ActionVec::Zero();
    double value = 0.0;
  };

  struct Cache;  // forward intermediates for backward

  PolicyNet();                       // all parameters zero, unit BN stats
  explicit PolicyNet(std::uint64_t seed);  // orthogonal initialization

  int num_params() const { return static_cast<int>(params_.size()); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(std::string_view name) const;

  // Running mean/var for the three BN layers, concatenated (16+16+32+32+32+32).
  Eigen::VectorXd& bn_stats() { return bn_stats_; }
  const Eigen::VectorXd& bn_stats() const { return bn_stats_; }

  Output forward(const obs::Observation& o, Cache* cache = nullptr) const;

  // Accumulates d(loss)/d(params) into grad given d(loss)/d(mean) and
  // d(loss)/d(value) for the sample recorded in cache.
  void backward(const Cache& cache, const ActionVec& d_mean, double d_value,
                Eigen::VectorXd& grad) const;

  // Moves each BN layer's running statistics toward the batch statistics of
  // `batch`, layer by layer (later layers see the refreshed earlier ones).
  void update_bn_stats(std::span<const obs::Observation> batch, double momentum = kBnMomentum);

  // Replaces the attention gate with a fixed 36-vector (tests only).
  void set_attention_override(std::optional<Eigen::VectorXd> gate) { gate_override_ = std::move(gate); }

 private:
  void add_block(const std::string& name, int rows, int cols, ParamGroup group);

  Eigen::VectorXd params_;
  std::vector<ParamBlock> blocks_;
  Eigen::VectorXd bn_stats_;
  std::optional<Eigen::VectorXd> gate_override_;
};

struct PolicyNet::Cache {
  Eigen::MatrixXd cols[3];
  Eigen::MatrixXd norm[3];
  Eigen::MatrixXd act[3];
  std::vector<int> pool_idx[3];
  Eigen::MatrixXd pooled;       // 32 x 36, before the gate
  Eigen::MatrixXd att_cols;     // 98 x 36
  std::vector<int> max_idx;     // channel argmax per position
  Eigen::VectorXd gate;         // 36
  Eigen::VectorXd flat;         // 1152
  Eigen::VectorXd env[2];
  Eigen::VectorXd state_in;
  Eigen::VectorXd st[2];
  Eigen::VectorXd embed;        // 160
  Eigen::VectorXd actor_h[2];
  Eigen::VectorXd critic_h[2];
};

// Parameter-group learning rate vector aligned with params().
Eigen::VectorXd group_learning_rates(const PolicyNet& net, double lr_encoder, double lr_actor,
                                     double lr_critic);

}  // namespace crowdnav::policy
