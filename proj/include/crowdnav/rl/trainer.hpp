#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "crowdnav/bench/scenario.hpp"
#include "crowdnav/policy/adam.hpp"
#include "crowdnav/policy/checkpoint.hpp"
#include "crowdnav/policy/policy_net.hpp"
#include "crowdnav/rl/episode.hpp"
#include "crowdnav/rl/ppo.hpp"

namespace crowdnav::rl {

struct TrainConfig {
  PpoConfig ppo;
  EpisodeConfig episode;
  int episodes_per_update = 8;
  int checkpoint_every = 100;
  double lr_actor = 3e-4;
  double lr_encoder = 1e-3;
  double lr_critic = 1e-3;
};

struct EpisodeLog {
  std::int64_t episode = 0;  // 0-based
  double ret = 0.0;
  int length = 0;            // decision steps
  Termination termination = Termination::Timeout;
  std::int64_t tcc = 0;
  double std = 0.0;
  double time = 0.0;
};

// World seed for training episode `episode` under run seed `seed`.
std::uint64_t training_episode_seed(std::uint64_t seed, std::int64_t episode);

// Policy agent: samples around the network mean with `std`, or returns the
// mean itself when `deterministic`.
Agent policy_agent(const policy::PolicyNet& net, double std, std::mt19937_64* rng,
                   bool deterministic);

class Trainer {
 public:
  using EpisodeCallback = std::function<void(const EpisodeLog&)>;
  using UpdateCallback = std::function<void(const UpdateStats&)>;
  using CheckpointCallback = std::function<void(const policy::Checkpoint&)>;

  Trainer(bench::Scenario scenario, TrainConfig config, std::uint64_t seed);

  // Runs episodes until `total_episodes` have completed. PPO updates fire
  // every episodes_per_update episodes and at each checkpoint boundary.
  void train(std::int64_t total_episodes, const EpisodeCallback& on_episode = {},
             const CheckpointCallback& on_checkpoint = {}, const UpdateCallback& on_update = {});

  policy::Checkpoint checkpoint() const;
  void restore(const policy::Checkpoint& ckpt);  // throws ScenarioInvalid on mismatch

  const policy::PolicyNet& net() const { return net_; }
  std::int64_t episode() const { return episode_; }

 private:
  void update(const UpdateCallback& on_update);

  bench::Scenario scenario_;
  std::shared_ptr<const cost::ObstacleField> field_;
  TrainConfig config_;
  std::uint64_t seed_;
  policy::PolicyNet net_;
  policy::Adam adam_;
  std::mt19937_64 rng_;
  std::int64_t episode_ = 0;
  std::int64_t updates_ = 0;
  std::vector<StepRecord> buffer_;
  int buffered_episodes_ = 0;
};

// Network parameters and BN statistics from a checkpoint.
policy::PolicyNet net_from_checkpoint(const policy::Checkpoint& ckpt);

}  // namespace crowdnav::rl
