#pragma once

#include <random>
#include <span>

#include "crowdnav/policy/adam.hpp"
#include "crowdnav/policy/policy_net.hpp"
#include "crowdnav/rl/episode.hpp"

namespace crowdnav::rl {

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatch = 64;
  double max_grad_norm = 0.5;
  double value_coef = 0.5;
  double value_scale = 0.01;  // critic regresses value_scale * return
  int bn_batch = 64;          // observations used for the BN statistics pass
  bool measure_post_ratios = false;
};

struct UpdateStats {
  double actor_loss = 0.0;   // mean over minibatches
  double critic_loss = 0.0;
  double clip_fraction = 0.0;
  double first_pass_max_ratio_dev = 0.0;  // max |ratio - 1| before any step
  double post_ratio_in_bound = 1.0;       // fraction within [1 - 2 eps, 1 + 2 eps]
  double mean_grad_norm = 0.0;
  int minibatches = 0;
  bool aborted = false;
};

// Clipped-surrogate update over full episodes (steps with recorded
// observations, episodes contiguous and closed by done). On a non-finite
// loss or gradient the network and optimizer are restored.
UpdateStats ppo_update(policy::PolicyNet& net, policy::Adam& adam, std::span<const StepRecord> steps,
                       const PpoConfig& config, std::mt19937_64& rng);

// Global-norm clipping; returns the norm before clipping.
double clip_grad_norm(Eigen::VectorXd& grad, double max_norm);

}  // namespace crowdnav::rl
