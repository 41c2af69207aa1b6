#pragma once

#include <cstdint>
#include <random>

#include "crowdnav/cost/cost_model.hpp"
#include "crowdnav/policy/policy_net.hpp"

namespace crowdnav::policy {

inline constexpr double kRawMin = -3.0;
inline constexpr double kRawMax = 2.0;

struct ActionSample {
  ActionVec raw = ActionVec::Zero();
  cost::CostWeights weights;
  double log_prob = 0.0;
};

// w = exp(clamp(raw, -3, 2)) component-wise, in (w_T, w_f, w_yr, w_s, w_h) order.
cost::CostWeights weights_from_raw(const ActionVec& raw);

// Diagonal Gaussian log density of raw under N(mean, std^2 I).
double gaussian_log_prob(const ActionVec& raw, const ActionVec& mean, double std);

ActionSample sample_action(const ActionVec& mean, double std, std::mt19937_64& rng);

// Deterministic action at the mean.
ActionSample mean_action(const ActionVec& mean, double std);

// max(0.1, 0.6 - 0.05 * floor(episode / 200)).
double std_schedule(std::int64_t episode);

}  // namespace crowdnav::policy
